#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/SparseCore>

#include "pro/gpro.hpp"

namespace pro {

// Thrown when a policy gives some node no way forward or makes the
// evaluation system singular: the walk cannot reach v_t from everywhere.
class ImproperPolicyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown by pagerank() when the chain restricted to active edges is not
// irreducible and no zapping is present to fix that.
class IrreducibilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown by decompose() when the taboo system cannot be solved at all and
// the split has no meaning.
class DegenerateDecompositionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EvalOptions {
  // Exclude v_t from the restart distribution of zapping. The default keeps
  // the uniform distribution over all nodes.
  bool zap_excludes_target = false;
};

// Row-stochastic transition matrix of the walk under a policy: active edges
// normalized by weight, mixed with the uniform restart when zapping is set,
// and a unit self-loop at v_t.
struct TransitionMatrix {
  Eigen::SparseMatrix<double, Eigen::RowMajor> q;
};

TransitionMatrix transition_matrix(const GproInstance& inst, const Policy& policy,
                                   const EvalOptions& opts = {});

struct HittingTimes {
  std::vector<double> phi;  // expected cost to absorption, phi[v_t] == 0
  double residual = 0.0;    // ||(I - Q)phi - r||_inf over non-target rows
};

// Expected cost to reach v_t from every node, by direct linear solve with one
// refinement step. Throws ImproperPolicyError if some node has no active
// outgoing edge or the system is singular beyond tolerance.
HittingTimes hitting_times(const GproInstance& inst, const Policy& policy,
                           const EvalOptions& opts = {});

// Stationary distribution of the recurrent chain in which v_t is merged back
// into v_s (the walk restarts instead of stopping). Indexed by node id with
// pi[v_t] = 0; the merged node's mass sits at v_s. Requires the active chain
// to be irreducible unless zapping makes it so.
std::vector<double> pagerank(const GproInstance& inst, const Policy& policy,
                             const EvalOptions& opts = {});

// Split of the walks from u by whether they visit w before v_t. A branch
// with no mass (p_uv at 0 or 1) reports 0 for its conditional mean.
struct Decomposition {
  double p_uv = 0.0;    // probability of reaching v_t without touching w
  double phi_uv = 0.0;  // mean cost of those walks
  double phi_uw = 0.0;  // mean cost up to the first visit of w, given w is hit first
  double phi_w = 0.0;   // plain hitting time from w
  // |phi_u - (p_uv phi_uv + (1 - p_uv) (phi_uw + phi_w))|
  double reconstruction_error = 0.0;
};

Decomposition decompose(const GproInstance& inst, const Policy& policy, NodeId u, NodeId w,
                        const EvalOptions& opts = {});

}  // namespace pro
