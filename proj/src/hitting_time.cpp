#include "pro/hitting_time.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pro/detail/linsolve.hpp"
#include "pro/tolerances.hpp"

namespace pro {

namespace {

struct Rows {
  // weight-normalized transition rows over active edges, and the expected
  // edge cost paid when leaving each node (zapping not yet mixed in)
  std::vector<std::vector<std::pair<NodeId, double>>> prob;
  std::vector<double> cost;
};

bool edge_active(const GproInstance& inst, const Policy& policy, EdgeId e) {
  if (!inst.edges[e].free) return true;
  return policy.active[inst.free_slot(e)] != 0;
}

Rows active_rows(const GproInstance& inst, const Policy& policy) {
  if (static_cast<int>(policy.active.size()) != inst.num_free())
    throw std::invalid_argument("policy size does not match the instance's free edges");
  const int n = inst.num_nodes();
  Rows rows;
  rows.prob.resize(n);
  rows.cost.assign(n, 0.0);
  for (NodeId v = 0; v < n; ++v) {
    if (v == inst.v_t) {
      rows.prob[v].push_back({v, 1.0});
      continue;
    }
    double wsum = 0.0;
    for (EdgeId e : inst.out_edges(v))
      if (edge_active(inst, policy, e)) wsum += inst.edges[e].weight;
    if (!(wsum > 0.0))
      throw ImproperPolicyError("node " + std::to_string(v) + " (" + inst.names[v] +
                                ") has no active outgoing edge");
    for (EdgeId e : inst.out_edges(v)) {
      if (!edge_active(inst, policy, e)) continue;
      const double q = inst.edges[e].weight / wsum;
      rows.prob[v].push_back({inst.edges[e].to, q});
      rows.cost[v] += q * inst.edges[e].cost;
    }
  }
  return rows;
}

double zap_rate(const GproInstance& inst) {
  return inst.zapping ? *inst.zapping : 0.0;
}

// Number of restart targets under the given options.
int zap_targets(const GproInstance& inst, const EvalOptions& opts) {
  return opts.zap_excludes_target ? inst.num_nodes() - 1 : inst.num_nodes();
}

}  // namespace

TransitionMatrix transition_matrix(const GproInstance& inst, const Policy& policy,
                                   const EvalOptions& opts) {
  const Rows rows = active_rows(inst, policy);
  const int n = inst.num_nodes();
  const double c = zap_rate(inst);
  std::vector<Eigen::Triplet<double>> trips;
  for (NodeId v = 0; v < n; ++v) {
    if (v == inst.v_t) {
      trips.emplace_back(v, v, 1.0);
      continue;
    }
    const double scale = c > 0.0 ? 1.0 - c : 1.0;
    for (const auto& [to, q] : rows.prob[v]) trips.emplace_back(v, to, scale * q);
    if (c > 0.0) {
      const double share = c / zap_targets(inst, opts);
      for (NodeId u = 0; u < n; ++u) {
        if (opts.zap_excludes_target && u == inst.v_t) continue;
        trips.emplace_back(v, u, share);
      }
    }
  }
  TransitionMatrix out;
  out.q.resize(n, n);
  out.q.setFromTriplets(trips.begin(), trips.end());
  out.q.makeCompressed();
  return out;
}

HittingTimes hitting_times(const GproInstance& inst, const Policy& policy,
                           const EvalOptions& opts) {
  const Rows rows = active_rows(inst, policy);
  const int n = inst.num_nodes();
  const double c = zap_rate(inst);
  const bool zapped = c > 0.0;
  const double scale = zapped ? 1.0 - c : 1.0;

  // reduced system over the non-target nodes
  std::vector<int> idx(n, -1);
  int k = 0;
  for (NodeId v = 0; v < n; ++v)
    if (v != inst.v_t) idx[v] = k++;

  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd rhs(k);
  for (NodeId v = 0; v < n; ++v) {
    if (v == inst.v_t) continue;
    const int i = idx[v];
    trips.emplace_back(i, i, 1.0);
    for (const auto& [to, q] : rows.prob[v])
      if (to != inst.v_t) trips.emplace_back(i, idx[to], -scale * q);
    rhs[i] = scale * rows.cost[v] + (zapped ? c * tol::kZapStepCost : 0.0);
  }

  detail::LuSolver solver(k, trips);
  if (!solver.ok())
    throw ImproperPolicyError("hitting-time system is singular: the walk cannot reach v_t");

  Eigen::VectorXd phi = solver.solve(rhs);
  double residual;
  if (zapped) {
    // The uniform restart adds the rank-1 term (c/nz) * ones * ones^T; fold
    // it in via two solves against the same factorization.
    const double share = c / zap_targets(inst, opts);
    const Eigen::VectorXd z = solver.solve(Eigen::VectorXd::Ones(k));
    const double denom = 1.0 - share * z.sum();
    if (!std::isfinite(denom) || denom <= 0.0)
      throw ImproperPolicyError("hitting-time system is singular under zapping");
    const double sigma = phi.sum() / denom;
    phi += share * sigma * z;
    residual = phi.allFinite()
                   ? (solver.multiply(phi) - share * phi.sum() * Eigen::VectorXd::Ones(k) - rhs)
                         .cwiseAbs()
                         .maxCoeff()
                   : std::numeric_limits<double>::infinity();
  } else {
    residual = solver.residual(phi, rhs);
  }

  if (!phi.allFinite() || residual > tol::kHitResidual)
    throw ImproperPolicyError("hitting-time solve failed, residual " + std::to_string(residual));

  HittingTimes out;
  out.residual = residual;
  out.phi.assign(n, 0.0);
  for (NodeId v = 0; v < n; ++v)
    if (v != inst.v_t) out.phi[v] = phi[idx[v]];
  return out;
}

std::vector<double> pagerank(const GproInstance& inst, const Policy& policy,
                             const EvalOptions& opts) {
  const Rows rows = active_rows(inst, policy);
  const int n = inst.num_nodes();
  const double c = zap_rate(inst);
  const bool zapped = c > 0.0;
  const int k = n - 1;

  // Merge v_t back into v_s: the walk restarts instead of stopping, which
  // turns the absorbing chain into the recurrent chain whose stationary mass
  // at v_s is the rank of the split node.
  std::vector<int> idx(n, -1);
  int next = 0;
  for (NodeId v = 0; v < n; ++v)
    if (v != inst.v_t) idx[v] = next++;

  std::vector<Eigen::Triplet<double>> bt;  // transposed merged rows
  std::vector<std::vector<std::pair<int, double>>> fwd(k);
  for (NodeId v = 0; v < n; ++v) {
    if (v == inst.v_t) continue;
    for (const auto& [to, q] : rows.prob[v]) {
      const NodeId to_merged = to == inst.v_t ? inst.v_s : to;
      bt.emplace_back(idx[to_merged], idx[v], q);
      fwd[idx[v]].push_back({idx[to_merged], q});
    }
  }

  Eigen::VectorXd pi(k);
  if (zapped) {
    // restart distribution in the merged chain; a restart that would land on
    // v_t ends up back at v_s
    Eigen::VectorXd zeta = Eigen::VectorXd::Zero(k);
    const int nz = zap_targets(inst, opts);
    for (NodeId u = 0; u < n; ++u) {
      if (u == inst.v_t) continue;
      zeta[idx[u]] += c / nz;
    }
    if (!opts.zap_excludes_target) zeta[idx[inst.v_s]] += c / nz;

    std::vector<Eigen::Triplet<double>> trips;
    for (int i = 0; i < k; ++i) trips.emplace_back(i, i, 1.0);
    for (const auto& t : bt) trips.emplace_back(t.row(), t.col(), -(1.0 - c) * t.value());
    detail::LuSolver solver(k, trips);
    if (!solver.ok()) throw IrreducibilityError("stationary system is singular");
    pi = solver.solve(zeta);
  } else {
    // irreducibility of the active merged chain, forward and backward
    auto reach = [&](bool forward) {
      std::vector<uint8_t> seen(k, 0);
      std::vector<int> stack{0};
      seen[0] = 1;
      int found = 1;
      std::vector<std::vector<int>> adj(k);
      for (const auto& t : bt) {
        // t stores (to, from); forward edges run from t.col() to t.row()
        if (forward)
          adj[t.col()].push_back(t.row());
        else
          adj[t.row()].push_back(t.col());
      }
      while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int u : adj[v]) {
          if (!seen[u]) {
            seen[u] = 1;
            ++found;
            stack.push_back(u);
          }
        }
      }
      return found == k;
    };
    if (!reach(true) || !reach(false))
      throw IrreducibilityError("active chain is not irreducible; ranking is undefined");

    // replace the first balance equation by the normalization constraint
    std::vector<Eigen::Triplet<double>> trips;
    for (int j = 0; j < k; ++j) trips.emplace_back(0, j, 1.0);
    for (int i = 1; i < k; ++i) trips.emplace_back(i, i, -1.0);
    for (const auto& t : bt)
      if (t.row() != 0) trips.emplace_back(t.row(), t.col(), t.value());
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
    rhs[0] = 1.0;
    detail::LuSolver solver(k, trips);
    if (!solver.ok()) throw IrreducibilityError("stationary system is singular");
    pi = solver.solve(rhs);
  }

  if (!pi.allFinite()) throw IrreducibilityError("stationary solve produced non-finite values");
  const double total = pi.sum();
  if (!(total > 0.0)) throw IrreducibilityError("stationary solve produced a degenerate vector");
  pi /= total;

  // verify pi Q = pi on the merged chain
  Eigen::VectorXd piq = Eigen::VectorXd::Zero(k);
  for (int i = 0; i < k; ++i)
    for (const auto& [to, q] : fwd[i]) piq[to] += (zapped ? (1.0 - c) : 1.0) * q * pi[i];
  if (zapped) {
    const int nz = zap_targets(inst, opts);
    for (NodeId u = 0; u < n; ++u) {
      if (u == inst.v_t) continue;
      piq[idx[u]] += c / nz;
    }
    if (!opts.zap_excludes_target) piq[idx[inst.v_s]] += c / nz;
  }
  const double residual = (piq - pi).cwiseAbs().maxCoeff();
  if (residual > tol::kStationaryResidual)
    throw IrreducibilityError("stationary residual " + std::to_string(residual) +
                              " exceeds tolerance");

  std::vector<double> out(n, 0.0);
  for (NodeId v = 0; v < n; ++v)
    if (v != inst.v_t) out[v] = pi[idx[v]];
  return out;
}

Decomposition decompose(const GproInstance& inst, const Policy& policy, NodeId u, NodeId w,
                        const EvalOptions& opts) {
  const int n = inst.num_nodes();
  if (u < 0 || u >= n || w < 0 || w >= n || u == w || u == inst.v_t || w == inst.v_t)
    throw std::invalid_argument("decompose: need distinct non-target nodes u and w");

  if (static_cast<int>(policy.active.size()) != inst.num_free())
    throw std::invalid_argument("policy size does not match the instance's free edges");
  const double c = zap_rate(inst);
  const bool zapped = c > 0.0;
  const double scale = zapped ? 1.0 - c : 1.0;
  const double share = zapped ? c / zap_targets(inst, opts) : 0.0;

  // dense mixed transition and cost-mass matrices; decompose is a
  // small-instance diagnostic, so O(n^2) storage is fine
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (NodeId v = 0; v < n; ++v) {
    if (v == inst.v_t) {
      q(v, v) = 1.0;
      continue;
    }
    double wsum = 0.0;
    for (EdgeId e : inst.out_edges(v))
      if (edge_active(inst, policy, e)) wsum += inst.edges[e].weight;
    if (!(wsum > 0.0))
      throw ImproperPolicyError("node " + std::to_string(v) + " (" + inst.names[v] +
                                ") has no active outgoing edge");
    for (EdgeId e : inst.out_edges(v)) {
      if (!edge_active(inst, policy, e)) continue;
      const double pq = inst.edges[e].weight / wsum;
      q(v, inst.edges[e].to) += scale * pq;
      m(v, inst.edges[e].to) += scale * pq * inst.edges[e].cost;
    }
    if (zapped) {
      for (NodeId t = 0; t < n; ++t) {
        if (opts.zap_excludes_target && t == inst.v_t) continue;
        q(v, t) += share;
        m(v, t) += share * tol::kZapStepCost;
      }
    }
  }

  // transient block with both w and v_t removed
  std::vector<int> idx(n, -1);
  int k = 0;
  for (NodeId v = 0; v < n; ++v)
    if (v != w && v != inst.v_t) idx[v] = k++;

  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(k, k);
  Eigen::VectorXd b_target(k), rhs_y(k), rhs_x(k);
  for (NodeId v = 0; v < n; ++v) {
    if (idx[v] < 0) continue;
    for (NodeId t = 0; t < n; ++t)
      if (idx[t] >= 0) a(idx[v], idx[t]) -= q(v, t);
    b_target[idx[v]] = q(v, inst.v_t);
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const Eigen::VectorXd p = lu.solve(b_target);
  if (!p.allFinite() || (a * p - b_target).cwiseAbs().maxCoeff() > tol::kHitResidual)
    throw DegenerateDecompositionError("taboo system is singular");

  for (NodeId v = 0; v < n; ++v) {
    if (idx[v] < 0) continue;
    double sy = m(v, inst.v_t);
    double sx = m(v, w);
    for (NodeId t = 0; t < n; ++t) {
      if (idx[t] < 0) continue;
      sy += m(v, t) * p[idx[t]];
      sx += m(v, t) * (1.0 - p[idx[t]]);
    }
    rhs_y[idx[v]] = sy;
    rhs_x[idx[v]] = sx;
  }
  const Eigen::VectorXd y = lu.solve(rhs_y);
  const Eigen::VectorXd x = lu.solve(rhs_x);
  if (!y.allFinite() || !x.allFinite())
    throw DegenerateDecompositionError("taboo system is singular");

  const double pu = p[idx[u]];
  constexpr double kDegenerate = 1e-12;
  const HittingTimes ht = hitting_times(inst, policy, opts);

  Decomposition d;
  d.p_uv = pu;
  // a branch with (almost) no mass has no conditional mean; report 0, the
  // reconstruction identity weights it out
  d.phi_uv = pu < kDegenerate ? 0.0 : y[idx[u]] / pu;
  d.phi_uw = 1.0 - pu < kDegenerate ? 0.0 : x[idx[u]] / (1.0 - pu);
  d.phi_w = ht.phi[w];
  d.reconstruction_error =
      std::fabs(ht.phi[u] - (d.p_uv * d.phi_uv + (1.0 - d.p_uv) * (d.phi_uw + d.phi_w)));
  return d;
}

}  // namespace pro
