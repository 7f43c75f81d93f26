#pragma once

#include <cstdint>
#include <vector>

#include "pro/hitting_time.hpp"

namespace pro {

enum class Sense {
  MaximizePagerank,  // minimize the return time phi[v_s]
  MinimizePagerank,
};

struct PriIterate {
  Policy policy;
  std::vector<double> phi;
  std::vector<EdgeId> switched;  // edges whose state changed going INTO this iterate
};

enum class Termination { Converged, GuardTripped };

struct PriTrace {
  std::vector<PriIterate> iterates;
  Termination termination = Termination::Converged;
  // evaluation passes performed, the final confirming one included
  int iteration_count = 0;
  // passes that changed the policy; a converged run satisfies
  // iteration_count == switch_count + 1. The f-iteration bound and the
  // barrier/counterexample classification are about this count.
  int switch_count = 0;
  double objective = 0.0;  // final phi[v_s]
};

// One greedy sweep: every unconstrained free edge (i, j) turns on when the
// tail's edge-mix value is above phi[j] + cost and off when below; pairs and
// all-free groups activate the cheapest continuation. Without zapping the
// edge-mix value IS phi[i]; with zapping the restart share of phi[i] is
// peeled off first, so the comparison still ranks the edge against the other
// outgoing edges only. Ties inside the value band: unconstrained edges and
// pairs keep their current state, all-free groups take the lowest edge id.
// Minimization flips every comparison.
Policy greedy_improve(const GproInstance& inst, const Policy& current,
                      const std::vector<double>& phi, Sense sense, const EvalOptions& opts = {});

// 2^f + 1, saturating; an upper bound on evaluation passes since no policy
// can repeat without a cycle.
uint64_t default_guard(int f);

// Policy iteration on the activation policy: evaluate hitting times, switch
// every improving free edge simultaneously, repeat until the policy is
// stable. The trace records one iterate per evaluation. phi[v_s] is checked
// to be monotone across iterations (within tolerance); a violation throws,
// since it indicates a numerical fault, not a modeling condition.
PriTrace solve(const GproInstance& inst, const Policy& initial,
               Sense sense = Sense::MaximizePagerank, uint64_t guard = 0,
               const EvalOptions& opts = {});

struct IterationStats {
  int max_iters = 0;
  double mean_iters = 0.0;
  std::vector<int> counts;  // switch passes per start, in input order
  int over_f = 0;           // starts that needed more switch passes than free edges
};

// Runs solve() from each start and collects switch-pass counts.
IterationStats iteration_count(const GproInstance& inst, const std::vector<Policy>& starts,
                               Sense sense = Sense::MaximizePagerank,
                               const EvalOptions& opts = {});

}  // namespace pro
