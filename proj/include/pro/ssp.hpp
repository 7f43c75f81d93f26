#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pro/gpro.hpp"
#include "pro/tolerances.hpp"

namespace pro {

struct SspTransition {
  int to = -1;
  double p = 0.0;
  double c = 0.0;
  bool operator==(const SspTransition&) const = default;
};

struct SspAction {
  std::vector<SspTransition> out;
  bool operator==(const SspAction&) const = default;
};

// Shortest-path control problem: pick one action per state, pay the expected
// transition costs, reach the absorbing cost-free target. States without an
// explicit action list are not allowed; the target has a single zero-cost
// self-loop action.
struct SspInstance {
  std::vector<std::string> names;
  int target = -1;
  std::vector<std::vector<SspAction>> actions;  // actions[state][k]

  int num_states() const { return static_cast<int>(names.size()); }
  int num_actions(int s) const { return static_cast<int>(actions[s].size()); }
  int total_actions() const;
};

struct SspPolicy {
  std::vector<int> choice;  // action index per state
  bool operator==(const SspPolicy&) const = default;
};

std::vector<Violation> validate(const SspInstance& inst);

// Expected cost-to-target per state under a fixed policy, by linear solve.
// Throws ImproperPolicyError if the policy cannot reach the target from
// every state.
std::vector<double> evaluate(const SspInstance& inst, const SspPolicy& policy);

struct PiResult {
  SspPolicy policy;
  std::vector<double> values;
  int iterations = 0;  // evaluation passes, the final confirming one included
};

// Policy iteration with greedy simultaneous improvement; within the value
// tie band the incumbent action is kept, so the policy sequence cannot
// oscillate between equally good choices.
PiResult policy_iteration(const SspInstance& inst, const SspPolicy& initial,
                          uint64_t guard = 1u << 20);

struct ViResult {
  std::vector<double> values;
  SspPolicy greedy;
  long iterations = 0;
  bool converged = false;
  double final_displacement = 0.0;  // sup-norm change of the last sweep
};

// Value iteration from the zero vector, stopping once the sup-norm
// displacement of a sweep drops to epsilon, or reporting non-convergence at
// the iteration cap.
ViResult value_iteration(const SspInstance& inst, double epsilon = tol::kViEpsilon,
                         long cap = 1000000);

struct SspStats {
  double eta = 1.0;      // smallest nonzero transition probability
  double delta_bits = 0; // stored numbers times 64, a crude binary-size proxy
  int diameter = 0;      // longest shortest path in the anything-possible graph
};

SspStats ssp_stats(const SspInstance& inst);

}  // namespace pro
