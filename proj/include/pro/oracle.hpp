#pragma once

#include <functional>
#include <vector>

#include "pro/pri.hpp"

namespace pro {

struct OracleOptions {
  // Refuse to enumerate more than 2^max_free raw bitstrings.
  int max_free = 20;
};

// Visits every feasible policy exactly once, ordered lexicographically by
// the activation bitstring over free slots (slot 0 most significant).
// Returns the number of feasible policies visited. Throws std::length_error
// above the enumeration cap.
long enumerate_policies(const GproInstance& inst,
                        const std::function<void(const Policy&)>& visit,
                        const OracleOptions& opts = {});

struct OracleResult {
  std::vector<Policy> best;  // every policy within the tie band of the optimum
  double value = 0.0;        // optimal phi[v_s]
  long evaluated = 0;        // feasible policies evaluated
};

// Ground truth by exhaustive enumeration: evaluates the hitting time of
// every feasible policy and keeps the argmin (or argmax) set under the
// scaled value tolerance. Policies that strand the walk are skipped; if
// every policy does, ImproperPolicyError propagates.
OracleResult brute_force_optimum(const GproInstance& inst,
                                 Sense sense = Sense::MaximizePagerank,
                                 const OracleOptions& opts = {}, const EvalOptions& eval = {});

}  // namespace pro
