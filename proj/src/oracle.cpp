#include "pro/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "pro/tolerances.hpp"

namespace pro {

long enumerate_policies(const GproInstance& inst,
                        const std::function<void(const Policy&)>& visit,
                        const OracleOptions& opts) {
  const int f = inst.num_free();
  if (f > opts.max_free)
    throw std::length_error("enumeration over " + std::to_string(f) +
                            " free edges exceeds the cap of " + std::to_string(opts.max_free) +
                            " (about " + std::to_string(feasible_policy_count(inst)) +
                            " feasible policies)");
  long count = 0;
  Policy p;
  p.active.assign(f, 0);
  const uint64_t total = uint64_t{1} << f;
  for (uint64_t mask = 0; mask < total; ++mask) {
    // slot 0 is the most significant position so that increasing masks are
    // lexicographically increasing bitstrings
    for (int s = 0; s < f; ++s)
      p.active[s] = (mask >> (f - 1 - s)) & 1 ? 1 : 0;
    if (!feasible(inst, p)) continue;
    ++count;
    visit(p);
  }
  return count;
}

OracleResult brute_force_optimum(const GproInstance& inst, Sense sense,
                                 const OracleOptions& opts, const EvalOptions& eval) {
  OracleResult res;
  bool have = false;
  std::vector<std::pair<Policy, double>> cands;
  enumerate_policies(
      inst,
      [&](const Policy& p) {
        double value;
        try {
          value = hitting_times(inst, p, eval).phi[inst.v_s];
        } catch (const ImproperPolicyError&) {
          return;  // cannot happen on validated instances
        }
        ++res.evaluated;
        const bool better = sense == Sense::MaximizePagerank ? value < res.value
                                                             : value > res.value;
        if (!have || better) {
          res.value = value;
          have = true;
        }
        // keep only candidates that can still tie the optimum; the optimum
        // only improves, so pruning against the running best is safe
        if (tol::near(value, res.value)) cands.push_back({p, value});
        if (cands.size() >= 4096) {
          std::erase_if(cands, [&](const auto& c) { return !tol::near(c.second, res.value); });
        }
      },
      opts);
  if (!have) throw ImproperPolicyError("no feasible policy reaches v_t");

  for (const auto& [p, value] : cands)
    if (tol::near(value, res.value)) res.best.push_back(p);
  return res;
}

}  // namespace pro
