#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "pro/generators.hpp"
#include "pro/hitting_time.hpp"
#include "pro/oracle.hpp"
#include "pro/rng.hpp"

using namespace pro;

namespace {

GproInstance make(int n, int vs, int vt,
                  const std::vector<std::tuple<int, int, double, bool>>& edges,
                  const std::vector<std::pair<int, int>>& pairs = {}) {
  GproInstance inst;
  for (int i = 0; i < n; ++i) inst.names.push_back("n" + std::to_string(i));
  inst.v_s = vs;
  inst.v_t = vt;
  for (const auto& [f, t, c, free] : edges) inst.edges.push_back({f, t, 1.0, c, free});
  for (const auto& [a, b] : pairs) inst.exclusivity.push_back({a, b});
  inst.finalize();
  REQUIRE(validate(inst).empty());
  return inst;
}

}  // namespace

TEST_CASE("enumeration counts match the constraint structure") {
  // No free edges: the single fixed policy.
  const GproInstance fixed = make(2, 0, 1, {{0, 1, 1.0, false}, {1, 1, 0.0, false}});
  long count = enumerate_policies(fixed, [](const Policy&) {});
  CHECK(count == 1);

  // Four unconstrained free edges out of distinct nodes: all 16 subsets are
  // feasible (sources keep a fixed fallback).
  const GproInstance open = make(6, 0, 5,
                                 {{0, 1, 1.0, false},
                                  {1, 2, 1.0, false},
                                  {2, 3, 1.0, false},
                                  {3, 4, 1.0, false},
                                  {4, 5, 1.0, false},
                                  {5, 5, 0.0, false},
                                  {0, 5, 1.0, true},
                                  {1, 5, 1.0, true},
                                  {2, 5, 1.0, true},
                                  {3, 5, 1.0, true}});
  count = enumerate_policies(open, [](const Policy&) {});
  CHECK(count == 16);
  CHECK(feasible_policy_count(open) == doctest::Approx(16.0));

  // One declared pair (2 choices) plus two unconstrained edges (4 subsets).
  const GproInstance paired = make(5, 0, 4,
                                   {{0, 1, 1.0, false},
                                    {1, 2, 1.0, true},
                                    {1, 3, 1.0, true},
                                    {2, 4, 1.0, false},
                                    {3, 4, 1.0, false},
                                    {4, 4, 0.0, false},
                                    {0, 4, 2.0, true},
                                    {2, 3, 1.0, true}},
                                   {{1, 2}});
  count = enumerate_policies(paired, [](const Policy&) {});
  CHECK(count == 8);
  CHECK(feasible_policy_count(paired) == doctest::Approx(8.0));
}

TEST_CASE("all-free nodes enumerate one active edge per group") {
  // Node 1 has three free out-edges and no fixed ones, so exactly one of the
  // three may be active; node 0 keeps one unconstrained free edge besides its
  // fixed exit.
  const GproInstance inst = make(5, 0, 4,
                                 {{0, 1, 1.0, false},
                                  {0, 4, 3.0, true},
                                  {1, 2, 1.0, true},
                                  {1, 3, 1.0, true},
                                  {1, 4, 1.0, true},
                                  {2, 4, 1.0, false},
                                  {3, 4, 1.0, false},
                                  {4, 4, 0.0, false}});
  long count = enumerate_policies(inst, [](const Policy&) {});
  CHECK(count == 6);
  CHECK(feasible_policy_count(inst) == doctest::Approx(6.0));
}

TEST_CASE("enumeration order is lexicographic over the activation bits") {
  const GproInstance open = make(4, 0, 3,
                                 {{0, 1, 1.0, false},
                                  {1, 2, 1.0, false},
                                  {2, 3, 1.0, false},
                                  {3, 3, 0.0, false},
                                  {0, 2, 1.0, true},
                                  {1, 3, 2.0, true}});
  // Slot 0 is the leading character of the bitstring, so it flips last.
  std::vector<std::vector<uint8_t>> seen;
  enumerate_policies(open, [&](const Policy& p) { seen.push_back(p.active); });
  const std::vector<std::vector<uint8_t>> want = {
      {0, 0}, {0, 1}, {1, 0}, {1, 1}};
  CHECK(seen == want);
}

TEST_CASE("the enumeration cap is enforced") {
  Rng rng(77);
  const GproInstance inst = random_gpro(10, 6, 909, {});
  OracleOptions opts;
  opts.max_free = 5;
  CHECK_THROWS_AS(
      (void)enumerate_policies(inst, [](const Policy&) {}, opts),
      std::length_error);
}

TEST_CASE("brute force matches a manual scan of all policies") {
  Rng rng(910);
  for (int i = 0; i < 15; ++i) {
    const GproInstance inst = random_gpro(5 + static_cast<int>(rng.below(3)), 4, rng.bits(), {});
    const OracleResult r = brute_force_optimum(inst, Sense::MaximizePagerank);

    double best = std::numeric_limits<double>::infinity();
    long feasible = 0;
    enumerate_policies(inst, [&](const Policy& p) {
      ++feasible;
      try {
        best = std::min(best, hitting_times(inst, p).phi[inst.v_s]);
      } catch (const ImproperPolicyError&) {
      }
    });
    CHECK(r.evaluated <= feasible);
    CHECK(r.value == doctest::Approx(best).epsilon(1e-12));
    REQUIRE_FALSE(r.best.empty());
    for (const Policy& p : r.best)
      CHECK(hitting_times(inst, p).phi[inst.v_s] ==
            doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("a symmetric instance reports the whole tie set") {
  // Two interchangeable detours with identical weights and costs.
  const GproInstance inst = make(4, 0, 3,
                                 {{0, 3, 2.0, false},
                                  {0, 1, 1.0, true},
                                  {0, 2, 1.0, true},
                                  {1, 3, 1.0, false},
                                  {2, 3, 1.0, false},
                                  {3, 3, 0.0, false}});
  const OracleResult r = brute_force_optimum(inst, Sense::MaximizePagerank);
  // The detours cost exactly as much as the direct exit, so every subset of
  // them ties at the optimum.
  CHECK(r.best.size() == 4);
  CHECK(r.value == doctest::Approx(2.0));
}

TEST_CASE("senses pick opposite ends of the value range") {
  Rng rng(911);
  for (int i = 0; i < 10; ++i) {
    const GproInstance inst = random_gpro(6, 4, rng.bits(), {});
    const OracleResult lo = brute_force_optimum(inst, Sense::MaximizePagerank);
    const OracleResult hi = brute_force_optimum(inst, Sense::MinimizePagerank);
    CHECK(lo.value <= hi.value + 1e-12);
  }
}
