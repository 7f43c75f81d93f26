#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "pro/generators.hpp"
#include "pro/hitting_time.hpp"
#include "pro/oracle.hpp"
#include "pro/pri.hpp"
#include "pro/reductions.hpp"
#include "pro/rng.hpp"

using namespace pro;

namespace {

SspPolicy optimal_ssp(const SspInstance& inst, std::vector<double>* values = nullptr) {
  const PiResult r = policy_iteration(inst, SspPolicy{std::vector<int>(inst.num_states(), 0)});
  if (values) *values = r.values;
  return r.policy;
}

}  // namespace

TEST_CASE("multi-action chains preserve values and policy round trips") {
  Rng rng(500);
  for (int i = 0; i < 12; ++i) {
    RandomSspOptions opt;
    const SspInstance inst = random_ssp(5, 5, rng.bits(), opt);
    REQUIRE(validate(inst).empty());
    const auto [split, map] = split_multiaction(inst);
    REQUIRE(validate(split).empty());
    for (int s = 0; s < split.num_states(); ++s) CHECK(split.num_actions(s) <= 2);

    std::vector<double> jopt;
    const SspPolicy pol = optimal_ssp(inst, &jopt);
    std::vector<double> jsplit;
    (void)optimal_ssp(split, &jsplit);
    for (int s = 0; s < inst.num_states(); ++s)
      CHECK(std::abs(jsplit[map.state_map[s].front()] - jopt[s]) < 1e-9);

    // Fixed-policy evaluation commutes with the forward translation.
    const std::vector<double> jp = evaluate(inst, pol);
    const std::vector<double> jf = evaluate(split, map.forward(pol));
    for (int s = 0; s < inst.num_states(); ++s)
      CHECK(std::abs(jf[map.state_map[s].front()] - jp[s]) < 1e-9);
    CHECK(map.backward(map.forward(pol)) == pol);
  }
}

TEST_CASE("probabilistic choices split into deterministic choosers") {
  Rng rng(501);
  for (int i = 0; i < 12; ++i) {
    const SspInstance base = random_ssp(5, 5, rng.bits(), {});
    const auto [two, cmap] = split_multiaction(base);
    const auto [det, pmap] = split_probabilistic(two);
    REQUIRE(validate(det).empty());
    for (int s = 0; s < det.num_states(); ++s) {
      if (det.num_actions(s) == 2)
        for (const SspAction& a : det.actions[s]) CHECK(a.out.size() == 1);
    }

    std::vector<double> jtwo;
    const SspPolicy pol = optimal_ssp(two, &jtwo);
    std::vector<double> jdet;
    (void)optimal_ssp(det, &jdet);
    for (int s = 0; s < two.num_states(); ++s)
      CHECK(std::abs(jdet[pmap.state_map[s].front()] - jtwo[s]) < 1e-9);

    const std::vector<double> jp = evaluate(two, pol);
    const std::vector<double> jf = evaluate(det, pmap.forward(pol));
    for (int s = 0; s < two.num_states(); ++s)
      CHECK(std::abs(jf[pmap.state_map[s].front()] - jp[s]) < 1e-9);
    CHECK(pmap.backward(pmap.forward(pol)) == pol);
  }
}

TEST_CASE("control problems convert to instances with matching optima") {
  Rng rng(502);
  for (int i = 0; i < 10; ++i) {
    const SspInstance inst = random_ssp(5, 4, rng.bits(), {});
    const SspToGproResult red = ssp_to_gpro(inst);
    REQUIRE(validate(red.instance).empty());

    std::vector<double> jopt;
    const SspPolicy pol = optimal_ssp(inst, &jopt);

    // Optimal hitting times at the value nodes equal the optimal state values.
    const PriTrace t = solve(red.instance, all_active_policy(red.instance),
                             Sense::MaximizePagerank);
    REQUIRE(t.termination == Termination::Converged);
    const std::vector<double>& phi = t.iterates.back().phi;
    for (int s = 0; s < inst.num_states(); ++s)
      CHECK(std::abs(phi[red.value_node[s]] - jopt[s]) < 1e-9);

    // A fixed policy translated forward evaluates to the same values too.
    const HittingTimes fixed = hitting_times(red.instance, red.forward(pol));
    const std::vector<double> jp = evaluate(inst, pol);
    for (int s = 0; s < inst.num_states(); ++s)
      CHECK(std::abs(fixed.phi[red.value_node[s]] - jp[s]) < 1e-9);

    CHECK(red.backward(red.forward(pol)) == pol);

    // Size bound: the instance stays linear in the control problem size.
    long transitions = 0;
    for (const auto& per_state : inst.actions)
      for (const SspAction& a : per_state) transitions += static_cast<long>(a.out.size());
    CHECK(red.instance.num_nodes() <= 2 + 3 * inst.num_states() + transitions);
    CHECK(red.instance.num_edges() <= 2 + 4 * (inst.num_states() + transitions));
  }
}

TEST_CASE("edge activation encodes as on/off retry states") {
  Rng rng(503);
  for (int i = 0; i < 12; ++i) {
    RandomGproOptions opt;
    if (i % 3 == 0) {
      opt.pairs = 1;
      opt.p = 0.3;
    }
    const GproInstance inst = random_gpro(6, 4, rng.bits(), opt);
    const auto [ssp, map] = gpro_to_ssp(inst);
    REQUIRE(validate(ssp).empty());

    // One auxiliary state per unconstrained slot, nothing else added.
    int unconstrained = 0;
    for (int s = 0; s < inst.num_free(); ++s)
      if (inst.free_class(s) == FreeClass::Unconstrained) ++unconstrained;
    CHECK(ssp.num_states() == inst.num_nodes() + unconstrained);

    Rng draw(rng.bits());
    for (int k = 0; k < 6; ++k) {
      const Policy pol = random_feasible_policy(inst, draw);
      const HittingTimes ht = hitting_times(inst, pol);
      const std::vector<double> j = evaluate(ssp, map.forward(pol));
      for (int v = 0; v < inst.num_nodes(); ++v)
        CHECK(std::abs(j[v] - ht.phi[v]) < 1e-9);
      CHECK(policy_mask(map.backward(map.forward(pol))) == policy_mask(pol));
    }

    // Optima agree as well.
    const OracleResult oracle = brute_force_optimum(inst, Sense::MaximizePagerank);
    std::vector<double> jopt;
    (void)optimal_ssp(ssp, &jopt);
    CHECK(std::abs(jopt[inst.v_s] - oracle.value) < 1e-9);
  }
}

TEST_CASE("zapped instances are refused by the retry encoding") {
  RandomGproOptions opt;
  opt.zapping = 0.2;
  const GproInstance inst = random_gpro(6, 3, 504, opt);
  CHECK_THROWS_AS((void)gpro_to_ssp(inst), std::invalid_argument);
}

TEST_CASE("the direct conversion enumerates local activation subsets") {
  Rng rng(505);
  for (int i = 0; i < 10; ++i) {
    RandomGproOptions opt;
    if (i % 2 == 0) opt.zapping = 0.15;
    const GproInstance inst = random_gpro(6, 4, rng.bits(), opt);
    const auto [ssp, map] = gpro_to_ssp_direct(inst);
    REQUIRE(validate(ssp).empty());
    CHECK(ssp.num_states() == inst.num_nodes());

    Rng draw(rng.bits());
    for (int k = 0; k < 4; ++k) {
      const Policy pol = random_feasible_policy(inst, draw);
      const HittingTimes ht = hitting_times(inst, pol);
      const std::vector<double> j = evaluate(ssp, map.forward(pol));
      for (int v = 0; v < inst.num_nodes(); ++v)
        CHECK(std::abs(j[v] - ht.phi[v]) < 1e-9);
      CHECK(policy_mask(map.backward(map.forward(pol))) == policy_mask(pol));
    }

    const OracleResult oracle = brute_force_optimum(inst, Sense::MaximizePagerank);
    std::vector<double> jopt;
    (void)optimal_ssp(ssp, &jopt);
    CHECK(std::abs(jopt[inst.v_s] - oracle.value) < 1e-9);
  }
}

TEST_CASE("round trips through both directions preserve the optimum") {
  Rng rng(506);
  for (int i = 0; i < 6; ++i) {
    const SspInstance inst = random_ssp(4, 3, rng.bits(), {});
    std::vector<double> jopt;
    (void)optimal_ssp(inst, &jopt);

    const SspToGproResult red = ssp_to_gpro(inst);
    const auto [back, map] = gpro_to_ssp(red.instance);
    std::vector<double> jback;
    (void)optimal_ssp(back, &jback);
    for (int s = 0; s < inst.num_states(); ++s)
      CHECK(std::abs(jback[red.value_node[s]] - jopt[s]) < 1e-9);
  }
}
