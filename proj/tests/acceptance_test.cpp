// Acceptance gate: each criterion prints exactly one line,
//   criterion N PASS <summary>   or   criterion N FAIL <summary>
// and the process exits with the number of failed criteria. Run a single
// criterion with --criterion N. All tolerances and seeds are pinned here.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "pro/bench.hpp"
#include "pro/generators.hpp"
#include "pro/hitting_time.hpp"
#include "pro/json_io.hpp"
#include "pro/oracle.hpp"
#include "pro/pri.hpp"
#include "pro/reductions.hpp"
#include "pro/rng.hpp"
#include "pro/ssp.hpp"

using namespace pro;
namespace fs = std::filesystem;

namespace {

constexpr double kOptimumTol = 1e-9;      // solver vs oracle, scaled by value size
constexpr double kPreserveTol = 1e-9;     // reduction value preservation
constexpr double kReconstructTol = 1e-8;  // walk-split reconstruction
constexpr double kRenewalTol = 1e-9;      // stationary mass vs return time
constexpr double kRowSumTol = 1e-12;
constexpr double kPiViGapTol = 1e-6;      // PI vs VI value agreement
constexpr double kBarrierRateCap = 1e-3;  // "rare" cap for full-budget runs

struct Outcome {
  bool pass = false;
  std::string detail;
};

double scaled_diff(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::abs(b));
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2e", v);
  return buf;
}

GproInstance make(int n, int vs, int vt,
                  const std::vector<std::tuple<int, int, double, double, bool>>& edges,
                  const std::vector<std::pair<int, int>>& pairs = {},
                  std::optional<double> zapping = std::nullopt) {
  GproInstance inst;
  for (int i = 0; i < n; ++i) inst.names.push_back("n" + std::to_string(i));
  inst.v_s = vs;
  inst.v_t = vt;
  for (const auto& [f, t, w, c, free] : edges) inst.edges.push_back({f, t, w, c, free});
  for (const auto& [a, b] : pairs) inst.exclusivity.push_back({a, b});
  inst.zapping = zapping;
  inst.finalize();
  return inst;
}

std::vector<GproInstance> hand_fixtures() {
  std::vector<GproInstance> out;
  // Detour worth dropping.
  out.push_back(make(3, 0, 2,
                     {{0, 2, 1.0, 1.0, false},
                      {0, 1, 1.0, 0.25, true},
                      {1, 2, 1.0, 1.0, false},
                      {2, 2, 1.0, 0.0, false}}));
  // Weighted branches.
  out.push_back(make(4, 0, 3,
                     {{0, 3, 2.0, 3.0, false},
                      {0, 1, 1.0, 0.5, true},
                      {0, 2, 0.5, 0.5, true},
                      {1, 3, 1.0, 1.0, false},
                      {2, 3, 1.0, 2.0, false},
                      {3, 3, 1.0, 0.0, false}}));
  // Exclusivity pair choosing between two exits.
  out.push_back(make(4, 0, 3,
                     {{0, 1, 1.0, 1.0, false},
                      {1, 2, 1.0, 0.5, true},
                      {1, 3, 1.0, 2.0, true},
                      {2, 3, 1.0, 1.0, false},
                      {3, 3, 1.0, 0.0, false}},
                     {{1, 2}}));
  // All-free node: exactly one of three exits stays active.
  out.push_back(make(5, 0, 4,
                     {{0, 1, 1.0, 1.0, false},
                      {1, 2, 1.0, 1.0, true},
                      {1, 3, 1.0, 2.0, true},
                      {1, 4, 1.0, 4.0, true},
                      {2, 4, 1.0, 1.0, false},
                      {3, 4, 1.0, 1.0, false},
                      {4, 4, 1.0, 0.0, false}}));
  // Restarts on, detour priced at the restart margin.
  out.push_back(make(4, 0, 3,
                     {{0, 3, 1.0, 2.0, false},
                      {0, 1, 1.0, 1.0, true},
                      {1, 3, 1.0, 1.0, false},
                      {1, 2, 1.0, 1.0, true},
                      {2, 3, 1.0, 0.5, false},
                      {3, 3, 1.0, 0.0, false}},
                     {}, 0.2));
  return out;
}

// --------------------------------------------------------------------------
// 1. Solver agrees with exhaustive enumeration.
// --------------------------------------------------------------------------
Outcome criterion1() {
  long randoms = 0;
  long fixtures = 0;
  long mask_misses = 0;
  double worst = 0.0;

  const auto run_one = [&](const GproInstance& inst) {
    const OracleResult oracle = brute_force_optimum(inst);
    const PriTrace t = solve(inst, all_active_policy(inst));
    worst = std::max(worst, scaled_diff(t.objective, oracle.value));
    const uint64_t got = policy_mask(t.iterates.back().policy);
    bool in_set = false;
    for (const Policy& p : oracle.best)
      if (policy_mask(p) == got) in_set = true;
    if (!in_set) ++mask_misses;
  };

  for (const std::string& family : {"er", "power-law"}) {
    BenchConfig cfg;
    cfg.family = family;
    cfg.n_min = 5;
    cfg.n_max = 10;
    cfg.seed = family == "er" ? 101 : 102;
    for (long i = 0; i < 1000; ++i) {
      const int f = 1 + static_cast<int>(i % 8);
      run_one(draw_instance(cfg, f, i));
      ++randoms;
    }
  }

  for (const GproInstance& inst : hand_fixtures()) {
    if (!validate(inst).empty()) return {false, "hand fixture failed validation"};
    run_one(inst);
    ++fixtures;
  }
  for (const auto& entry : fs::directory_iterator(PRO_FIXTURE_DIR)) {
    if (entry.path().extension() != ".json") continue;
    GproInstance inst;
    try {
      inst = load_instance(entry.path().string());
    } catch (const std::exception&) {
      continue;  // not an instance file
    }
    if (!validate(inst).empty()) continue;  // negative-test fixture
    run_one(inst);
    ++fixtures;
  }

  std::ostringstream d;
  d << "randoms=" << randoms << " fixtures=" << fixtures
    << " max_value_diff=" << fmt_double(worst) << " off_optimum_policies=" << mask_misses;
  return {randoms >= 2000 && fixtures > 0 && worst <= kOptimumTol && mask_misses == 0,
          d.str()};
}

// --------------------------------------------------------------------------
// 2. Shared-source families finish within f switching passes from any start.
// --------------------------------------------------------------------------
Outcome criterion2() {
  long instances = 0;
  long runs = 0;
  long iter_viol = 0;
  long dom_viol = 0;
  long gen_fail = 0;
  int max_iter = 0;

  const FreeEdgeMode modes[] = {FreeEdgeMode::SingleSource, FreeEdgeMode::SourceVs,
                                FreeEdgeMode::SourceVsAndW};
  for (int m = 0; m < 3; ++m) {
    for (int f = 1; f <= 8; ++f) {
      BenchConfig cfg;
      cfg.mode = modes[m];
      cfg.f = f;
      cfg.n_min = 6;
      cfg.n_max = 12;
      cfg.p_min = cfg.p_max = 0.4;
      cfg.count = 460;
      cfg.random_starts = 10;
      cfg.seed = 20000 + static_cast<uint64_t>(m) * 100 + static_cast<uint64_t>(f);
      const FamilyReport r = single_source_checks(cfg);
      instances += cfg.count - r.generation_failures;
      runs += r.runs;
      iter_viol += r.iteration_violations;
      dom_viol += r.dominance_violations;
      gen_fail += r.generation_failures;
      max_iter = std::max(max_iter, r.max_iterations);
      if (r.max_iterations > f) ++iter_viol;
    }
  }

  std::ostringstream d;
  d << "instances=" << instances << " runs=" << runs << " over_budget=" << iter_viol
    << " dominance_violations=" << dom_viol << " max_passes=" << max_iter
    << " generation_failures=" << gen_fail;
  return {instances >= 10000 && iter_viol == 0 && dom_viol == 0, d.str()};
}

// --------------------------------------------------------------------------
// 3. Bulk scan at n=8, f=4 stays under the budget; the counterexample
//    archival contract fires on the injected barrier fixture.
// --------------------------------------------------------------------------
Outcome criterion3() {
  const fs::path base = fs::temp_directory_path() / "pro_acceptance_c3";
  fs::remove_all(base);

  BenchConfig cfg;
  cfg.n_min = cfg.n_max = 8;
  cfg.f = 4;
  cfg.count = 100000;
  cfg.seed = 2026;
  cfg.out_dir = (base / "bulk").string();
  const HuntResult bulk = hunt(cfg);

  long at_most_3 = 0;
  int max_seen = 0;
  for (const auto& [k, v] : bulk.histogram) {
    if (k <= 3) at_most_3 += v;
    max_seen = std::max(max_seen, k);
  }
  const double barrier_rate =
      bulk.completed > 0
          ? static_cast<double>(bulk.barrier_hits) / static_cast<double>(bulk.completed)
          : 1.0;
  const bool bulk_ok = bulk.exit_code == 0 && bulk.counterexamples == 0 &&
                       bulk.completed >= 100000 && max_seen <= 4 &&
                       at_most_3 >= bulk.completed - bulk.barrier_hits &&
                       barrier_rate <= kBarrierRateCap;

  // Injected barrier fixture, failure threshold lowered onto it: exit code 2
  // with a replayable archive.
  BenchConfig trip;
  trip.n_min = trip.n_max = 7;
  trip.f = 3;
  trip.count = 0;
  trip.seed = 11;
  trip.inject = {std::string(PRO_FIXTURE_DIR) + "/barrier_hit_f3.json"};
  trip.out_dir = (base / "trip").string();
  trip.fail_at = 3;
  const HuntResult tripped = hunt(trip);
  bool replayable = false;
  for (const std::string& path : tripped.archived) {
    const nlohmann::json arc = load_json(path);
    if (!arc.contains("instance")) continue;
    const GproInstance inst = instance_from_json(arc["instance"]);
    if (validate(inst).empty()) replayable = true;
  }
  const bool contract_ok = tripped.exit_code == 2 && tripped.counterexamples == 1 && replayable;

  // Same fixture without the knob: archived as a barrier hit, exit 0.
  BenchConfig graze = trip;
  graze.fail_at.reset();
  graze.out_dir = (base / "graze").string();
  const HuntResult grazed = hunt(graze);
  const bool graze_ok =
      grazed.exit_code == 0 && grazed.barrier_hits == 1 && !grazed.archived.empty();

  std::ostringstream d;
  d << "completed=" << bulk.completed << " max_passes=" << max_seen
    << " barrier_hits=" << bulk.barrier_hits << " rate=" << fmt_double(barrier_rate)
    << " exit2_contract=" << (contract_ok ? "ok" : "broken")
    << " barrier_archive=" << (graze_ok ? "ok" : "broken");
  fs::remove_all(base);
  return {bulk_ok && contract_ok && graze_ok, d.str()};
}

// --------------------------------------------------------------------------
// 4. Budget sweep on heavy-tailed graphs: shallow growth of pass counts.
// --------------------------------------------------------------------------
Outcome criterion4() {
  BenchConfig cfg;
  cfg.family = "power-law";
  cfg.n_min = 20;
  cfg.n_max = 40;
  cfg.count = 5;
  cfg.seed = 4242;
  const std::vector<SweepRow> rows = sweep_f(cfg, 3, 30);

  bool ok = rows.size() == 28;
  int worst_max = 0;
  double worst_mean = 0.0;
  for (const SweepRow& row : rows) {
    if (row.count < 5) ok = false;
    if (row.max_iters > row.f) ok = false;
    if (!(row.mean_iters < std::min(static_cast<double>(row.f), 8.0))) ok = false;
    worst_max = std::max(worst_max, row.max_iters);
    worst_mean = std::max(worst_mean, row.mean_iters);
  }

  std::ostringstream d;
  d << "budgets=3..30 per_budget=5 max_passes=" << worst_max
    << " worst_mean=" << fmt_double(worst_mean);
  return {ok, d.str()};
}

// --------------------------------------------------------------------------
// 5. Reductions preserve optimal values both ways, with structural size
//    bounds on every produced instance.
// --------------------------------------------------------------------------
Outcome criterion5() {
  double worst_fwd = 0.0;
  long fwd = 0;
  for (long i = 0; i < 1000; ++i) {
    const int n = 3 + static_cast<int>(i % 4);
    const int acts = 2 + static_cast<int>(i % 4);
    const SspInstance ssp = random_ssp(n, acts, derive_seed(5000, static_cast<uint64_t>(i)), {});
    const SspToGproResult red = ssp_to_gpro(ssp);

    long transitions = 0;
    for (const auto& per_state : ssp.actions)
      for (const SspAction& a : per_state) transitions += static_cast<long>(a.out.size());
    if (red.instance.num_nodes() > 2 + 3 * ssp.num_states() + transitions)
      return {false, "derived instance exceeded its linear node bound"};
    if (red.instance.num_edges() > 2 + 4 * (ssp.num_states() + transitions))
      return {false, "derived instance exceeded its linear edge bound"};

    const PiResult side_a =
        policy_iteration(ssp, SspPolicy{std::vector<int>(ssp.num_states(), 0)});
    const PriTrace side_b = solve(red.instance, all_active_policy(red.instance));
    const std::vector<double>& phi = side_b.iterates.back().phi;
    for (int s = 0; s < ssp.num_states(); ++s)
      worst_fwd = std::max(worst_fwd, scaled_diff(phi[red.value_node[s]], side_a.values[s]));
    ++fwd;
  }

  double worst_back = 0.0;
  long back = 0;
  for (long i = 0; i < 1000; ++i) {
    const int n = 4 + static_cast<int>(i % 5);
    const int f = 1 + static_cast<int>(i % 6);
    const GproInstance inst = random_gpro(n, f, derive_seed(6000, static_cast<uint64_t>(i)), {});
    const auto [ssp, map] = gpro_to_ssp(inst);

    int unconstrained = 0;
    for (int s = 0; s < inst.num_free(); ++s)
      if (inst.free_class(s) == FreeClass::Unconstrained) ++unconstrained;
    if (ssp.num_states() != inst.num_nodes() + unconstrained)
      return {false, "retry encoding miscounted its auxiliary states"};
    for (int s = inst.num_nodes(); s < ssp.num_states(); ++s) {
      if (ssp.num_actions(s) != 2 || ssp.actions[s][0].out.size() != 1 ||
          ssp.actions[s][1].out.size() != 1)
        return {false, "auxiliary state shape is off the +1 node +2 edges budget"};
    }

    const PiResult side_a =
        policy_iteration(ssp, SspPolicy{std::vector<int>(ssp.num_states(), 0)});
    const OracleResult side_b = brute_force_optimum(inst);
    worst_back = std::max(worst_back, scaled_diff(side_a.values[inst.v_s], side_b.value));

    // The optimal derived policy maps back to an activation whose hitting
    // times equal the derived values on every original node.
    const HittingTimes ht = hitting_times(inst, map.backward(side_a.policy));
    for (int v = 0; v < inst.num_nodes(); ++v)
      worst_back = std::max(worst_back, scaled_diff(ht.phi[v], side_a.values[v]));
    ++back;
  }

  std::ostringstream d;
  d << "to_instance=" << fwd << " max_diff=" << fmt_double(worst_fwd)
    << " to_control=" << back << " max_diff=" << fmt_double(worst_back);
  return {fwd >= 1000 && back >= 1000 && worst_fwd <= kPreserveTol &&
              worst_back <= kPreserveTol,
          d.str()};
}

// --------------------------------------------------------------------------
// 6. Policy iteration never needs more sweeps than value iteration under
//    restarts; the theoretical bound shape is reported, not asserted.
// --------------------------------------------------------------------------
Outcome criterion6() {
  BenchConfig cfg;
  cfg.n_min = 8;
  cfg.n_max = 20;
  cfg.f = 4;
  cfg.count = 334;
  cfg.seed = 6060;
  const std::vector<ZapRow> rows = zapping_pi_vi_checks(cfg, {0.05, 0.15, 0.3});

  long pairs = 0;
  long pi_worse = 0;
  double gap = 0.0;
  std::ostringstream d;
  for (const ZapRow& row : rows) {
    pairs += row.pairs;
    pi_worse += row.pi_worse;
    gap = std::max(gap, row.max_value_gap);
    d << "c=" << row.c << " pi=" << fmt_double(row.mean_pi)
      << " vi=" << fmt_double(row.mean_vi)
      << " bound_shape<=" << fmt_double(row.bound_shape_max) << "; ";
  }
  d << "pairs=" << pairs << " pi_worse=" << pi_worse << " value_gap=" << fmt_double(gap);
  return {pairs >= 1000 && pi_worse == 0 && gap <= kPiViGapTol, d.str()};
}

// --------------------------------------------------------------------------
// 7. Evaluation identities: walk-split reconstruction, return-time
//    inversion of the stationary mass, and row stochasticity throughout.
// --------------------------------------------------------------------------
Outcome criterion7() {
  double worst_row = 0.0;
  const auto row_check = [&](const GproInstance& inst, const Policy& pol) {
    const TransitionMatrix tm = transition_matrix(inst, pol);
    for (int v = 0; v < inst.num_nodes(); ++v) {
      double sum = 0.0;
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(tm.q, v); it; ++it)
        sum += it.value();
      worst_row = std::max(worst_row, std::abs(sum - 1.0));
    }
  };

  long rec_pairs = 0;
  double worst_rec = 0.0;
  for (long i = 0; i < 100; ++i) {
    RandomGproOptions opt;
    if (i % 3 == 0) opt.zapping = 0.1 + 0.002 * static_cast<double>(i);
    const int n = 5 + static_cast<int>(i % 4);
    const GproInstance inst =
        random_gpro(n, 3 + static_cast<int>(i % 2), derive_seed(7000, static_cast<uint64_t>(i)), opt);
    Rng rng(derive_seed(7001, static_cast<uint64_t>(i)));
    const Policy pol = random_feasible_policy(inst, rng);
    row_check(inst, pol);
    for (NodeId u = 0; u < inst.num_nodes(); ++u) {
      if (u == inst.v_t) continue;
      for (NodeId w = 0; w < inst.num_nodes(); ++w) {
        if (w == u || w == inst.v_t || w == inst.v_s) continue;
        try {
          const Decomposition dec = decompose(inst, pol, u, w);
          worst_rec = std::max(worst_rec, dec.reconstruction_error);
          ++rec_pairs;
        } catch (const DegenerateDecompositionError&) {
        }
      }
    }
  }

  long renewal = 0;
  double worst_renewal = 0.0;
  for (long i = 0; renewal < 100 && i < 2000; ++i) {
    const SupportGraph g =
        erdos_renyi(5 + static_cast<int>(i % 6), 0.5, derive_seed(7100, static_cast<uint64_t>(i)));
    GproInstance inst;
    try {
      inst = sample_free_edges(g, 2, SampleOptions{}, derive_seed(7101, static_cast<uint64_t>(i)));
    } catch (const std::runtime_error&) {
      continue;
    }
    const GproInstance canon = canonical_pro(inst);
    const Policy pol = all_active_policy(canon);
    std::vector<double> pi;
    try {
      pi = pagerank(canon, pol);
    } catch (const IrreducibilityError&) {
      continue;
    }
    row_check(canon, pol);
    const HittingTimes ht = hitting_times(canon, pol);
    worst_renewal =
        std::max(worst_renewal, std::abs(pi[canon.v_s] - 1.0 / ht.phi[canon.v_s]));
    ++renewal;
  }

  std::ostringstream d;
  d << "reconstruction_pairs=" << rec_pairs << " max_err=" << fmt_double(worst_rec)
    << " renewal_instances=" << renewal << " max_err=" << fmt_double(worst_renewal)
    << " max_row_defect=" << fmt_double(worst_row);
  return {rec_pairs > 0 && worst_rec <= kReconstructTol && renewal >= 100 &&
              worst_renewal <= kRenewalTol && worst_row <= kRowSumTol,
          d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[i + 1]);
      ++i;
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 64;
    }
  }

  Outcome (*criteria[])() = {criterion1, criterion2, criterion3, criterion4,
                             criterion5, criterion6, criterion7};
  int failures = 0;
  for (int n = 1; n <= 7; ++n) {
    if (only != 0 && n != only) continue;
    Outcome out;
    try {
      out = criteria[n - 1]();
    } catch (const std::exception& e) {
      out = {false, std::string("unexpected exception: ") + e.what()};
    }
    std::printf("criterion %d %s %s\n", n, out.pass ? "PASS" : "FAIL", out.detail.c_str());
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  return failures;
}
