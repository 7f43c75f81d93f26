// Command-line front end: validation, solving, ground-truth enumeration,
// conversions, generators, and the large-scale experiment drivers.
//
// Exit codes: 0 success, 1 invalid input, 2 counterexample found,
// 3 invariant violation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "pro/bench.hpp"
#include "pro/gpro.hpp"
#include "pro/hitting_time.hpp"
#include "pro/json_io.hpp"
#include "pro/oracle.hpp"
#include "pro/pri.hpp"
#include "pro/reductions.hpp"
#include "pro/ssp.hpp"

using nlohmann::json;

namespace {

pro::Sense parse_sense(const std::string& s) {
  return s == "min" ? pro::Sense::MinimizePagerank : pro::Sense::MaximizePagerank;
}

pro::FreeEdgeMode parse_mode(const std::string& s) {
  if (s == "single-source") return pro::FreeEdgeMode::SingleSource;
  if (s == "source-vs") return pro::FreeEdgeMode::SourceVs;
  if (s == "source-vs-w") return pro::FreeEdgeMode::SourceVsAndW;
  return pro::FreeEdgeMode::Uniform;
}

int report_violations(const std::vector<pro::Violation>& violations) {
  for (const pro::Violation& v : violations) std::cerr << v.code << ": " << v.detail << "\n";
  return violations.empty() ? 0 : 1;
}

pro::GproInstance load_valid_instance(const std::string& path) {
  pro::GproInstance inst = pro::load_instance(path);
  const auto violations = pro::validate(inst);
  if (!violations.empty()) {
    report_violations(violations);
    throw std::runtime_error(path + ": instance does not validate");
  }
  return inst;
}

void write_phi_csv(const std::string& path, const pro::GproInstance& inst,
                   const std::vector<double>& phi) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "node,name,phi\n";
  char buf[96];
  for (size_t v = 0; v < phi.size(); ++v) {
    std::snprintf(buf, sizeof buf, "%zu,%s,%.17g\n", v, inst.names[v].c_str(), phi[v]);
    out << buf;
  }
}

void write_q_csv(const std::string& path, const pro::TransitionMatrix& tm) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "from,to,p\n";
  char buf[96];
  for (int row = 0; row < tm.q.outerSize(); ++row) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(tm.q, row); it; ++it) {
      std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", row, static_cast<int>(it.col()), it.value());
      out << buf;
    }
  }
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"policy iteration toolkit for rank-optimization instances"};
  app.require_subcommand(1);
  int rc = 0;

  // validate ----------------------------------------------------------------
  std::string val_path;
  bool val_ssp = false;
  auto* validate = app.add_subcommand("validate", "check an instance file against the model rules");
  validate->add_option("file", val_path, "instance JSON")->required();
  validate->add_flag("--ssp", val_ssp, "treat the file as a control problem");
  validate->callback([&] {
    if (val_ssp)
      rc = report_violations(pro::validate(pro::load_ssp(val_path)));
    else
      rc = report_violations(pro::validate(pro::load_instance(val_path)));
    if (rc == 0) std::cout << "ok\n";
  });

  // solve -------------------------------------------------------------------
  std::string solve_path, solve_policy, solve_sense = "max", solve_trace, solve_phi, solve_q;
  bool solve_zap_skip = false;
  auto* solve = app.add_subcommand("solve", "run policy iteration on an instance");
  solve->add_option("file", solve_path, "instance JSON")->required();
  solve->add_option("--policy", solve_policy, "initial policy JSON (default: all free edges on)");
  solve->add_option("--sense", solve_sense, "max or min")->check(CLI::IsMember({"max", "min"}));
  solve->add_option("--trace", solve_trace, "write the full iterate trace here");
  solve->add_option("--dump-phi", solve_phi, "write final hitting times as CSV");
  solve->add_option("--dump-q", solve_q, "write the final transition matrix as CSV");
  solve->add_flag("--zap-excludes-target", solve_zap_skip,
                  "restart distribution skips the target copy");
  solve->callback([&] {
    const pro::GproInstance inst = load_valid_instance(solve_path);
    pro::EvalOptions opts;
    opts.zap_excludes_target = solve_zap_skip;
    const pro::Policy start = solve_policy.empty()
                                  ? pro::all_active_policy(inst)
                                  : pro::policy_from_json(inst, pro::load_json(solve_policy));
    const pro::PriTrace t = pro::solve(inst, start, parse_sense(solve_sense), 0, opts);
    const pro::Policy& final_policy = t.iterates.back().policy;
    json out;
    out["iterations"] = t.switch_count;
    out["evaluations"] = t.iteration_count;
    out["converged"] = t.termination == pro::Termination::Converged;
    out["objective"] = t.objective;
    out["policy"] = pro::to_json(inst, final_policy)["active"];
    try {
      const std::vector<double> pi = pro::pagerank(inst, final_policy, opts);
      out["pagerank_vs"] = pi[inst.v_s];
    } catch (const pro::IrreducibilityError&) {
      out["pagerank_vs"] = nullptr;  // hitting times stand on their own
    }
    print_json(out);
    if (!solve_trace.empty()) pro::save_json(solve_trace, pro::to_json(inst, t));
    if (!solve_phi.empty()) write_phi_csv(solve_phi, inst, t.iterates.back().phi);
    if (!solve_q.empty()) write_q_csv(solve_q, pro::transition_matrix(inst, final_policy, opts));
    rc = t.termination == pro::Termination::Converged ? 0 : 3;
  });

  // oracle ------------------------------------------------------------------
  std::string orc_path, orc_sense = "max";
  int orc_max_free = 20;
  auto* oracle = app.add_subcommand("oracle", "exhaustive ground truth over all feasible policies");
  oracle->add_option("file", orc_path, "instance JSON")->required();
  oracle->add_option("--sense", orc_sense, "max or min")->check(CLI::IsMember({"max", "min"}));
  oracle->add_option("--max-free", orc_max_free, "enumeration cap, in free edges");
  oracle->callback([&] {
    const pro::GproInstance inst = load_valid_instance(orc_path);
    pro::OracleOptions opts;
    opts.max_free = orc_max_free;
    const pro::OracleResult r = pro::brute_force_optimum(inst, parse_sense(orc_sense), opts);
    json out;
    out["value"] = r.value;
    out["evaluated"] = r.evaluated;
    json best = json::array();
    for (const pro::Policy& p : r.best) best.push_back(pro::to_json(inst, p)["active"]);
    out["best"] = std::move(best);
    print_json(out);
  });

  // reduce ------------------------------------------------------------------
  auto* reduce = app.add_subcommand("reduce", "convert between the two problem forms");
  reduce->require_subcommand(1);

  std::string ts_path, ts_out, ts_map;
  bool ts_direct = false, ts_zap_skip = false;
  auto* to_ssp = reduce->add_subcommand("to-ssp", "instance to control problem");
  to_ssp->add_option("file", ts_path, "instance JSON")->required();
  to_ssp->add_option("--out", ts_out, "write the control problem here (default stdout)");
  to_ssp->add_option("--map", ts_map, "write the correspondence table here");
  to_ssp->add_flag("--direct", ts_direct,
                   "per-node activation-pattern actions (handles zapping, exact)");
  to_ssp->add_flag("--zap-excludes-target", ts_zap_skip,
                   "restart distribution skips the target copy");
  to_ssp->callback([&] {
    const pro::GproInstance inst = load_valid_instance(ts_path);
    json out_j, map_j;
    if (ts_direct) {
      pro::EvalOptions opts;
      opts.zap_excludes_target = ts_zap_skip;
      const auto [ssp, map] = pro::gpro_to_ssp_direct(inst, opts);
      out_j = pro::to_json(ssp);
      map_j = pro::to_json(map);
    } else {
      const auto [ssp, map] = pro::gpro_to_ssp(inst);
      out_j = pro::to_json(ssp);
      map_j = pro::to_json(map);
    }
    if (ts_out.empty())
      print_json(out_j);
    else
      pro::save_json(ts_out, out_j);
    if (!ts_map.empty()) pro::save_json(ts_map, map_j);
  });

  std::string fs_path, fs_out, fs_map;
  auto* from_ssp = reduce->add_subcommand("from-ssp", "control problem to instance");
  from_ssp->add_option("file", fs_path, "control problem JSON")->required();
  from_ssp->add_option("--out", fs_out, "write the instance here (default stdout)");
  from_ssp->add_option("--map", fs_map, "write the correspondence table here");
  from_ssp->callback([&] {
    const pro::SspInstance ssp = pro::load_ssp(fs_path);
    const auto violations = pro::validate(ssp);
    if (!violations.empty()) {
      rc = report_violations(violations);
      throw std::runtime_error(fs_path + ": control problem does not validate");
    }
    const pro::SspToGproResult r = pro::ssp_to_gpro(ssp);
    json map_j;
    map_j["chain"] = pro::to_json(r.chain);
    map_j["prob"] = pro::to_json(r.prob);
    map_j["gpro"] = pro::to_json(r.map);
    map_j["value_node"] = r.value_node;
    if (fs_out.empty())
      print_json(pro::to_json(r.instance));
    else
      pro::save_json(fs_out, pro::to_json(r.instance));
    if (!fs_map.empty()) pro::save_json(fs_map, map_j);
  });

  // gen ---------------------------------------------------------------------
  std::string gen_family = "er", gen_mode = "uniform", gen_out;
  int gen_n = 8, gen_n_max = 0, gen_f = 4, gen_count = 1, gen_actions = 3;
  double gen_p = 0.35, gen_exponent = 2.5;
  std::optional<double> gen_zap;
  uint64_t gen_seed = 1;
  auto* gen = app.add_subcommand("gen", "write random instances to a directory");
  gen->add_option("--family", gen_family, "er, power-law, weighted, or ssp")
      ->check(CLI::IsMember({"er", "power-law", "weighted", "ssp"}));
  gen->add_option("--n", gen_n, "nodes (lower bound when --n-max is set)");
  gen->add_option("--n-max", gen_n_max, "upper bound on nodes, 0 = exactly --n");
  gen->add_option("--p", gen_p, "edge density");
  gen->add_option("--exponent", gen_exponent, "degree exponent for power-law");
  gen->add_option("--f", gen_f, "free edges");
  gen->add_option("--actions", gen_actions, "max actions per state for ssp");
  gen->add_option("--count", gen_count, "instances to write");
  gen->add_option("--seed", gen_seed, "master seed");
  gen->add_option("--mode", gen_mode, "free-edge placement")
      ->check(CLI::IsMember({"uniform", "single-source", "source-vs", "source-vs-w"}));
  gen->add_option("--zapping", gen_zap, "restart probability in [0, 1)");
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->callback([&] {
    std::filesystem::create_directories(gen_out);
    char name[64];
    for (int i = 0; i < gen_count; ++i) {
      const uint64_t seed = pro::derive_seed(gen_seed, static_cast<uint64_t>(i));
      json j;
      const char* stem = "instance";
      if (gen_family == "ssp") {
        j = pro::to_json(pro::random_ssp(gen_n, gen_actions, seed));
        stem = "ssp";
      } else if (gen_family == "weighted") {
        pro::RandomGproOptions opts;
        opts.zapping = gen_zap;
        j = pro::to_json(pro::random_gpro(gen_n, gen_f, seed, opts));
      } else {
        pro::BenchConfig cfg;
        cfg.family = gen_family;
        cfg.n_min = gen_n;
        cfg.n_max = gen_n_max > 0 ? gen_n_max : gen_n;
        cfg.p_min = cfg.p_max = gen_p;
        cfg.exponent = gen_exponent;
        cfg.mode = parse_mode(gen_mode);
        cfg.zapping = gen_zap;
        cfg.seed = gen_seed;
        j = pro::to_json(pro::draw_instance(cfg, gen_f, i));
      }
      std::snprintf(name, sizeof name, "%s_%04d.json", stem, i);
      pro::save_json((std::filesystem::path(gen_out) / name).string(), j);
    }
    std::cout << "wrote " << gen_count << " file(s) to " << gen_out << "\n";
  });

  // shared experiment options. Values come from three layers: built-in
  // defaults, then an optional JSON config file, then any flag given on the
  // command line.
  struct DrawArgs {
    std::string config, family;
    int n = 0, n_max = 0, workers = 0;
    double p = 0.0, exponent = 0.0;
    long count = 0;
    uint64_t seed = 0;
    CLI::Option *o_config, *o_family, *o_n, *o_n_max, *o_p, *o_exp, *o_count, *o_seed, *o_workers;

    void attach(CLI::App* cmd) {
      o_config = cmd->add_option("--config", config, "JSON config file; flags override it");
      o_family = cmd->add_option("--family", family, "er or power-law")
                     ->check(CLI::IsMember({"er", "power-law"}));
      o_n = cmd->add_option("--n", n, "nodes (lower bound when --n-max is set)");
      o_n_max = cmd->add_option("--n-max", n_max, "upper bound on nodes");
      o_p = cmd->add_option("--p", p, "edge density");
      o_exp = cmd->add_option("--exponent", exponent, "degree exponent for power-law");
      o_count = cmd->add_option("--count", count, "instances per configuration");
      o_seed = cmd->add_option("--seed", seed, "master seed");
      o_workers = cmd->add_option("--workers", workers, "worker threads, 0 = auto");
    }
    void overlay(pro::BenchConfig& cfg) const {
      if (o_config->count()) pro::apply_config_json(cfg, pro::load_json(config));
      if (o_family->count()) cfg.family = family;
      if (o_n->count()) {
        cfg.n_min = n;
        cfg.n_max = o_n_max->count() ? n_max : n;
      } else if (o_n_max->count()) {
        cfg.n_max = n_max;
      }
      if (o_p->count()) cfg.p_min = cfg.p_max = p;
      if (o_exp->count()) cfg.exponent = exponent;
      if (o_count->count()) cfg.count = count;
      if (o_seed->count()) cfg.seed = seed;
      if (o_workers->count()) cfg.workers = workers;
    }
  };

  // sweep-f -------------------------------------------------------------------
  DrawArgs sw_args;
  int sw_f_min = 3, sw_f_max = 10;
  std::string sw_out;
  auto* sweep = app.add_subcommand("sweep-f", "iteration statistics per free-edge budget");
  sw_args.attach(sweep);
  sweep->add_option("--f-min", sw_f_min, "smallest free-edge budget");
  sweep->add_option("--f-max", sw_f_max, "largest free-edge budget");
  sweep->add_option("--out", sw_out, "CSV path (default stdout)");
  sweep->callback([&] {
    pro::BenchConfig cfg;
    cfg.family = "power-law";
    cfg.n_min = 20;
    cfg.n_max = 40;
    cfg.count = 25;
    sw_args.overlay(cfg);
    const auto rows = pro::sweep_f(cfg, sw_f_min, sw_f_max);
    if (sw_out.empty()) {
      pro::write_sweep_csv(rows, std::cout);
    } else {
      std::ofstream out(sw_out);
      if (!out) throw std::runtime_error("cannot write " + sw_out);
      pro::write_sweep_csv(rows, out);
    }
  });

  // hunt ------------------------------------------------------------------
  DrawArgs hunt_args;
  pro::BenchConfig hunt_flags;
  int hunt_fail_at = -1;
  auto* hunt = app.add_subcommand("hunt", "scan for runs that reach or exceed f iterations");
  hunt_args.attach(hunt);
  auto* o_hf = hunt->add_option("--f", hunt_flags.f, "free edges");
  auto* o_hckpt =
      hunt->add_option("--checkpoint-every", hunt_flags.checkpoint_every, "runs between checkpoints");
  auto* o_hfail = hunt->add_option(
      "--fail-at", hunt_fail_at, "treat this iteration count as a counterexample (testing knob)");
  auto* o_hinject =
      hunt->add_option("--inject", hunt_flags.inject, "instance files to run before the random stream");
  auto* o_hout = hunt->add_option("--out", hunt_flags.out_dir, "archive and checkpoint directory");
  hunt->callback([&] {
    pro::BenchConfig cfg;
    cfg.count = 100000;
    hunt_args.overlay(cfg);
    if (o_hf->count()) cfg.f = hunt_flags.f;
    if (o_hckpt->count()) cfg.checkpoint_every = hunt_flags.checkpoint_every;
    if (o_hfail->count() && hunt_fail_at >= 0) cfg.fail_at = hunt_fail_at;
    if (o_hinject->count()) cfg.inject = hunt_flags.inject;
    if (o_hout->count()) cfg.out_dir = hunt_flags.out_dir;
    if (cfg.out_dir.empty()) throw CLI::ValidationError("--out", "an output directory is required");
    const pro::HuntResult r = pro::hunt(cfg);
    json out;
    out["completed"] = r.completed;
    out["generation_failures"] = r.generation_failures;
    out["barrier_hits"] = r.barrier_hits;
    out["counterexamples"] = r.counterexamples;
    json hist = json::array();
    for (const auto& [iters, runs] : r.histogram) hist.push_back({iters, runs});
    out["histogram"] = std::move(hist);
    out["archived"] = r.archived;
    print_json(out);
    rc = r.exit_code;
  });

  // theorems -----------------------------------------------------------------
  DrawArgs th_args;
  pro::BenchConfig th_flags;
  long th_zap_count = 200;
  std::vector<double> th_cs{0.05, 0.15, 0.3};
  auto* theorems = app.add_subcommand(
      "theorems", "structured-family iteration bounds and paired solver comparisons");
  th_args.attach(theorems);
  auto* o_tf = theorems->add_option("--f", th_flags.f, "free edges");
  auto* o_tstarts =
      theorems->add_option("--random-starts", th_flags.random_starts, "extra initial policies per run");
  theorems->add_option("--zap-count", th_zap_count, "paired runs per restart probability");
  theorems->add_option("--zap", th_cs, "restart probabilities to compare at");
  auto* o_tout = theorems->add_option("--out", th_flags.out_dir, "directory for violating runs");
  theorems->callback([&] {
    pro::BenchConfig th_cfg;
    th_cfg.n_min = th_cfg.n_max = 10;
    th_cfg.count = 500;
    th_cfg.random_starts = 4;
    th_args.overlay(th_cfg);
    if (o_tf->count()) th_cfg.f = th_flags.f;
    if (o_tstarts->count()) th_cfg.random_starts = th_flags.random_starts;
    if (o_tout->count()) th_cfg.out_dir = th_flags.out_dir;
    json out;
    bool violated = false;
    const std::pair<const char*, pro::FreeEdgeMode> families[] = {
        {"single-source", pro::FreeEdgeMode::SingleSource},
        {"source-vs", pro::FreeEdgeMode::SourceVs},
        {"source-vs-w", pro::FreeEdgeMode::SourceVsAndW},
    };
    for (const auto& [name, mode] : families) {
      pro::BenchConfig cfg = th_cfg;
      cfg.mode = mode;
      const pro::FamilyReport rep = pro::single_source_checks(cfg);
      json jr;
      jr["runs"] = rep.runs;
      jr["generation_failures"] = rep.generation_failures;
      jr["max_iterations"] = rep.max_iterations;
      jr["iteration_violations"] = rep.iteration_violations;
      jr["dominance_violations"] = rep.dominance_violations;
      jr["examples"] = rep.examples;
      out[name] = std::move(jr);
      violated = violated || rep.iteration_violations > 0 || rep.dominance_violations > 0;
    }
    pro::BenchConfig zap_cfg = th_cfg;
    zap_cfg.count = th_zap_count;
    zap_cfg.mode = pro::FreeEdgeMode::Uniform;
    json zap_rows = json::array();
    for (const pro::ZapRow& row : pro::zapping_pi_vi_checks(zap_cfg, th_cs)) {
      json jr;
      jr["c"] = row.c;
      jr["pairs"] = row.pairs;
      jr["pi_worse"] = row.pi_worse;
      jr["mean_pi"] = row.mean_pi;
      jr["mean_vi"] = row.mean_vi;
      jr["max_value_gap"] = row.max_value_gap;
      jr["eta_min"] = row.eta_min;
      jr["diameter_max"] = row.diameter_max;
      jr["bound_shape_max"] = row.bound_shape_max;
      zap_rows.push_back(std::move(jr));
      violated = violated || row.pi_worse > 0;
    }
    out["zapping"] = std::move(zap_rows);
    print_json(out);
    rc = violated ? 3 : 0;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return rc != 0 ? rc : 1;
  }
  return rc;
}
