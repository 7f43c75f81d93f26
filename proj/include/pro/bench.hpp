#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "pro/generators.hpp"
#include "pro/pri.hpp"

namespace pro {

// Shared experiment configuration. Every experiment derives the instance for
// (config, index) deterministically, so runs are reproducible and resumable
// regardless of scheduling.
//
// Two counts appear in the harness. Barrier and counterexample decisions use
// PriTrace::switch_count, the passes that changed the policy, which is the
// quantity the f-iteration bound speaks about. The growth-curve CSV reports
// PriTrace::iteration_count, evaluation passes including the confirming one,
// so a run with nothing to improve still shows 1.
struct BenchConfig {
  std::string family = "er";  // "er" or "power-law"
  int n_min = 8;
  int n_max = 8;
  double p_min = 0.35;
  double p_max = 0.35;
  double exponent = 2.5;
  int f = 4;
  long count = 1000;
  uint64_t seed = 1;
  FreeEdgeMode mode = FreeEdgeMode::Uniform;
  std::optional<double> zapping;
  Sense sense = Sense::MaximizePagerank;
  int workers = 0;  // 0 = PRO_WORKERS environment variable, else hardware
  long checkpoint_every = 50000;
  std::string out_dir;             // archives and checkpoints land here
  std::optional<int> fail_at;      // treat this iteration count as a failure (testing knob)
  std::vector<std::string> inject; // instance files evaluated before the random stream
  int random_starts = 0;           // extra random initial policies per instance
};

// Config files carry one key per field (mode and sense as strings, zapping
// and fail_at nullable); keys absent from the JSON keep their current value,
// so a file can be overlaid with flag values on top.
nlohmann::json to_json(const BenchConfig& cfg);
void apply_config_json(BenchConfig& cfg, const nlohmann::json& j);

// Deterministic instance draw for (config, f, index). Regenerates the
// support graph a bounded number of times when free-edge sampling cannot
// produce a valid instance; throws std::runtime_error if that keeps failing.
GproInstance draw_instance(const BenchConfig& cfg, int f, long index);

int resolve_workers(const BenchConfig& cfg);

struct SweepRow {
  int f = 0;
  long count = 0;
  double mean_iters = 0.0;
  int max_iters = 0;
  long generation_failures = 0;
};

// Iteration statistics per free-edge budget over cfg.count instances each.
std::vector<SweepRow> sweep_f(const BenchConfig& cfg, int f_min, int f_max);
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);

struct HuntResult {
  std::map<int, long> histogram;  // iterations -> runs
  long completed = 0;
  long generation_failures = 0;
  long barrier_hits = 0;    // iterations == f
  long counterexamples = 0; // iterations > f, or >= fail_at when set
  std::vector<std::string> archived;
  int exit_code = 0;  // 2 once a counterexample is found
};

// Scans cfg.count instances at cfg.f, archiving any run whose iteration
// count reaches f and stopping once one exceeds it. Injected instance files
// run first. Progress is checkpointed into out_dir: a hunt interrupted and
// rerun with the same configuration resumes where it stopped.
HuntResult hunt(const BenchConfig& cfg);

struct FamilyReport {
  long runs = 0;
  long iteration_violations = 0;  // iterations > f
  long dominance_violations = 0;
  long generation_failures = 0;
  int max_iterations = 0;
  std::vector<std::string> examples;  // archived violating runs
};

// Families whose free edges share their source: every run must finish
// within f iterations, changes of the start policy must not leak into
// hitting times beyond what the shared source explains, and improvements
// elsewhere may never outrun the improvement at the source.
FamilyReport single_source_checks(const BenchConfig& cfg);

struct ZapRow {
  double c = 0.0;
  long pairs = 0;
  long pi_worse = 0;  // runs where policy iteration needed more iterations
  double mean_pi = 0.0;
  double mean_vi = 0.0;
  double max_value_gap = 0.0;  // sup-norm disagreement of the two solvers
  double eta_min = 1.0;
  int diameter_max = 0;
  double bound_shape_max = 0.0;  // n^2 log(n delta) / c, reported not asserted
};

// Paired policy-iteration / value-iteration runs on zapped instances via the
// exact per-node conversion. Policy iteration must never need more
// iterations than value iteration.
std::vector<ZapRow> zapping_pi_vi_checks(const BenchConfig& cfg, const std::vector<double>& cs);

}  // namespace pro
