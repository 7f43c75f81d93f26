#pragma once

#include <cstdint>
#include <optional>

#include "pro/gpro.hpp"
#include "pro/rng.hpp"
#include "pro/ssp.hpp"

namespace pro {

// Directed G(n, p) with self-loops allowed, dangling nodes repaired, and a
// random target with at least one incoming edge. Unit weights and costs.
SupportGraph erdos_renyi(int n, double p, uint64_t seed,
                         RepairMode repair = RepairMode::ConnectAll);

struct PowerLawOptions {
  double exponent = 2.5;  // out-degree ~ d^(-exponent)
  int min_degree = 1;
  int max_degree = 0;  // 0 = n
};

// Heavy-tailed out-degrees via inverse-CDF sampling, uniform random heads,
// duplicate edges merged. Unit weights and costs.
SupportGraph power_law(int n, uint64_t seed, const PowerLawOptions& opts = {},
                       RepairMode repair = RepairMode::ConnectAll);

enum class FreeEdgeMode {
  Uniform,      // any non-loop edge of the split instance
  SingleSource, // all free edges leave one random non-start node
  SourceVs,     // all free edges leave v_s
  SourceVsAndW, // edges leave v_s or one other node
};

struct SampleOptions {
  FreeEdgeMode mode = FreeEdgeMode::Uniform;
  std::optional<double> zapping;
  int max_retries = 64;
};

// Splits the graph's target and marks f existing edges free according to the
// mode, resampling the choice until the instance validates (properness
// included). Throws std::runtime_error when no valid choice is found.
GproInstance sample_free_edges(const SupportGraph& g, int f, const SampleOptions& opts,
                               uint64_t seed);

struct RandomGproOptions {
  double p = 0.45;           // edge density of the underlying graph
  double weight_min = 0.25;
  double weight_max = 4.0;
  double cost_min = 0.25;
  double cost_max = 4.0;
  int pairs = 0;             // exclusivity pairs to carve out of f
  std::optional<double> zapping;
  int max_retries = 200;
};

// Random weighted instance with f free edges, optionally including
// exclusivity pairs (each consumes two of the f slots at a degree-2 node).
GproInstance random_gpro(int n, int f, uint64_t seed, const RandomGproOptions& opts = {});

struct RandomSspOptions {
  int min_actions = 1;
  int max_support = 3;
  double cost_min = 0.0;
  double cost_max = 5.0;
  double target_bias = 0.5;  // chance an action gets the target in its support
  int max_retries = 200;
};

// Random valid control problem with up to max_actions actions per state.
SspInstance random_ssp(int n, int max_actions, uint64_t seed, const RandomSspOptions& opts = {});

}  // namespace pro
