#include "pro/pri.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "pro/tolerances.hpp"

namespace pro {

namespace {

// Decide an unconstrained edge (i, j): activate when detouring through j is
// an improvement, i.e. the node's edge-mix value compares favorably against
// phi[j] + cost. Inside the tie band the incumbent state wins.
int decide_edge(double mix_i, double phi_j_plus_cost, int current, Sense sense) {
  const double band = tol::band(mix_i, phi_j_plus_cost);
  if (sense == Sense::MaximizePagerank) {
    if (mix_i > phi_j_plus_cost + band) return 1;
    if (mix_i < phi_j_plus_cost - band) return 0;
  } else {
    if (mix_i < phi_j_plus_cost - band) return 1;
    if (mix_i > phi_j_plus_cost + band) return 0;
  }
  return current;
}

// Pick the best continuation among a pair or group by cost + phi[head].
// Pairs keep the incumbent inside the tie band; all-free groups take the
// lowest edge id among candidates in the band.
int choose_one(const GproInstance& inst, const std::vector<double>& phi,
               const std::vector<int>& slots, int current_slot, Sense sense,
               bool keep_incumbent) {
  double best = 0.0;
  bool first = true;
  for (int s : slots) {
    const Edge& e = inst.edges[inst.free_ids()[s]];
    const double value = e.cost + phi[e.to];
    const bool better = sense == Sense::MaximizePagerank ? value < best : value > best;
    if (first || better) {
      best = value;
      first = false;
    }
  }
  if (keep_incumbent && current_slot >= 0) {
    const Edge& e = inst.edges[inst.free_ids()[current_slot]];
    if (tol::near(e.cost + phi[e.to], best)) return current_slot;
  }
  for (int s : slots) {
    const Edge& e = inst.edges[inst.free_ids()[s]];
    if (tol::near(e.cost + phi[e.to], best)) return s;
  }
  return slots.front();
}

}  // namespace

Policy greedy_improve(const GproInstance& inst, const Policy& current,
                      const std::vector<double>& phi, Sense sense, const EvalOptions& opts) {
  // Per-edge comparisons are against the node's expected value over the edge
  // channel alone. Without zapping that is phi itself; with zapping the
  // restart mixture has to be peeled off first, or edges near the zap average
  // would be classified by the wrong threshold.
  const double c = inst.zapping ? *inst.zapping : 0.0;
  double zap_cont = 0.0;
  if (c > 0.0) {
    double sum = 0.0;
    for (double v : phi) sum += v;  // phi[v_t] is zero either way
    const int nz = opts.zap_excludes_target ? inst.num_nodes() - 1 : inst.num_nodes();
    zap_cont = tol::kZapStepCost + sum / nz;
  }
  const auto edge_mix = [&](NodeId v) { return c > 0.0 ? (phi[v] - c * zap_cont) / (1.0 - c) : phi[v]; };

  Policy next = current;
  for (int s = 0; s < inst.num_free(); ++s) {
    if (inst.free_class(s) != FreeClass::Unconstrained) continue;
    const Edge& e = inst.edges[inst.free_ids()[s]];
    next.active[s] = static_cast<uint8_t>(
        decide_edge(edge_mix(e.from), phi[e.to] + e.cost, current.active[s], sense));
  }
  for (const auto& pr : inst.exclusivity) {
    const int sa = inst.free_slot(pr[0]);
    const int sb = inst.free_slot(pr[1]);
    if (sa < 0 || sb < 0) continue;
    const int cur = current.active[sa] ? sa : sb;
    const int win = choose_one(inst, phi, {sa, sb}, cur, sense, true);
    next.active[sa] = win == sa;
    next.active[sb] = win == sb;
  }
  for (const auto& g : inst.groups()) {
    const int win = choose_one(inst, phi, g, -1, sense, false);
    for (int s : g) next.active[s] = s == win;
  }
  return next;
}

uint64_t default_guard(int f) {
  if (f >= 63) return ~uint64_t{0};
  return (uint64_t{1} << f) + 1;
}

PriTrace solve(const GproInstance& inst, const Policy& initial, Sense sense, uint64_t guard,
               const EvalOptions& opts) {
  if (!feasible(inst, initial))
    throw std::invalid_argument("initial policy violates the exactly-one constraints");
  if (guard == 0) guard = default_guard(inst.num_free());

  const double dir = sense == Sense::MaximizePagerank ? 1.0 : -1.0;
  const bool track_masks = inst.num_free() <= 64;

  PriTrace trace;
  std::unordered_set<uint64_t> seen;
  Policy cur = initial;
  for (;;) {
    const HittingTimes ht = hitting_times(inst, cur, opts);
    ++trace.iteration_count;

    PriIterate it;
    it.policy = cur;
    it.phi = ht.phi;
    if (!trace.iterates.empty()) {
      const Policy& prev = trace.iterates.back().policy;
      for (int s = 0; s < inst.num_free(); ++s)
        if (prev.active[s] != cur.active[s]) it.switched.push_back(inst.free_ids()[s]);

      // each evaluation must move phi[v_s] the right way; anything else is a
      // numerical fault worth failing loudly on
      const double prev_obj = trace.iterates.back().phi[inst.v_s];
      const double obj = ht.phi[inst.v_s];
      if (dir * (obj - prev_obj) > tol::band(obj, prev_obj))
        throw std::runtime_error("objective moved the wrong way between iterations: " +
                                 std::to_string(prev_obj) + " -> " + std::to_string(obj));
    }
    trace.iterates.push_back(std::move(it));
    trace.objective = ht.phi[inst.v_s];

    const Policy next = greedy_improve(inst, cur, ht.phi, sense, opts);
    if (next == cur) {
      trace.termination = Termination::Converged;
      break;
    }
    if (track_masks) {
      seen.insert(policy_mask(cur));
      if (seen.count(policy_mask(next))) {
        trace.termination = Termination::GuardTripped;
        break;
      }
    }
    if (static_cast<uint64_t>(trace.iteration_count) >= guard) {
      trace.termination = Termination::GuardTripped;
      break;
    }
    ++trace.switch_count;
    cur = next;
  }
  return trace;
}

IterationStats iteration_count(const GproInstance& inst, const std::vector<Policy>& starts,
                               Sense sense, const EvalOptions& opts) {
  IterationStats stats;
  long total = 0;
  for (const Policy& p : starts) {
    const PriTrace trace = solve(inst, p, sense, 0, opts);
    stats.counts.push_back(trace.switch_count);
    stats.max_iters = std::max(stats.max_iters, trace.switch_count);
    total += trace.switch_count;
    if (trace.switch_count > inst.num_free()) ++stats.over_f;
  }
  if (!starts.empty()) stats.mean_iters = static_cast<double>(total) / starts.size();
  return stats;
}

}  // namespace pro
