#include "pro/generators.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace pro {

namespace {

NodeId pick_target(const SupportGraph& g, Rng& rng) {
  std::vector<int> in_deg(g.num_nodes(), 0);
  for (const Edge& e : g.edges) ++in_deg[e.to];
  std::vector<NodeId> candidates;
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    if (in_deg[v] > 0) candidates.push_back(v);
  if (candidates.empty())
    throw std::runtime_error("graph has no node with an incoming edge");
  return candidates[rng.below(candidates.size())];
}

std::string violation_summary(const std::vector<Violation>& vs) {
  std::string s;
  for (size_t i = 0; i < std::min<size_t>(vs.size(), 3); ++i) {
    if (!s.empty()) s += "; ";
    s += vs[i].code + ": " + vs[i].detail;
  }
  if (vs.size() > 3) s += "; ...";
  return s;
}

}  // namespace

SupportGraph erdos_renyi(int n, double p, uint64_t seed, RepairMode repair) {
  if (n < 2) throw std::invalid_argument("erdos_renyi: need at least two nodes");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("erdos_renyi: p must be in [0, 1]");
  Rng rng(seed);
  SupportGraph g;
  for (int i = 0; i < n; ++i) g.names.push_back(std::to_string(i));
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = 0; j < n; ++j)
      if (rng.chance(p)) g.edges.push_back({i, j, 1.0, 1.0, false});
  g = repair_dangling(std::move(g), repair);
  g.target = pick_target(g, rng);
  return g;
}

SupportGraph power_law(int n, uint64_t seed, const PowerLawOptions& opts, RepairMode repair) {
  if (n < 2) throw std::invalid_argument("power_law: need at least two nodes");
  if (!(opts.exponent > 0.0)) throw std::invalid_argument("power_law: exponent must be positive");
  Rng rng(seed);
  const int dmin = std::max(1, opts.min_degree);
  const int dmax = std::max(dmin, std::min(opts.max_degree > 0 ? opts.max_degree : n, n));

  // inverse-CDF table over d^(-exponent)
  std::vector<double> cum;
  double total = 0.0;
  for (int d = dmin; d <= dmax; ++d) {
    total += std::pow(static_cast<double>(d), -opts.exponent);
    cum.push_back(total);
  }

  SupportGraph g;
  for (int i = 0; i < n; ++i) g.names.push_back(std::to_string(i));
  for (NodeId i = 0; i < n; ++i) {
    const double u = rng.unit() * total;
    int deg = dmax;
    for (size_t k = 0; k < cum.size(); ++k) {
      if (u <= cum[k]) {
        deg = dmin + static_cast<int>(k);
        break;
      }
    }
    std::set<NodeId> heads;
    for (int s = 0; s < deg; ++s) heads.insert(static_cast<NodeId>(rng.below(n)));
    for (NodeId j : heads) g.edges.push_back({i, j, 1.0, 1.0, false});
  }
  g = repair_dangling(std::move(g), repair);
  g.target = pick_target(g, rng);
  return g;
}

GproInstance sample_free_edges(const SupportGraph& g, int f, const SampleOptions& opts,
                               uint64_t seed) {
  if (f < 0) throw std::invalid_argument("sample_free_edges: f must be nonnegative");
  Rng rng(seed);
  const SplitResult split = split_target(g);
  std::string last_failure = "no attempt made";

  for (int attempt = 0; attempt < opts.max_retries; ++attempt) {
    GproInstance inst = split.instance;
    inst.zapping = opts.zapping;

    // eligible edge ids on the split instance; the absorbing self-loop and
    // anything out of v_t stay fixed
    std::vector<EdgeId> pool;
    auto eligible_from = [&](NodeId v) {
      pool.clear();
      for (EdgeId e = 0; e < inst.num_edges(); ++e)
        if (inst.edges[e].from == v && inst.edges[e].from != inst.v_t) pool.push_back(e);
    };
    switch (opts.mode) {
      case FreeEdgeMode::Uniform:
        for (EdgeId e = 0; e < inst.num_edges(); ++e)
          if (inst.edges[e].from != inst.v_t) pool.push_back(e);
        break;
      case FreeEdgeMode::SingleSource: {
        std::vector<NodeId> candidates;
        for (NodeId v = 0; v < inst.num_nodes(); ++v)
          if (v != inst.v_t && v != inst.v_s &&
              static_cast<int>(inst.out_edges(v).size()) >= f)
            candidates.push_back(v);
        if (candidates.empty()) {
          last_failure = "no node has enough outgoing edges";
          continue;
        }
        eligible_from(candidates[rng.below(candidates.size())]);
        break;
      }
      case FreeEdgeMode::SourceVs:
        eligible_from(inst.v_s);
        break;
      case FreeEdgeMode::SourceVsAndW: {
        std::vector<NodeId> candidates;
        for (NodeId v = 0; v < inst.num_nodes(); ++v)
          if (v != inst.v_t && v != inst.v_s && !inst.out_edges(v).empty())
            candidates.push_back(v);
        if (candidates.empty()) {
          last_failure = "no second source available";
          continue;
        }
        const NodeId w = candidates[rng.below(candidates.size())];
        for (EdgeId e : inst.out_edges(inst.v_s)) pool.push_back(e);
        for (EdgeId e : inst.out_edges(w)) pool.push_back(e);
        break;
      }
    }

    if (static_cast<int>(pool.size()) < f) {
      last_failure = "not enough eligible edges";
      continue;
    }
    for (int i = 0; i < f; ++i)
      std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
    for (int i = 0; i < f; ++i) inst.edges[pool[i]].free = true;
    inst.finalize();

    const auto violations = validate(inst);
    if (violations.empty()) return inst;
    last_failure = violation_summary(violations);
  }
  throw std::runtime_error("sample_free_edges: no valid instance after " +
                           std::to_string(opts.max_retries) + " tries (" + last_failure + ")");
}

GproInstance random_gpro(int n, int f, uint64_t seed, const RandomGproOptions& opts) {
  if (2 * opts.pairs > f)
    throw std::invalid_argument("random_gpro: pairs need two free slots each");
  Rng rng(seed);
  std::string last_failure = "no attempt made";

  for (int attempt = 0; attempt < opts.max_retries; ++attempt) {
    SupportGraph g;
    for (int i = 0; i < n; ++i) g.names.push_back(std::to_string(i));
    for (NodeId i = 0; i < n; ++i)
      for (NodeId j = 0; j < n; ++j)
        if (rng.chance(opts.p))
          g.edges.push_back({i, j, rng.uniform(opts.weight_min, opts.weight_max),
                             rng.uniform(opts.cost_min, opts.cost_max), false});
    g = repair_dangling(std::move(g), RepairMode::ConnectAll);
    NodeId target;
    try {
      target = pick_target(g, rng);
    } catch (const std::runtime_error&) {
      last_failure = "degenerate graph";
      continue;
    }
    g.target = target;

    GproInstance inst = split_target(g).instance;
    inst.zapping = opts.zapping;

    // exclusivity pairs live at out-degree-2 nodes
    std::vector<NodeId> deg2;
    for (NodeId v = 0; v < inst.num_nodes(); ++v)
      if (v != inst.v_t && inst.out_edges(v).size() == 2) deg2.push_back(v);
    if (static_cast<int>(deg2.size()) < opts.pairs) {
      last_failure = "not enough degree-2 nodes for pairs";
      continue;
    }
    for (int i = 0; i < opts.pairs; ++i)
      std::swap(deg2[i], deg2[i + rng.below(deg2.size() - i)]);
    std::set<NodeId> pair_nodes;
    for (int i = 0; i < opts.pairs; ++i) {
      const auto& oe = inst.out_edges(deg2[i]);
      inst.edges[oe[0]].free = true;
      inst.edges[oe[1]].free = true;
      inst.exclusivity.push_back({oe[0], oe[1]});
      pair_nodes.insert(deg2[i]);
    }

    std::vector<EdgeId> pool;
    for (EdgeId e = 0; e < inst.num_edges(); ++e) {
      if (inst.edges[e].from == inst.v_t) continue;
      if (pair_nodes.count(inst.edges[e].from)) continue;
      pool.push_back(e);
    }
    const int rest = f - 2 * opts.pairs;
    if (static_cast<int>(pool.size()) < rest) {
      last_failure = "not enough edges for free slots";
      continue;
    }
    for (int i = 0; i < rest; ++i)
      std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
    for (int i = 0; i < rest; ++i) inst.edges[pool[i]].free = true;
    inst.finalize();

    const auto violations = validate(inst);
    if (violations.empty()) return inst;
    last_failure = violation_summary(violations);
  }
  throw std::runtime_error("random_gpro: no valid instance after " +
                           std::to_string(opts.max_retries) + " tries (" + last_failure + ")");
}

SspInstance random_ssp(int n, int max_actions, uint64_t seed, const RandomSspOptions& opts) {
  if (n < 2) throw std::invalid_argument("random_ssp: need at least two states");
  if (max_actions < 1) throw std::invalid_argument("random_ssp: need at least one action");
  Rng rng(seed);
  std::string last_failure = "no attempt made";

  for (int attempt = 0; attempt < opts.max_retries; ++attempt) {
    SspInstance inst;
    for (int i = 0; i < n; ++i) inst.names.push_back("s" + std::to_string(i));
    inst.target = n - 1;
    inst.actions.resize(n);

    for (int s = 0; s < n; ++s) {
      if (s == inst.target) {
        SspAction loop;
        loop.out.push_back({s, 1.0, 0.0});
        inst.actions[s] = {std::move(loop)};
        continue;
      }
      const int na = rng.range(std::max(1, opts.min_actions), max_actions);
      for (int a = 0; a < na; ++a) {
        const int support = rng.range(1, std::max(1, std::min(opts.max_support, n)));
        std::set<int> heads;
        while (static_cast<int>(heads.size()) < support)
          heads.insert(static_cast<int>(rng.below(n)));
        if (rng.chance(opts.target_bias)) heads.insert(inst.target);

        SspAction act;
        double total = 0.0;
        std::vector<double> raw;
        for (size_t i = 0; i < heads.size(); ++i) {
          raw.push_back(0.1 + rng.unit());
          total += raw.back();
        }
        size_t i = 0;
        for (int to : heads) {
          act.out.push_back({to, raw[i] / total, rng.uniform(opts.cost_min, opts.cost_max)});
          ++i;
        }
        inst.actions[s].push_back(std::move(act));
      }
    }

    const auto violations = validate(inst);
    if (violations.empty()) return inst;
    last_failure = violation_summary(violations);
  }
  throw std::runtime_error("random_ssp: no valid instance after " +
                           std::to_string(opts.max_retries) + " tries (" + last_failure + ")");
}

}  // namespace pro
