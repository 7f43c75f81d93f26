#include "pro/gpro.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "pro/rng.hpp"

namespace pro {

void GproInstance::finalize() {
  const int n = num_nodes();
  const int m = num_edges();
  out_edges_.assign(n, {});
  free_ids_.clear();
  free_slot_.assign(m, -1);
  groups_.clear();
  group_nodes_.clear();

  auto edge_ok = [&](EdgeId e) {
    const Edge& ed = edges[e];
    return ed.from >= 0 && ed.from < n && ed.to >= 0 && ed.to < n;
  };

  // Edges with out-of-range endpoints are skipped here and reported by
  // validate(); everything downstream requires a valid instance anyway.
  for (EdgeId e = 0; e < m; ++e) {
    if (!edge_ok(e)) continue;
    out_edges_[edges[e].from].push_back(e);
    if (edges[e].free) {
      free_slot_[e] = static_cast<int>(free_ids_.size());
      free_ids_.push_back(e);
    }
  }

  const int f = num_free();
  free_class_.assign(f, FreeClass::Unconstrained);
  pair_of_slot_.assign(f, -1);
  group_of_slot_.assign(f, -1);

  std::vector<uint8_t> pair_node(n, 0);
  for (int pi = 0; pi < static_cast<int>(exclusivity.size()); ++pi) {
    const EdgeId a = exclusivity[pi][0];
    const EdgeId b = exclusivity[pi][1];
    if (a < 0 || a >= m || b < 0 || b >= m || a == b) continue;
    if (!edge_ok(a) || !edge_ok(b)) continue;
    const int sa = free_slot_[a];
    const int sb = free_slot_[b];
    if (sa < 0 || sb < 0) continue;
    free_class_[sa] = FreeClass::Paired;
    free_class_[sb] = FreeClass::Paired;
    pair_of_slot_[sa] = pi;
    pair_of_slot_[sb] = pi;
    if (edges[a].from == edges[b].from) pair_node[edges[a].from] = 1;
  }

  // Remaining free edges of all-free nodes obey a choose-one rule as a group.
  for (NodeId v = 0; v < n; ++v) {
    if (pair_node[v]) continue;
    const auto& out = out_edges_[v];
    if (out.empty()) continue;
    bool all_free = true;
    for (EdgeId e : out) all_free = all_free && edges[e].free;
    if (!all_free) continue;
    std::vector<int> slots;
    for (EdgeId e : out) {
      const int s = free_slot_[e];
      if (s >= 0 && free_class_[s] != FreeClass::Paired) slots.push_back(s);
    }
    if (slots.empty()) continue;
    const int g = static_cast<int>(groups_.size());
    for (int s : slots) {
      free_class_[s] = FreeClass::Grouped;
      group_of_slot_[s] = g;
    }
    groups_.push_back(std::move(slots));
    group_nodes_.push_back(v);
  }

  finalized_ = true;
}

bool core_equal(const GproInstance& a, const GproInstance& b) {
  return a.names == b.names && a.v_s == b.v_s && a.v_t == b.v_t &&
         a.edges == b.edges && a.exclusivity == b.exclusivity &&
         a.zapping == b.zapping;
}

uint64_t policy_mask(const Policy& p) {
  if (p.active.size() > 64) throw std::length_error("policy_mask: more than 64 free edges");
  uint64_t mask = 0;
  for (size_t i = 0; i < p.active.size(); ++i)
    if (p.active[i]) mask |= uint64_t{1} << i;
  return mask;
}

std::string policy_bits(const Policy& p) {
  std::string s(p.active.size(), '0');
  for (size_t i = 0; i < p.active.size(); ++i)
    if (p.active[i]) s[i] = '1';
  return s;
}

bool feasible(const GproInstance& inst, const Policy& p) {
  if (static_cast<int>(p.active.size()) != inst.num_free()) return false;
  for (const auto& pr : inst.exclusivity) {
    const int sa = pr[0] >= 0 && pr[0] < inst.num_edges() ? inst.free_slot(pr[0]) : -1;
    const int sb = pr[1] >= 0 && pr[1] < inst.num_edges() ? inst.free_slot(pr[1]) : -1;
    if (sa < 0 || sb < 0) return false;
    if (p.active[sa] + p.active[sb] != 1) return false;
  }
  for (const auto& g : inst.groups()) {
    int on = 0;
    for (int s : g) on += p.active[s];
    if (on != 1) return false;
  }
  return true;
}

Policy all_active_policy(const GproInstance& inst) {
  Policy p;
  p.active.assign(inst.num_free(), 1);
  for (const auto& pr : inst.exclusivity) {
    const int sa = inst.free_slot(pr[0]);
    const int sb = inst.free_slot(pr[1]);
    if (sa < 0 || sb < 0) continue;
    if (pr[0] <= pr[1]) p.active[sb] = 0; else p.active[sa] = 0;
  }
  for (const auto& g : inst.groups())
    for (size_t i = 1; i < g.size(); ++i) p.active[g[i]] = 0;
  return p;
}

Policy random_feasible_policy(const GproInstance& inst, Rng& rng) {
  Policy p;
  p.active.assign(inst.num_free(), 0);
  for (int s = 0; s < inst.num_free(); ++s)
    if (inst.free_class(s) == FreeClass::Unconstrained) p.active[s] = rng.chance(0.5) ? 1 : 0;
  for (const auto& pr : inst.exclusivity) {
    const int sa = inst.free_slot(pr[0]);
    const int sb = inst.free_slot(pr[1]);
    if (sa < 0 || sb < 0) continue;
    p.active[rng.chance(0.5) ? sa : sb] = 1;
  }
  for (const auto& g : inst.groups()) p.active[g[rng.below(g.size())]] = 1;
  return p;
}

namespace {

// Greatest fixpoint of "can stay trapped": start from all nodes except v_t
// and discard any node that escapes no matter which feasible policy is
// chosen, i.e. a fixed edge leaves the set, or some exactly-one constraint
// (pair or group) at the node has every member edge leaving the set. What
// survives is exactly the set of nodes some feasible policy strands.
std::vector<NodeId> trapped_nodes(const GproInstance& inst) {
  const int n = inst.num_nodes();
  std::vector<uint8_t> in_set(n, 1);
  if (inst.v_t >= 0 && inst.v_t < n) in_set[inst.v_t] = 0;

  // constraint edge-sets per node: declared pairs and all-free groups
  std::vector<std::vector<std::vector<EdgeId>>> constraints(n);
  for (const auto& pr : inst.exclusivity) {
    const int sa = pr[0] >= 0 && pr[0] < inst.num_edges() ? inst.free_slot(pr[0]) : -1;
    const int sb = pr[1] >= 0 && pr[1] < inst.num_edges() ? inst.free_slot(pr[1]) : -1;
    if (sa < 0 || sb < 0) continue;
    if (inst.edges[pr[0]].from != inst.edges[pr[1]].from) continue;
    constraints[inst.edges[pr[0]].from].push_back({pr[0], pr[1]});
  }
  for (size_t g = 0; g < inst.groups().size(); ++g) {
    std::vector<EdgeId> ids;
    for (int s : inst.groups()[g]) ids.push_back(inst.free_ids()[s]);
    constraints[inst.group_node(static_cast<int>(g))].push_back(std::move(ids));
  }

  bool changed = true;
  while (changed) {
    changed = false;
    for (NodeId v = 0; v < n; ++v) {
      if (!in_set[v]) continue;
      bool escapes = false;
      for (EdgeId e : inst.out_edges(v)) {
        if (!inst.edges[e].free && !in_set[inst.edges[e].to]) {
          escapes = true;
          break;
        }
      }
      if (!escapes) {
        for (const auto& cs : constraints[v]) {
          bool all_out = true;
          for (EdgeId e : cs) all_out = all_out && !in_set[inst.edges[e].to];
          if (all_out) {
            escapes = true;
            break;
          }
        }
      }
      if (escapes) {
        in_set[v] = 0;
        changed = true;
      }
    }
  }

  std::vector<NodeId> trapped;
  for (NodeId v = 0; v < n; ++v)
    if (in_set[v]) trapped.push_back(v);
  return trapped;
}

}  // namespace

std::vector<Violation> validate(const GproInstance& inst) {
  std::vector<Violation> out;
  auto add = [&](const char* code, std::string detail, NodeId node = -1, EdgeId edge = -1) {
    out.push_back({code, std::move(detail), node, edge});
  };

  if (!inst.finalized()) {
    add("not-finalized", "finalize() was not called after construction");
    return out;
  }
  const int n = inst.num_nodes();
  const int m = inst.num_edges();
  if (n == 0) {
    add("empty", "instance has no nodes");
    return out;
  }

  bool ids_ok = true;
  if (inst.v_s < 0 || inst.v_s >= n) {
    add("bad-start", "v_s out of range", inst.v_s);
    ids_ok = false;
  }
  if (inst.v_t < 0 || inst.v_t >= n) {
    add("bad-target", "v_t out of range", inst.v_t);
    ids_ok = false;
  } else if (inst.v_s == inst.v_t) {
    add("bad-target", "v_s and v_t must be distinct nodes", inst.v_t);
    ids_ok = false;
  }

  std::set<std::pair<NodeId, NodeId>> seen;
  bool edges_ok = true;
  for (EdgeId e = 0; e < m; ++e) {
    const Edge& ed = inst.edges[e];
    if (ed.from < 0 || ed.from >= n || ed.to < 0 || ed.to >= n) {
      add("edge-range", "edge endpoint out of range", -1, e);
      edges_ok = false;
      continue;
    }
    if (!std::isfinite(ed.weight) || ed.weight <= 0.0) {
      add(ed.weight < 0.0 ? "negative-weight" : "bad-weight",
          "edge weight must be positive and finite", ed.from, e);
    }
    if (!std::isfinite(ed.cost) || ed.cost < 0.0) {
      add("bad-cost", "edge cost must be nonnegative and finite", ed.from, e);
    }
    if (!seen.insert({ed.from, ed.to}).second) {
      add("duplicate-edge", "parallel edge between the same endpoints", ed.from, e);
    }
  }

  if (ids_ok && edges_ok) {
    const auto& tout = inst.out_edges(inst.v_t);
    if (tout.size() != 1 || inst.edges[tout[0]].to != inst.v_t) {
      add("target-not-absorbing",
          "v_t must have exactly one outgoing edge, a self-loop", inst.v_t);
    } else {
      const Edge& loop = inst.edges[tout[0]];
      if (loop.cost != 0.0)
        add("target-loop-cost", "the v_t self-loop must have cost 0", inst.v_t, tout[0]);
      if (loop.free)
        add("target-loop-free", "the v_t self-loop must be a fixed edge", inst.v_t, tout[0]);
    }
    for (EdgeId e = 0; e < m; ++e) {
      if (inst.edges[e].to == inst.v_s)
        add("start-has-incoming", "v_s must have no incoming edges", inst.v_s, e);
    }
  }

  std::vector<int> pair_uses(std::max(m, 1), 0);
  for (size_t pi = 0; pi < inst.exclusivity.size(); ++pi) {
    const EdgeId a = inst.exclusivity[pi][0];
    const EdgeId b = inst.exclusivity[pi][1];
    if (a < 0 || a >= m || b < 0 || b >= m || a == b) {
      add("bad-exclusivity", "pair members must be two distinct edge ids");
      continue;
    }
    ++pair_uses[a];
    ++pair_uses[b];
    if (!inst.edges[a].free || !inst.edges[b].free) {
      add("bad-exclusivity", "pair members must be free edges", -1, inst.edges[a].free ? b : a);
      continue;
    }
    if (!edges_ok) continue;
    if (inst.edges[a].from != inst.edges[b].from) {
      add("bad-exclusivity", "pair members must leave the same node", inst.edges[a].from, b);
      continue;
    }
    const NodeId v = inst.edges[a].from;
    const auto& o = inst.out_edges(v);
    const bool shape_ok = o.size() == 2 && inst.edges[o[0]].free && inst.edges[o[1]].free;
    if (!shape_ok)
      add("bad-exclusivity", "a pair node must have exactly two outgoing edges, both free", v);
  }
  for (EdgeId e = 0; e < m; ++e) {
    if (pair_uses[e] > 1)
      add("bad-exclusivity", "edge belongs to more than one pair", -1, e);
  }

  if (inst.zapping) {
    const double c = *inst.zapping;
    if (!std::isfinite(c) || c < 0.0 || c >= 1.0)
      add("bad-zapping", "zapping probability must lie in [0, 1)");
  }

  if (edges_ok) {
    for (NodeId v = 0; v < n; ++v) {
      if (inst.out_edges(v).empty())
        add("no-out-edge", "node has no outgoing edge", v);
    }
  }

  // With zapping the walk restarts over all nodes, v_t included, so it can
  // never be trapped; without it, look for policy-reachable trap sets.
  const bool zapped = inst.zapping && *inst.zapping > 0.0;
  if (ids_ok && edges_ok && !zapped) {
    for (NodeId v : trapped_nodes(inst))
      add("properness", "some feasible policy cuts this node off from v_t", v);
  }

  return out;
}

SupportGraph repair_dangling(SupportGraph g, RepairMode mode) {
  const int n = g.num_nodes();
  std::vector<int> out_deg(n, 0);
  for (const Edge& e : g.edges)
    if (e.from >= 0 && e.from < n) ++out_deg[e.from];
  for (NodeId v = 0; v < n; ++v) {
    if (out_deg[v] > 0) continue;
    if (mode == RepairMode::SelfLoop) {
      g.edges.push_back({v, v, 1.0, 1.0, false});
    } else {
      for (NodeId u = 0; u < n; ++u)
        if (u != v) g.edges.push_back({v, u, 1.0, 1.0, false});
    }
  }
  return g;
}

SplitResult split_target(const SupportGraph& g) {
  const int n = g.num_nodes();
  if (g.target < 0 || g.target >= n)
    throw std::invalid_argument("split_target: target out of range");
  int out_deg = 0;
  int in_deg = 0;
  for (const Edge& e : g.edges) {
    if (e.from == g.target) ++out_deg;
    if (e.to == g.target) ++in_deg;
  }
  if (out_deg == 0) throw std::invalid_argument("split_target: target has no outgoing edge");
  if (in_deg == 0) throw std::invalid_argument("split_target: target has no incoming edge");

  const std::string base = g.names[g.target];
  GproInstance inst;
  inst.names = g.names;
  inst.names[g.target] = base + ":s";
  inst.names.push_back(base + ":t");
  inst.v_s = g.target;
  inst.v_t = n;
  inst.edges.reserve(g.edges.size() + 1);
  for (const Edge& e : g.edges) {
    Edge ne = e;
    if (ne.to == g.target) ne.to = n;
    inst.edges.push_back(ne);
  }
  inst.edges.push_back({n, n, 1.0, 0.0, false});
  inst.finalize();

  SplitResult res;
  res.instance = std::move(inst);
  res.node_map.resize(n);
  for (int i = 0; i < n; ++i) res.node_map[i] = i;
  return res;
}

GproInstance canonical_pro(GproInstance inst) {
  for (Edge& e : inst.edges) {
    e.weight = 1.0;
    e.cost = e.from == inst.v_t ? 0.0 : 1.0;
  }
  inst.finalize();
  return inst;
}

GproInstance epsilon_exclusivity_emulation(const GproInstance& inst, int pair_index, double eps) {
  if (!std::isfinite(eps) || eps <= 0.0)
    throw std::invalid_argument("epsilon_exclusivity_emulation: eps must be positive");
  if (pair_index < 0 || pair_index >= static_cast<int>(inst.exclusivity.size()))
    throw std::invalid_argument("epsilon_exclusivity_emulation: no such pair");
  GproInstance out = inst;
  const EdgeId a = out.exclusivity[pair_index][0];
  const EdgeId b = out.exclusivity[pair_index][1];
  out.edges[a].weight = 1.0;
  out.edges[b].weight = eps;
  out.edges[b].free = false;
  out.exclusivity.erase(out.exclusivity.begin() + pair_index);
  out.finalize();
  return out;
}

double feasible_policy_count(const GproInstance& inst) {
  int unconstrained = 0;
  for (int s = 0; s < inst.num_free(); ++s)
    if (inst.free_class(s) == FreeClass::Unconstrained) ++unconstrained;
  double count = std::ldexp(1.0, unconstrained);
  count *= std::ldexp(1.0, static_cast<int>(inst.exclusivity.size()));
  for (const auto& g : inst.groups()) count *= static_cast<double>(g.size());
  return count;
}

}  // namespace pro
