#include "pro/reductions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "pro/tolerances.hpp"

namespace pro {

namespace {

bool deterministic(const SspAction& a) {
  return a.out.size() == 1 && std::fabs(a.out[0].p - 1.0) <= 1e-12;
}

}  // namespace

// ---------------------------------------------------------------------------
// Step 1: cap the number of actions per state at two.
// ---------------------------------------------------------------------------

std::pair<SspInstance, ChainSplitMap> split_multiaction(const SspInstance& inst) {
  const int n = inst.num_states();
  SspInstance out;
  ChainSplitMap map;
  map.state_map.resize(n);

  for (int s = 0; s < n; ++s) {
    const int k = inst.num_actions(s);
    const int len = std::max(1, k - 1);
    for (int j = 0; j < len; ++j) {
      const int d = static_cast<int>(out.names.size());
      out.names.push_back(len == 1 ? inst.names[s] : inst.names[s] + "#" + std::to_string(j));
      map.state_map[s].push_back(d);
      map.src_state.push_back(s);
      map.chain_pos.push_back(j);
      map.is_tail.push_back(k >= 2 && j == len - 1 ? 1 : 0);
    }
  }
  out.target = map.state_map[inst.target][0];

  out.actions.resize(out.names.size());
  for (int s = 0; s < n; ++s) {
    const int k = inst.num_actions(s);
    const auto& chain = map.state_map[s];
    const int len = static_cast<int>(chain.size());
    auto remap = [&](const SspAction& a) {
      SspAction ra;
      for (const SspTransition& t : a.out) ra.out.push_back({map.state_map[t.to][0], t.p, t.c});
      return ra;
    };
    for (int j = 0; j < len; ++j) {
      std::vector<SspAction>& acts = out.actions[chain[j]];
      if (k == 1) {
        acts.push_back(remap(inst.actions[s][0]));
      } else if (j < len - 1) {
        // one original action now, or continue down the chain for free
        acts.push_back(remap(inst.actions[s][j]));
        SspAction cont;
        cont.out.push_back({chain[j + 1], 1.0, 0.0});
        acts.push_back(std::move(cont));
      } else {
        acts.push_back(remap(inst.actions[s][k - 2]));
        acts.push_back(remap(inst.actions[s][k - 1]));
      }
    }
  }
  return {std::move(out), std::move(map)};
}

SspPolicy ChainSplitMap::forward(const SspPolicy& original) const {
  SspPolicy out;
  out.choice.assign(src_state.size(), 0);
  for (int s = 0; s < static_cast<int>(state_map.size()); ++s) {
    const auto& chain = state_map[s];
    const int len = static_cast<int>(chain.size());
    const int pick = original.choice[s];
    for (int j = 0; j < len; ++j) {
      const int d = chain[j];
      if (is_tail[d]) {
        out.choice[d] = pick == len ? 1 : 0;
      } else if (len == 1) {
        out.choice[d] = 0;  // single original action
      } else {
        out.choice[d] = pick > j ? 1 : 0;  // continue while the pick is deeper
      }
    }
  }
  return out;
}

SspPolicy ChainSplitMap::backward(const SspPolicy& derived) const {
  SspPolicy out;
  out.choice.assign(state_map.size(), 0);
  for (int s = 0; s < static_cast<int>(state_map.size()); ++s) {
    const auto& chain = state_map[s];
    const int len = static_cast<int>(chain.size());
    for (int j = 0; j < len; ++j) {
      const int d = chain[j];
      if (is_tail[d]) {
        out.choice[s] = len - 1 + derived.choice[d];
        break;
      }
      if (len == 1) {
        out.choice[s] = 0;
        break;
      }
      if (derived.choice[d] == 0) {
        out.choice[s] = j;
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Step 2: push probability out of the choices.
// ---------------------------------------------------------------------------

std::pair<SspInstance, ProbSplitMap> split_probabilistic(const SspInstance& inst) {
  const int n = inst.num_states();
  for (int s = 0; s < n; ++s)
    if (inst.num_actions(s) > 2)
      throw std::invalid_argument("split_probabilistic: a state still has more than two actions");

  SspInstance out;
  ProbSplitMap map;
  map.state_map.resize(n);

  for (int s = 0; s < n; ++s) {
    const bool split = inst.num_actions(s) == 2 && (!deterministic(inst.actions[s][0]) ||
                                                    !deterministic(inst.actions[s][1]));
    const int base = static_cast<int>(out.names.size());
    if (split) {
      out.names.push_back(inst.names[s]);
      out.names.push_back(inst.names[s] + "'");
      out.names.push_back(inst.names[s] + "\"");
      map.state_map[s] = {base, base + 1, base + 2};
      map.src_state.insert(map.src_state.end(), {s, s, s});
      map.role.insert(map.role.end(), {0, 1, 2});
    } else {
      out.names.push_back(inst.names[s]);
      map.state_map[s] = {base};
      map.src_state.push_back(s);
      map.role.push_back(0);
    }
  }
  out.target = map.state_map[inst.target][0];

  out.actions.resize(out.names.size());
  for (int s = 0; s < n; ++s) {
    auto remap = [&](const SspAction& a) {
      SspAction ra;
      for (const SspTransition& t : a.out) ra.out.push_back({map.state_map[t.to][0], t.p, t.c});
      return ra;
    };
    const auto& states = map.state_map[s];
    if (states.size() == 3) {
      SspAction go0;
      go0.out.push_back({states[1], 1.0, 0.0});
      SspAction go1;
      go1.out.push_back({states[2], 1.0, 0.0});
      out.actions[states[0]] = {std::move(go0), std::move(go1)};
      out.actions[states[1]] = {remap(inst.actions[s][0])};
      out.actions[states[2]] = {remap(inst.actions[s][1])};
    } else {
      for (const SspAction& a : inst.actions[s]) out.actions[states[0]].push_back(remap(a));
    }
  }
  return {std::move(out), std::move(map)};
}

SspPolicy ProbSplitMap::forward(const SspPolicy& original) const {
  SspPolicy out;
  out.choice.assign(src_state.size(), 0);
  for (int s = 0; s < static_cast<int>(state_map.size()); ++s)
    out.choice[state_map[s][0]] = original.choice[s];
  return out;
}

SspPolicy ProbSplitMap::backward(const SspPolicy& derived) const {
  SspPolicy out;
  out.choice.assign(state_map.size(), 0);
  for (int s = 0; s < static_cast<int>(state_map.size()); ++s)
    out.choice[s] = derived.choice[state_map[s][0]];
  return out;
}

// ---------------------------------------------------------------------------
// Step 3: normalized control problem -> instance.
// ---------------------------------------------------------------------------

std::pair<GproInstance, SspGproMap> normalized_ssp_to_gpro(const SspInstance& inst) {
  const int n = inst.num_states();
  if (inst.target < 0 || inst.target >= n)
    throw std::invalid_argument("normalized_ssp_to_gpro: bad target");
  for (int s = 0; s < n; ++s) {
    const int k = inst.num_actions(s);
    if (k == 0) throw std::invalid_argument("normalized_ssp_to_gpro: state without actions");
    if (k > 2)
      throw std::invalid_argument("normalized_ssp_to_gpro: state with more than two actions");
    if (k == 2 && (!deterministic(inst.actions[s][0]) || !deterministic(inst.actions[s][1])))
      throw std::invalid_argument("normalized_ssp_to_gpro: probabilistic choice remains");
  }

  GproInstance g;
  SspGproMap map;
  map.num_states = n;
  g.names = inst.names;
  g.v_t = inst.target;
  map.node_of_state.resize(n);
  for (int s = 0; s < n; ++s) map.node_of_state[s] = s;

  for (int s = 0; s < n; ++s) {
    if (s == inst.target) continue;
    if (inst.num_actions(s) == 1) {
      for (const SspTransition& t : inst.actions[s][0].out)
        g.edges.push_back({s, t.to, t.p, t.c, false});
      continue;
    }
    const SspTransition t0 = inst.actions[s][0].out[0];
    const SspTransition t1 = inst.actions[s][1].out[0];
    SspGproMap::PairEntry pe;
    pe.state = s;
    const EdgeId e0 = static_cast<EdgeId>(g.edges.size());
    g.edges.push_back({s, t0.to, 1.0, t0.c, true});
    EdgeId e1;
    if (t1.to == t0.to) {
      // keep the two choices as distinct edges via a zero-cost relay
      const NodeId relay = static_cast<NodeId>(g.names.size());
      g.names.push_back(inst.names[s] + ":alt");
      pe.relay = relay;
      e1 = static_cast<EdgeId>(g.edges.size());
      g.edges.push_back({s, relay, 1.0, t1.c, true});
      g.edges.push_back({relay, t1.to, 1.0, 0.0, false});
    } else {
      e1 = static_cast<EdgeId>(g.edges.size());
      g.edges.push_back({s, t1.to, 1.0, t1.c, true});
    }
    pe.pair_index = static_cast<int>(g.exclusivity.size());
    g.exclusivity.push_back({e0, e1});
    map.pairs.push_back(pe);
  }

  g.edges.push_back({inst.target, inst.target, 1.0, 0.0, false});

  // fresh start node fanning out to every state node at zero cost; its
  // hitting time averages the state values and spends no cost itself
  const NodeId vs = static_cast<NodeId>(g.names.size());
  g.names.push_back("start");
  g.v_s = vs;
  bool any = false;
  for (int s = 0; s < n; ++s) {
    if (s == inst.target) continue;
    g.edges.push_back({vs, s, 1.0, 0.0, false});
    any = true;
  }
  if (!any) g.edges.push_back({vs, inst.target, 1.0, 0.0, false});
  g.finalize();

  map.total_free = g.num_free();
  for (auto& pe : map.pairs) {
    pe.slot0 = g.free_slot(g.exclusivity[pe.pair_index][0]);
    pe.slot1 = g.free_slot(g.exclusivity[pe.pair_index][1]);
  }
  return {std::move(g), std::move(map)};
}

Policy SspGproMap::forward(const SspPolicy& policy) const {
  Policy p;
  p.active.assign(total_free, 0);
  for (const auto& pe : pairs) p.active[policy.choice[pe.state] == 0 ? pe.slot0 : pe.slot1] = 1;
  return p;
}

SspPolicy SspGproMap::backward(const Policy& policy) const {
  SspPolicy out;
  out.choice.assign(num_states, 0);
  for (const auto& pe : pairs) out.choice[pe.state] = policy.active[pe.slot0] ? 0 : 1;
  return out;
}

SspToGproResult ssp_to_gpro(const SspInstance& inst) {
  SspToGproResult res;
  auto step1 = split_multiaction(inst);
  auto step2 = split_probabilistic(step1.first);
  auto step3 = normalized_ssp_to_gpro(step2.first);
  res.instance = std::move(step3.first);
  res.chain = std::move(step1.second);
  res.prob = std::move(step2.second);
  res.map = std::move(step3.second);
  res.value_node.resize(inst.num_states());
  for (int s = 0; s < inst.num_states(); ++s)
    res.value_node[s] = res.map.node_of_state[res.prob.state_map[res.chain.state_map[s][0]][0]];
  return res;
}

Policy SspToGproResult::forward(const SspPolicy& original) const {
  return map.forward(prob.forward(chain.forward(original)));
}

SspPolicy SspToGproResult::backward(const Policy& policy) const {
  return chain.backward(prob.backward(map.backward(policy)));
}

// ---------------------------------------------------------------------------
// Instance -> control problem, retry-gadget encoding.
// ---------------------------------------------------------------------------

std::pair<SspInstance, GproSspMap> gpro_to_ssp(const GproInstance& inst) {
  if (inst.zapping && *inst.zapping > 0.0)
    throw std::invalid_argument(
        "gpro_to_ssp: zapping cannot ride through retry gadgets, the restart rate per real "
        "step would depend on the policy; use gpro_to_ssp_direct instead");
  const int n = inst.num_nodes();

  SspInstance out;
  GproSspMap map;
  map.slots.resize(inst.num_free());
  out.names = inst.names;

  std::vector<int> aux_of_slot(inst.num_free(), -1);
  for (int s = 0; s < inst.num_free(); ++s) {
    if (inst.free_class(s) != FreeClass::Unconstrained) continue;
    const Edge& e = inst.edges[inst.free_ids()[s]];
    aux_of_slot[s] = static_cast<int>(out.names.size());
    out.names.push_back(inst.names[e.from] + ">" + inst.names[e.to]);
  }
  out.target = inst.v_t;
  map.target_state = inst.v_t;
  map.num_states = static_cast<int>(out.names.size());

  std::vector<int> group_of_node(n, -1);
  for (int g = 0; g < static_cast<int>(inst.groups().size()); ++g)
    group_of_node[inst.group_node(g)] = g;

  out.actions.resize(out.names.size());
  for (NodeId v = 0; v < n; ++v) {
    if (v == inst.v_t) {
      SspAction loop;
      loop.out.push_back({v, 1.0, 0.0});
      out.actions[v] = {std::move(loop)};
      continue;
    }

    if (group_of_node[v] >= 0) {
      const auto& slots = inst.groups()[group_of_node[v]];
      for (int i = 0; i < static_cast<int>(slots.size()); ++i) {
        const Edge& e = inst.edges[inst.free_ids()[slots[i]]];
        SspAction a;
        a.out.push_back({e.to, 1.0, e.cost});
        out.actions[v].push_back(std::move(a));
        map.slots[slots[i]] = {2, v, i};
      }
      continue;
    }

    const auto& oe = inst.out_edges(v);
    const bool pair_node = oe.size() == 2 && inst.edges[oe[0]].free && inst.edges[oe[1]].free &&
                           inst.free_class(inst.free_slot(oe[0])) == FreeClass::Paired &&
                           inst.free_class(inst.free_slot(oe[1])) == FreeClass::Paired;
    if (pair_node) {
      const int pi = inst.pair_of(inst.free_slot(oe[0]));
      for (int i = 0; i < 2; ++i) {
        const EdgeId eid = inst.exclusivity[pi][i];
        const Edge& e = inst.edges[eid];
        SspAction a;
        a.out.push_back({e.to, 1.0, e.cost});
        out.actions[v].push_back(std::move(a));
        map.slots[inst.free_slot(eid)] = {1, v, i};
      }
      continue;
    }

    // node with fixed edges and possibly unconstrained free edges: one action
    // whose mass enters the retry state of each free edge in proportion to
    // its weight, active or not
    double wtot = 0.0;
    for (EdgeId e : oe) wtot += inst.edges[e].weight;
    SspAction a;
    for (EdgeId e : oe) {
      const Edge& ed = inst.edges[e];
      if (ed.free)
        a.out.push_back({aux_of_slot[inst.free_slot(e)], ed.weight / wtot, 0.0});
      else
        a.out.push_back({ed.to, ed.weight / wtot, ed.cost});
    }
    out.actions[v] = {std::move(a)};
  }

  for (int s = 0; s < inst.num_free(); ++s) {
    if (aux_of_slot[s] < 0) continue;
    const Edge& e = inst.edges[inst.free_ids()[s]];
    SspAction on;
    on.out.push_back({e.to, 1.0, e.cost});
    SspAction off;
    off.out.push_back({e.from, 1.0, 0.0});
    out.actions[aux_of_slot[s]] = {std::move(on), std::move(off)};
    map.slots[s] = {0, aux_of_slot[s], 0};
  }

  return {std::move(out), std::move(map)};
}

SspPolicy GproSspMap::forward(const Policy& policy) const {
  SspPolicy out;
  out.choice.assign(num_states, 0);
  for (size_t s = 0; s < slots.size(); ++s) {
    const SlotDecision& sd = slots[s];
    if (sd.kind == 0)
      out.choice[sd.state] = policy.active[s] ? 0 : 1;
    else if (policy.active[s])
      out.choice[sd.state] = sd.action_on;
  }
  return out;
}

Policy GproSspMap::backward(const SspPolicy& policy) const {
  Policy p;
  p.active.assign(slots.size(), 0);
  for (size_t s = 0; s < slots.size(); ++s) {
    const SlotDecision& sd = slots[s];
    if (sd.kind == 0)
      p.active[s] = policy.choice[sd.state] == 0;
    else
      p.active[s] = policy.choice[sd.state] == sd.action_on;
  }
  return p;
}

// ---------------------------------------------------------------------------
// Instance -> control problem, local-subset encoding.
// ---------------------------------------------------------------------------

std::pair<SspInstance, GproSspDirectMap> gpro_to_ssp_direct(const GproInstance& inst,
                                                            const EvalOptions& opts) {
  const int n = inst.num_nodes();
  const double c = inst.zapping ? *inst.zapping : 0.0;
  const bool zapped = c > 0.0;
  const double scale = zapped ? 1.0 - c : 1.0;
  const int nz = opts.zap_excludes_target ? n - 1 : n;

  GproSspDirectMap map;
  map.num_states = n;
  map.num_free = inst.num_free();
  map.node_slots.resize(n);
  map.action_mask.resize(n);

  std::vector<int> group_of_node(n, -1);
  for (int g = 0; g < static_cast<int>(inst.groups().size()); ++g)
    group_of_node[inst.group_node(g)] = g;

  SspInstance out;
  out.names = inst.names;
  out.target = inst.v_t;
  out.actions.resize(n);

  for (NodeId v = 0; v < n; ++v) {
    if (v == inst.v_t) {
      SspAction loop;
      loop.out.push_back({v, 1.0, 0.0});
      out.actions[v] = {std::move(loop)};
      continue;
    }

    std::vector<int>& ls = map.node_slots[v];
    for (EdgeId e : inst.out_edges(v))
      if (inst.edges[e].free) ls.push_back(inst.free_slot(e));
    const int u = static_cast<int>(ls.size());

    std::vector<uint32_t> masks;
    if (!ls.empty() && group_of_node[v] >= 0) {
      for (int i = 0; i < u; ++i) masks.push_back(uint32_t{1} << i);
    } else if (!ls.empty() && inst.free_class(ls[0]) == FreeClass::Paired) {
      masks = {uint32_t{1}, uint32_t{2}};
    } else {
      if (u > 20)
        throw std::length_error("gpro_to_ssp_direct: more than 20 free switches at one node");
      for (uint32_t m = 0; m < (uint32_t{1} << u); ++m) masks.push_back(m);
    }

    for (uint32_t mask : masks) {
      double wsum = 0.0;
      for (EdgeId e : inst.out_edges(v)) {
        const Edge& ed = inst.edges[e];
        if (!ed.free) {
          wsum += ed.weight;
          continue;
        }
        const auto pos = std::find(ls.begin(), ls.end(), inst.free_slot(e)) - ls.begin();
        if (mask & (uint32_t{1} << pos)) wsum += ed.weight;
      }
      // exactly-one masks always activate an edge; all-off subsets at a node
      // without fixed edges cannot arise because such nodes are all-free
      std::map<int, std::pair<double, double>> agg;  // to -> (p, cost mass)
      if (wsum > 0.0) {
        for (EdgeId e : inst.out_edges(v)) {
          const Edge& ed = inst.edges[e];
          if (ed.free) {
            const auto pos = std::find(ls.begin(), ls.end(), inst.free_slot(e)) - ls.begin();
            if (!(mask & (uint32_t{1} << pos))) continue;
          }
          const double p = scale * ed.weight / wsum;
          agg[ed.to].first += p;
          agg[ed.to].second += p * ed.cost;
        }
      }
      if (zapped) {
        for (NodeId t = 0; t < n; ++t) {
          if (opts.zap_excludes_target && t == inst.v_t) continue;
          agg[t].first += c / nz;
          agg[t].second += (c / nz) * tol::kZapStepCost;
        }
      }
      SspAction a;
      for (const auto& [to, pm] : agg)
        a.out.push_back({to, pm.first, pm.second / pm.first});
      out.actions[v].push_back(std::move(a));
      map.action_mask[v].push_back(mask);
    }
  }
  return {std::move(out), std::move(map)};
}

SspPolicy GproSspDirectMap::forward(const Policy& policy) const {
  SspPolicy out;
  out.choice.assign(num_states, 0);
  for (int v = 0; v < num_states; ++v) {
    const auto& ls = node_slots[v];
    if (ls.empty()) continue;
    uint32_t mask = 0;
    for (size_t i = 0; i < ls.size(); ++i)
      if (policy.active[ls[i]]) mask |= uint32_t{1} << i;
    const auto& am = action_mask[v];
    const auto it = std::find(am.begin(), am.end(), mask);
    if (it == am.end())
      throw std::invalid_argument("policy violates the exactly-one constraints");
    out.choice[v] = static_cast<int>(it - am.begin());
  }
  return out;
}

Policy GproSspDirectMap::backward(const SspPolicy& policy) const {
  Policy p;
  p.active.assign(num_free, 0);
  for (int v = 0; v < num_states; ++v) {
    const auto& ls = node_slots[v];
    if (ls.empty()) continue;
    const uint32_t mask = action_mask[v][policy.choice[v]];
    for (size_t i = 0; i < ls.size(); ++i)
      if (mask & (uint32_t{1} << i)) p.active[ls[i]] = 1;
  }
  return p;
}

// ---------------------------------------------------------------------------
// JSON exports.
// ---------------------------------------------------------------------------

using nlohmann::json;

json to_json(const ChainSplitMap& map) {
  json j;
  j["state_map"] = map.state_map;
  j["src_state"] = map.src_state;
  j["chain_pos"] = map.chain_pos;
  j["is_tail"] = map.is_tail;
  return j;
}

json to_json(const ProbSplitMap& map) {
  json j;
  j["state_map"] = map.state_map;
  j["src_state"] = map.src_state;
  j["role"] = map.role;
  return j;
}

json to_json(const SspGproMap& map) {
  json j;
  j["node_of_state"] = map.node_of_state;
  j["v_s"] = map.v_s;
  j["total_free"] = map.total_free;
  json pairs = json::array();
  for (const auto& pe : map.pairs) {
    pairs.push_back({{"state", pe.state},
                     {"pair_index", pe.pair_index},
                     {"slot0", pe.slot0},
                     {"slot1", pe.slot1},
                     {"relay", pe.relay}});
  }
  j["pairs"] = std::move(pairs);
  return j;
}

json to_json(const GproSspMap& map) {
  json j;
  j["num_states"] = map.num_states;
  j["target_state"] = map.target_state;
  json slots = json::array();
  for (const auto& sd : map.slots)
    slots.push_back({{"kind", sd.kind}, {"state", sd.state}, {"action_on", sd.action_on}});
  j["slots"] = std::move(slots);
  return j;
}

json to_json(const GproSspDirectMap& map) {
  json j;
  j["num_states"] = map.num_states;
  j["num_free"] = map.num_free;
  j["node_slots"] = map.node_slots;
  j["action_mask"] = map.action_mask;
  return j;
}

}  // namespace pro
