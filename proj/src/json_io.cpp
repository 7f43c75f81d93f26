#include "pro/json_io.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace pro {

using nlohmann::json;

namespace {

// Numeric fields may arrive as JSON numbers or as decimal strings; the
// latter keeps hand-written fixtures exact and diff-friendly.
double as_number(const json& v, const char* what) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(s, &used);
    } catch (const std::exception&) {
      throw std::runtime_error(std::string("bad decimal string for ") + what + ": \"" + s + "\"");
    }
    if (used != s.size())
      throw std::runtime_error(std::string("bad decimal string for ") + what + ": \"" + s + "\"");
    return x;
  }
  throw std::runtime_error(std::string("expected number or decimal string for ") + what);
}

int as_int(const json& v, const char* what) {
  if (!v.is_number_integer())
    throw std::runtime_error(std::string("expected integer for ") + what);
  return v.get<int>();
}

}  // namespace

json to_json(const GproInstance& inst) {
  json j;
  j["nodes"] = inst.names;
  j["v_s"] = inst.v_s;
  j["v_t"] = inst.v_t;
  json edges = json::array();
  for (const Edge& e : inst.edges) {
    edges.push_back({{"from", e.from},
                     {"to", e.to},
                     {"weight", e.weight},
                     {"cost", e.cost},
                     {"free", e.free}});
  }
  j["edges"] = std::move(edges);
  json pairs = json::array();
  for (const auto& pr : inst.exclusivity) pairs.push_back({pr[0], pr[1]});
  j["exclusivity"] = std::move(pairs);
  if (inst.zapping)
    j["zapping"] = *inst.zapping;
  else
    j["zapping"] = nullptr;
  return j;
}

GproInstance instance_from_json(const json& j) {
  GproInstance inst;
  if (!j.is_object()) throw std::runtime_error("instance: expected a JSON object");
  const auto& nodes = j.at("nodes");
  if (!nodes.is_array()) throw std::runtime_error("instance: \"nodes\" must be an array");
  for (const auto& v : nodes) {
    if (v.is_string())
      inst.names.push_back(v.get<std::string>());
    else
      inst.names.push_back(v.dump());
  }
  inst.v_s = as_int(j.at("v_s"), "v_s");
  inst.v_t = as_int(j.at("v_t"), "v_t");
  const auto& edges = j.at("edges");
  if (!edges.is_array()) throw std::runtime_error("instance: \"edges\" must be an array");
  for (const auto& je : edges) {
    Edge e;
    e.from = as_int(je.at("from"), "edge from");
    e.to = as_int(je.at("to"), "edge to");
    if (je.contains("weight")) e.weight = as_number(je.at("weight"), "edge weight");
    if (je.contains("cost")) e.cost = as_number(je.at("cost"), "edge cost");
    if (je.contains("free")) {
      if (!je.at("free").is_boolean()) throw std::runtime_error("instance: edge \"free\" must be boolean");
      e.free = je.at("free").get<bool>();
    }
    inst.edges.push_back(e);
  }
  if (j.contains("exclusivity")) {
    const auto& pairs = j.at("exclusivity");
    if (!pairs.is_array()) throw std::runtime_error("instance: \"exclusivity\" must be an array");
    for (const auto& jp : pairs) {
      if (!jp.is_array() || jp.size() != 2)
        throw std::runtime_error("instance: each exclusivity entry is a pair of edge ids");
      inst.exclusivity.push_back({as_int(jp[0], "exclusivity"), as_int(jp[1], "exclusivity")});
    }
  }
  if (j.contains("zapping") && !j.at("zapping").is_null())
    inst.zapping = as_number(j.at("zapping"), "zapping");
  inst.finalize();
  return inst;
}

json to_json(const GproInstance& inst, const Policy& policy) {
  json j;
  json active = json::array();
  for (int s = 0; s < inst.num_free(); ++s)
    if (s < static_cast<int>(policy.active.size()) && policy.active[s])
      active.push_back(inst.free_ids()[s]);
  j["active"] = std::move(active);
  return j;
}

Policy policy_from_json(const GproInstance& inst, const json& j) {
  Policy p;
  p.active.assign(inst.num_free(), 0);
  const auto& active = j.at("active");
  if (!active.is_array()) throw std::runtime_error("policy: \"active\" must be an array of edge ids");
  for (const auto& v : active) {
    const int e = as_int(v, "active edge id");
    if (e < 0 || e >= inst.num_edges())
      throw std::runtime_error("policy: edge id out of range: " + std::to_string(e));
    const int slot = inst.free_slot(e);
    if (slot < 0)
      throw std::runtime_error("policy: edge " + std::to_string(e) + " is not a free edge");
    p.active[slot] = 1;
  }
  return p;
}

json to_json(const SspInstance& inst) {
  json j;
  j["states"] = inst.names;
  j["target"] = inst.target;
  json actions = json::array();
  for (const auto& per_state : inst.actions) {
    json acts = json::array();
    for (const SspAction& a : per_state) {
      json outs = json::array();
      for (const SspTransition& t : a.out)
        outs.push_back({{"to", t.to}, {"p", t.p}, {"c", t.c}});
      acts.push_back(std::move(outs));
    }
    actions.push_back(std::move(acts));
  }
  j["actions"] = std::move(actions);
  return j;
}

SspInstance ssp_from_json(const json& j) {
  SspInstance inst;
  const auto& states = j.at("states");
  if (!states.is_array()) throw std::runtime_error("ssp: \"states\" must be an array");
  for (const auto& v : states) inst.names.push_back(v.is_string() ? v.get<std::string>() : v.dump());
  inst.target = as_int(j.at("target"), "target");
  const auto& actions = j.at("actions");
  if (!actions.is_array() || actions.size() != inst.names.size())
    throw std::runtime_error("ssp: \"actions\" must list one action array per state");
  for (const auto& per_state : actions) {
    std::vector<SspAction> acts;
    if (!per_state.is_array()) throw std::runtime_error("ssp: per-state actions must be an array");
    for (const auto& ja : per_state) {
      SspAction a;
      if (!ja.is_array()) throw std::runtime_error("ssp: an action is an array of transitions");
      for (const auto& jt : ja) {
        SspTransition t;
        t.to = as_int(jt.at("to"), "transition to");
        t.p = as_number(jt.at("p"), "transition p");
        t.c = as_number(jt.at("c"), "transition c");
        a.out.push_back(t);
      }
      acts.push_back(std::move(a));
    }
    inst.actions.push_back(std::move(acts));
  }
  return inst;
}

json to_json(const SspPolicy& policy) {
  json j;
  j["choice"] = policy.choice;
  return j;
}

SspPolicy ssp_policy_from_json(const json& j) {
  SspPolicy p;
  const auto& choice = j.at("choice");
  if (!choice.is_array()) throw std::runtime_error("ssp policy: \"choice\" must be an array");
  for (const auto& v : choice) p.choice.push_back(as_int(v, "choice"));
  return p;
}

json to_json(const GproInstance& inst, const PriTrace& trace) {
  json j;
  j["iterations"] = trace.switch_count;
  j["evaluations"] = trace.iteration_count;
  j["termination"] = trace.termination == Termination::Converged ? "converged" : "guard";
  j["objective"] = trace.objective;
  json iterates = json::array();
  for (const PriIterate& it : trace.iterates) {
    json row;
    row["policy"] = to_json(inst, it.policy)["active"];
    row["phi"] = it.phi;
    row["switched"] = it.switched;
    iterates.push_back(std::move(row));
  }
  j["iterates"] = std::move(iterates);
  return j;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& ex) {
    throw std::runtime_error(path + ": " + ex.what());
  }
  return j;
}

void save_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

GproInstance load_instance(const std::string& path) {
  try {
    return instance_from_json(load_json(path));
  } catch (const std::exception& ex) {
    throw std::runtime_error(path + ": " + ex.what());
  }
}

SspInstance load_ssp(const std::string& path) {
  try {
    return ssp_from_json(load_json(path));
  } catch (const std::exception& ex) {
    throw std::runtime_error(path + ": " + ex.what());
  }
}

}  // namespace pro
