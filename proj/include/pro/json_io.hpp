#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "pro/gpro.hpp"
#include "pro/pri.hpp"
#include "pro/ssp.hpp"

namespace pro {

// Instance files:
//   { "nodes": ["a", ...], "v_s": 0, "v_t": 3,
//     "edges": [{"from": 0, "to": 1, "weight": 1.0, "cost": 1.0, "free": true}, ...],
//     "exclusivity": [[2, 5], ...], "zapping": null }
// weight/cost also accept decimal strings ("0.15"). Optional fields default:
// weight 1, cost 1, free false, exclusivity [], zapping null.
nlohmann::json to_json(const GproInstance& inst);
GproInstance instance_from_json(const nlohmann::json& j);

// Policy files: { "active": [edge ids] }. Conversion needs the instance to
// map edge ids to free slots; unknown or fixed edge ids are rejected.
nlohmann::json to_json(const GproInstance& inst, const Policy& policy);
Policy policy_from_json(const GproInstance& inst, const nlohmann::json& j);

// Control problems:
//   { "states": ["s0", ...], "target": 2,
//     "actions": [ [ [{"to": 1, "p": 0.5, "c": 2.0}, ...], ... ], ... ] }
// p/c accept decimal strings as well.
nlohmann::json to_json(const SspInstance& inst);
SspInstance ssp_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SspPolicy& policy);
SspPolicy ssp_policy_from_json(const nlohmann::json& j);

// Solver trace: per-iterate active edge sets, hitting times, and which edges
// the improvement pass changed. "iterations" counts passes that changed the
// policy; "evaluations" includes the final confirming pass.
nlohmann::json to_json(const GproInstance& inst, const PriTrace& trace);

// File helpers; throw std::runtime_error with the path on IO or parse errors.
nlohmann::json load_json(const std::string& path);
void save_json(const std::string& path, const nlohmann::json& j);

GproInstance load_instance(const std::string& path);
SspInstance load_ssp(const std::string& path);

}  // namespace pro
