#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "pro/gpro.hpp"
#include "pro/hitting_time.hpp"
#include "pro/ssp.hpp"

namespace pro {

// ---------------------------------------------------------------------------
// Control problem -> instance, in three composable steps. Each step carries a
// map that translates policies in both directions and names the state (or
// node) where each original state's value can be read off.
// ---------------------------------------------------------------------------

// Step 1: replace every state having k > 2 actions by a chain of k-1 states.
// Each chain state offers one original action plus a zero-cost "continue"
// hop to the next link; the last link offers the final two original actions.
// The first link carries the original state's value.
struct ChainSplitMap {
  std::vector<std::vector<int>> state_map;  // original -> chain states, front = value carrier
  std::vector<int> src_state;               // derived -> original
  std::vector<int> chain_pos;               // derived -> position in its chain
  std::vector<uint8_t> is_tail;             // derived -> 1 if both actions are original

  SspPolicy forward(const SspPolicy& original) const;
  SspPolicy backward(const SspPolicy& derived) const;
};

std::pair<SspInstance, ChainSplitMap> split_multiaction(const SspInstance& inst);

// Step 2: make every remaining choice deterministic. A 2-action state with a
// probabilistic action becomes a chooser with two zero-cost deterministic
// actions into two single-action branch states that carry the original
// actions. Requires at most two actions per state.
struct ProbSplitMap {
  std::vector<std::vector<int>> state_map;  // original -> {chooser[, branch0, branch1]}
  std::vector<int> src_state;               // derived -> original
  std::vector<int8_t> role;                 // 0 chooser/copy, 1 first branch, 2 second branch

  SspPolicy forward(const SspPolicy& original) const;
  SspPolicy backward(const SspPolicy& derived) const;
};

std::pair<SspInstance, ProbSplitMap> split_probabilistic(const SspInstance& inst);

// Step 3: normalized control problem (single-action states plus two-action
// states with deterministic actions) -> instance. Single-action states copy
// their distribution as fixed edges with weights equal to probabilities;
// two-action states become pair nodes whose two free edges form an
// exclusivity pair; a fresh start node v_s fans out to every state node with
// zero-cost edges. When a two-action state's actions share their successor,
// a relay node keeps the two edges distinct.
struct SspGproMap {
  std::vector<NodeId> node_of_state;
  NodeId v_s = -1;
  int total_free = 0;

  struct PairEntry {
    int state = -1;
    int pair_index = -1;
    int slot0 = -1;  // free slot of the action-0 edge
    int slot1 = -1;
    NodeId relay = -1;  // relay node, if one was needed
  };
  std::vector<PairEntry> pairs;

  Policy forward(const SspPolicy& policy) const;
  SspPolicy backward(const Policy& policy) const;
  int num_states = 0;
};

std::pair<GproInstance, SspGproMap> normalized_ssp_to_gpro(const SspInstance& inst);

// All three steps composed. value_node[s] is the node of the produced
// instance whose hitting time equals state s's cost-to-target.
struct SspToGproResult {
  GproInstance instance;
  ChainSplitMap chain;
  ProbSplitMap prob;
  SspGproMap map;
  std::vector<NodeId> value_node;

  Policy forward(const SspPolicy& original) const;
  SspPolicy backward(const Policy& policy) const;
};

SspToGproResult ssp_to_gpro(const SspInstance& inst);

// ---------------------------------------------------------------------------
// Instance -> control problem.
// ---------------------------------------------------------------------------

// Exact encoding of free-edge activation as per-edge on/off choices. Every
// unconstrained free edge e = (i, j) gets an auxiliary state a_e: node i's
// single action routes into a_e with probability proportional to e's weight
// no matter whether e is active, at zero cost; a_e chooses between "on"
// (continue to j, paying e's cost) and "off" (return to i for free, which
// re-rolls the step). The geometric retry renormalizes the remaining mass
// exactly as deactivating e would. Pair nodes and all-free nodes become
// states with one deterministic action per member edge. Hitting times are
// preserved exactly; step counts are not, since retries add cost-free moves.
//
// Zapping cannot be encoded this way: a restart would have to fire once per
// real step, but retries multiply the number of SSP steps per real step by a
// policy-dependent factor. gpro_to_ssp rejects zapped instances; use
// gpro_to_ssp_direct for those.
struct GproSspMap {
  int num_states = 0;
  int target_state = -1;

  struct SlotDecision {
    int kind = 0;       // 0 aux on/off, 1 pair-state action, 2 group-state action
    int state = -1;     // deciding state
    int action_on = 0;  // action index that means "this edge is active"
  };
  std::vector<SlotDecision> slots;  // one per free slot

  SspPolicy forward(const Policy& policy) const;
  Policy backward(const SspPolicy& policy) const;
};

std::pair<SspInstance, GproSspMap> gpro_to_ssp(const GproInstance& inst);

// One state per node, one action per feasible local activation pattern:
// pair and all-free nodes get one action per member edge, nodes with
// unconstrained free edges get one action per on/off subset (2^u each,
// refused above 20 local switches). Zapping folds into the per-action
// distributions exactly, so this conversion accepts zapped instances at the
// price of exponential action counts in the local free degree.
struct GproSspDirectMap {
  int num_states = 0;
  int num_free = 0;
  std::vector<std::vector<int>> node_slots;        // free slots per node
  std::vector<std::vector<uint32_t>> action_mask;  // local activation mask per action

  SspPolicy forward(const Policy& policy) const;
  Policy backward(const SspPolicy& policy) const;
};

std::pair<SspInstance, GproSspDirectMap> gpro_to_ssp_direct(const GproInstance& inst,
                                                            const EvalOptions& opts = {});

// JSON exports of the correspondence tables, for tooling and debugging.
nlohmann::json to_json(const ChainSplitMap& map);
nlohmann::json to_json(const ProbSplitMap& map);
nlohmann::json to_json(const SspGproMap& map);
nlohmann::json to_json(const GproSspMap& map);
nlohmann::json to_json(const GproSspDirectMap& map);

}  // namespace pro
