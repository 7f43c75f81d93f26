#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pro {

using NodeId = int;
using EdgeId = int;

class Rng;

struct Edge {
  NodeId from = -1;
  NodeId to = -1;
  double weight = 1.0;
  double cost = 1.0;
  bool free = false;
  bool operator==(const Edge&) const = default;
};

// How a free edge may be toggled:
//  - Unconstrained: independent on/off switch.
//  - Paired: member of a declared exclusivity pair, exactly one of the two
//    active. Pair nodes have exactly two outgoing edges, both free.
//  - Grouped: leaves a node whose outgoing edges are all free (and not a pair
//    node); exactly one edge of the group is active.
enum class FreeClass : uint8_t { Unconstrained, Paired, Grouped };

// A web-graph optimization instance. The walk starts at v_s, stops at v_t,
// moves along active edges with probability proportional to weight, and pays
// the edge cost per step. Free edges are the controllable subset. Optional
// zapping restarts the walk from a uniform node with probability `zapping`
// at every step, at unit cost.
//
// The derived indexes (out-edge lists, free-edge classification) are rebuilt
// by finalize(); call it after mutating the public fields by hand. Every
// factory and loader in this library returns finalized instances. Instances
// are immutable after construction as far as the solvers are concerned, so
// sharing one across threads is safe.
struct GproInstance {
  std::vector<std::string> names;
  NodeId v_s = -1;
  NodeId v_t = -1;
  std::vector<Edge> edges;
  std::vector<std::array<EdgeId, 2>> exclusivity;
  std::optional<double> zapping;

  int num_nodes() const { return static_cast<int>(names.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_free() const { return static_cast<int>(free_ids_.size()); }

  void finalize();
  bool finalized() const { return finalized_; }

  const std::vector<EdgeId>& out_edges(NodeId v) const { return out_edges_[v]; }
  const std::vector<EdgeId>& free_ids() const { return free_ids_; }

  // Position of edge e in free_ids(), or -1 if e is not free.
  int free_slot(EdgeId e) const { return free_slot_[e]; }
  FreeClass free_class(int slot) const { return free_class_[slot]; }

  // Index into `exclusivity` for Paired slots, -1 otherwise.
  int pair_of(int slot) const { return pair_of_slot_[slot]; }
  // Index into groups() for Grouped slots, -1 otherwise.
  int group_of(int slot) const { return group_of_slot_[slot]; }

  // Free slots per all-free node, in edge-id order.
  const std::vector<std::vector<int>>& groups() const { return groups_; }
  NodeId group_node(int g) const { return group_nodes_[g]; }

 private:
  bool finalized_ = false;
  std::vector<std::vector<EdgeId>> out_edges_;
  std::vector<EdgeId> free_ids_;
  std::vector<int> free_slot_;
  std::vector<FreeClass> free_class_;
  std::vector<int> pair_of_slot_;
  std::vector<int> group_of_slot_;
  std::vector<std::vector<int>> groups_;
  std::vector<NodeId> group_nodes_;
};

// Equality over the serialized fields only (derived indexes excluded).
bool core_equal(const GproInstance& a, const GproInstance& b);

// Activation state of the free edges, indexed by free slot.
struct Policy {
  std::vector<uint8_t> active;
  bool operator==(const Policy&) const = default;
};

// Bit i of the result is the state of free slot i. Requires <= 64 free edges.
uint64_t policy_mask(const Policy& p);
std::string policy_bits(const Policy& p);

// Checks the exactly-one rules for pairs and all-free groups.
bool feasible(const GproInstance& inst, const Policy& p);

// Everything on; pairs and groups activate their lowest edge id.
Policy all_active_policy(const GproInstance& inst);

Policy random_feasible_policy(const GproInstance& inst, Rng& rng);

struct Violation {
  std::string code;
  std::string detail;
  NodeId node = -1;
  EdgeId edge = -1;
};

// Structural and properness checks. Empty result means the instance is valid:
// well-formed indices, positive weights, absorbing zero-cost target, no
// incoming edges at v_s, consistent exclusivity declarations, zapping in
// [0, 1), and no node set that some feasible policy can trap the walk in.
std::vector<Violation> validate(const GproInstance& inst);

// A plain weighted digraph with a designated target; the precursor of an
// instance before the target is split.
struct SupportGraph {
  std::vector<std::string> names;
  NodeId target = -1;
  std::vector<Edge> edges;
  int num_nodes() const { return static_cast<int>(names.size()); }
};

enum class RepairMode {
  ConnectAll,  // dangling nodes get unit edges to every other node
  SelfLoop,    // dangling nodes get a unit self-loop (useful with zapping)
};

// Gives every node with no outgoing edge a way out. Idempotent.
SupportGraph repair_dangling(SupportGraph g, RepairMode mode = RepairMode::ConnectAll);

struct SplitResult {
  GproInstance instance;
  // node_map[i] is the node carrying i's outgoing edges; the target maps to
  // v_s, and the fresh absorbing copy v_t takes its incoming edges.
  std::vector<NodeId> node_map;
};

// Splits the target node v into a start copy v_s (outgoing edges) and an
// absorbing copy v_t (incoming edges plus a zero-cost self-loop), so hitting
// v_t models returning to v. Requires v to have at least one outgoing and one
// incoming edge; a self-loop at v counts as both.
SplitResult split_target(const SupportGraph& g);

// Restricts an instance to the classic ranking setting: unit weights on all
// edges and unit costs everywhere except out of v_t.
GproInstance canonical_pro(GproInstance inst);

// Replaces exclusivity pair `pair_index` by its weight-based emulation: the
// first member stays free with weight 1, the second becomes a fixed edge of
// weight eps. Heuristic only; the optimum of the emulated instance is not
// guaranteed to match the original even as eps -> 0.
GproInstance epsilon_exclusivity_emulation(const GproInstance& inst, int pair_index, double eps);

// 2^(#unconstrained) * 2^(#pairs) * prod over groups of their size.
double feasible_policy_count(const GproInstance& inst);

}  // namespace pro
