#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fogplace/placement.hpp"

namespace fogplace {

using NodeSet = std::set<NodeId>;

/// Y = A ∩ P (reserved), Gamma = Y ∪ P (adequate).
struct ReservationSets {
  NodeSet Y;
  NodeSet Gamma;
};
ReservationSets reserve(const NodeSet& current, const NodeSet& predicted);

/// Node ids of facilities opened by a solution.
NodeSet open_nodes(const PlacementInstance& inst, const PlacementSolution& sol);
/// Volume assigned to each opened node.
std::map<NodeId, double> assigned_volume(const PlacementInstance& inst, const PlacementSolution& sol);

struct PredictedPlacement {
  NodeSet nodes;                    // P_next
  std::map<NodeId, double> volume;  // predicted multimedia need per node
  std::string solver;
};

/// Solves the placement for a forecast snapshot (exact within limits,
/// heuristic otherwise). An empty snapshot yields an empty set.
PredictedPlacement predicted_placement(const Topology& topo, const DemandSnapshot& forecast, const NodeState& state,
                                       const InstanceOptions& opts, std::uint64_t seed,
                                       const ExactLimits& limits = {}, const HeuristicOptions& heuristic = {});

struct ConcurrentService {
  std::size_t id = 0;
  NodeId node = 0;    // node the service would be admitted to
  NodeId region = 0;  // base station the service's users attach to
  double amount = 0.0;
  double max_latency_ms = 150.0;
};

struct Migration {
  std::size_t service = 0;
  NodeId from = 0;
  NodeId to = 0;
  double amount = 0.0;
};

struct Waiver {
  std::size_t service = 0;
  NodeId node = 0;
  double amount = 0.0;  // reservation given up on `node`
};

struct ReservationPlan {
  std::size_t t_next = 0;
  NodeSet Y;
  NodeSet Gamma;
  std::map<NodeId, double> reserved_capacity;
  std::vector<Migration> migrations;
  std::vector<Waiver> waivers;

  /// Y ⊆ Gamma and reserved keys ⊆ Y; returns violation messages.
  std::vector<std::string> check(const NodeSet& predicted) const;
};

/// Builds the plan and marks, for every node of Y, its predicted need as
/// reserved (capped at the node's free capacity).
ReservationPlan plan_reservation(std::size_t t_next, const NodeSet& current, const PredictedPlacement& predicted,
                                 NodeState& state);

/// Admits concurrent services in queue order. A service that would eat into
/// a reservation is moved to the lowest-latency node outside Gamma with room
/// and acceptable latency (ties by lowest id); without such a node the
/// reservation yields the conflicting amount and the service stays.
/// Services on unreserved nodes are admitted up to the node's capacity.
void apply_reservation(const Topology& topo, NodeState& state, ReservationPlan& plan,
                       const std::vector<ConcurrentService>& queue);

/// Admission without any reservation logic.
void admit_concurrent(NodeState& state, const std::vector<ConcurrentService>& queue);

}  // namespace fogplace
