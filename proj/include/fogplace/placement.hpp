#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fogplace/topology.hpp"
#include "fogplace/workload.hpp"

namespace fogplace {

struct Facility {
  NodeId node_id = 0;
  double capacity = 0.0;
  double open_cost = 1.0;
};

/// One slot of the capacitated facility-location problem:
///   min  lambda * sum open_cost(f) y(f,s) + sum lat(f,d) x(f,d)
///   s.t. sum_f x(f,d) = volume(d); sum_d x(f,d) <= capacity(f);
///        x(f,d) <= volume(d) * y(f, service(d)); x >= 0; y binary.
/// Arcs with latency above the cap are unusable.
struct PlacementInstance {
  std::size_t slot = 0;
  std::vector<Facility> facilities;
  std::vector<Demand> demands;
  std::vector<double> latency;  // facilities x demands, row-major, ms
  double latency_cap_ms = 100.0;
  double facility_weight = 1.0;  // lambda

  std::size_t facility_count() const { return facilities.size(); }
  std::size_t demand_count() const { return demands.size(); }
  double lat(std::size_t f, std::size_t d) const { return latency[f * demands.size() + d]; }
  bool admissible(std::size_t f, std::size_t d) const { return lat(f, d) <= latency_cap_ms; }
  /// Distinct service ids in ascending order; the columns of the open matrix.
  std::vector<int> services() const;
  double total_demand() const;
  /// Capacity of facilities with at least one admissible arc.
  double admissible_capacity() const;
  bool capacity_infeasible() const { return admissible_capacity() < total_demand(); }

  void validate() const;
};

enum class SolveStatus { optimal, feasible_heuristic, infeasible };
std::string to_string(SolveStatus s);

struct SolveDiagnostics {
  std::string solver;
  std::size_t nodes_explored = 0;
  std::vector<double> bound_history;    // incumbent value each time it improved
  std::vector<double> objective_trace;  // heuristic incumbent per iteration
  double wall_ms = 0.0;
  bool budget_exhausted = false;
};

struct PlacementSolution {
  std::vector<int> services;
  std::vector<double> open;        // facilities x services, 0/1
  std::vector<double> assignment;  // facilities x demands
  double objective = 0.0;
  SolveStatus status = SolveStatus::infeasible;
  std::vector<double> uncovered;   // per demand
  SolveDiagnostics diagnostics;

  double x(std::size_t f, std::size_t d, std::size_t demand_count) const { return assignment[f * demand_count + d]; }
  bool facility_open(std::size_t f) const;
  double placed_volume() const;
  double uncovered_volume() const;
};

PlacementSolution empty_solution(const PlacementInstance& inst);

/// Facility term plus latency-weighted assignment.
double objective(const PlacementInstance& inst, const PlacementSolution& sol);

struct VerifyReport {
  bool feasible = true;
  std::vector<std::string> violations;
};

/// Checks demand balance, gated capacity, non-negativity, binary open flags
/// and admissible-arc usage. Never throws on a bad solution.
VerifyReport verify(const PlacementInstance& inst, const PlacementSolution& sol, double rel_tol = 1e-9);

/// Residual state of one node within a slot.
struct NodeLoad {
  double capacity = 0.0;
  double concurrent = 0.0;  // consumed by concurrent-class services
  double reserved = 0.0;    // held for predicted multimedia demand

  double free_for_multimedia() const;
  double load_fraction() const;
};
using NodeState = std::map<NodeId, NodeLoad>;

/// Capacity of each node = storage_gb * capacity_scale.
NodeState initial_node_state(const Topology& topo, double capacity_scale);

struct InstanceOptions {
  double latency_cap_ms = 100.0;
  double facility_weight = 1.0;
  double open_cost = 1.0;
};

/// One facility per node with free capacity, latencies under current load.
PlacementInstance build_instance(const Topology& topo, const DemandSnapshot& snapshot, const NodeState& state,
                                 const InstanceOptions& opts = {});

/// Min-cost assignment for a fixed open matrix (facilities x services). When
/// the demand cannot be met the flow is maximal and `uncovered` is filled.
struct AssignmentResult {
  std::vector<double> assignment;
  std::vector<double> uncovered;
  double cost = 0.0;
  double unmet = 0.0;
  // LP duals of the transportation problem: u_d is the marginal cost of
  // demand d, w_f >= 0 the scarcity price of facility f's capacity, with
  // u_d - w_f <= lat(f, d) on every usable arc.
  std::vector<double> demand_price;
  std::vector<double> facility_price;
};
AssignmentResult solve_assignment(const PlacementInstance& inst, const std::vector<int>& services,
                                  const std::vector<char>& open);

struct ExactLimits {
  std::size_t max_facilities = 12;
  std::size_t max_demands = 15;
  double time_budget_ms = 0.0;  // 0 = unlimited
};

/// Branch and bound over open (facility, service) pairs with the
/// uncapacitated relaxation as lower bound. Only facilities with an
/// admissible arc count toward the size limits.
PlacementSolution solve_exact(const PlacementInstance& inst, const ExactLimits& limits = {});
bool within_exact_limits(const PlacementInstance& inst, const ExactLimits& limits = {});

struct HeuristicOptions {
  std::size_t kicks = 4;
  std::size_t max_iterations = 200;
  std::size_t swap_neighbors = 6;  // closed partners tried per open pair; 0 = all
};

/// Greedy construction then add/drop/swap local search with seeded kicks.
PlacementSolution solve_heuristic(const PlacementInstance& inst, std::uint64_t seed,
                                  const HeuristicOptions& opts = {});

/// Exact when within limits, heuristic otherwise.
PlacementSolution solve_auto(const PlacementInstance& inst, std::uint64_t seed, const ExactLimits& limits = {},
                             const HeuristicOptions& heuristic = {});

}  // namespace fogplace
