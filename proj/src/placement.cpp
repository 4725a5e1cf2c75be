#include "fogplace/placement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fogplace/error.hpp"
#include "fogplace/kernels.hpp"
#include "fogplace/mincost_flow.hpp"

namespace fogplace {

std::vector<int> PlacementInstance::services() const {
  std::vector<int> s;
  for (const auto& d : demands) s.push_back(d.service_id);
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

double PlacementInstance::total_demand() const {
  double t = 0.0;
  for (const auto& d : demands) t += d.volume;
  return t;
}

double PlacementInstance::admissible_capacity() const {
  double c = 0.0;
  for (std::size_t f = 0; f < facilities.size(); ++f)
    for (std::size_t d = 0; d < demands.size(); ++d)
      if (admissible(f, d)) {
        c += facilities[f].capacity;
        break;
      }
  return c;
}

void PlacementInstance::validate() const {
  if (latency.size() != facilities.size() * demands.size())
    throw InvalidInput("latency matrix must be facilities x demands");
  for (const auto& f : facilities) {
    if (!(f.capacity > 0.0)) throw InvalidInput("facility capacities must be > 0");
    if (!(f.open_cost >= 0.0)) throw InvalidInput("open costs must be >= 0");
  }
  for (const auto& d : demands)
    if (!(d.volume > 0.0)) throw InvalidInput("demand volumes must be > 0");
  for (double l : latency)
    if (!(l >= 0.0)) throw InvalidInput("latencies must be >= 0");
  if (!(facility_weight >= 0.0)) throw InvalidInput("facility weight must be >= 0");
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::feasible_heuristic: return "feasible-heuristic";
    case SolveStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

bool PlacementSolution::facility_open(std::size_t f) const {
  for (std::size_t s = 0; s < services.size(); ++s)
    if (open[f * services.size() + s] > 0.5) return true;
  return false;
}

double PlacementSolution::placed_volume() const {
  double v = 0.0;
  for (double x : assignment) v += x;
  return v;
}

double PlacementSolution::uncovered_volume() const {
  double v = 0.0;
  for (double u : uncovered) v += u;
  return v;
}

PlacementSolution empty_solution(const PlacementInstance& inst) {
  PlacementSolution s;
  s.services = inst.services();
  s.open.assign(inst.facility_count() * s.services.size(), 0.0);
  s.assignment.assign(inst.facility_count() * inst.demand_count(), 0.0);
  s.uncovered.resize(inst.demand_count());
  for (std::size_t d = 0; d < inst.demand_count(); ++d) s.uncovered[d] = inst.demands[d].volume;
  s.status = inst.demands.empty() ? SolveStatus::optimal : SolveStatus::infeasible;
  return s;
}

double objective(const PlacementInstance& inst, const PlacementSolution& sol) {
  const std::size_t S = sol.services.size(), D = inst.demand_count();
  double fixed = 0.0, transport = 0.0;
  for (std::size_t f = 0; f < inst.facility_count(); ++f) {
    for (std::size_t s = 0; s < S; ++s) fixed += inst.facilities[f].open_cost * sol.open[f * S + s];
    for (std::size_t d = 0; d < D; ++d) transport += inst.lat(f, d) * sol.assignment[f * D + d];
  }
  return inst.facility_weight * fixed + transport;
}

VerifyReport verify(const PlacementInstance& inst, const PlacementSolution& sol, double rel_tol) {
  VerifyReport r;
  auto fail = [&r](std::string msg) {
    r.feasible = false;
    r.violations.push_back(std::move(msg));
  };
  const std::size_t F = inst.facility_count(), D = inst.demand_count(), S = sol.services.size();
  if (sol.assignment.size() != F * D || sol.open.size() != F * S) {
    fail("dimension mismatch between instance and solution");
    return r;
  }
  std::vector<std::size_t> service_col(D, S);
  for (std::size_t d = 0; d < D; ++d) {
    const auto it = std::find(sol.services.begin(), sol.services.end(), inst.demands[d].service_id);
    if (it == sol.services.end())
      fail("demand " + std::to_string(d) + ": service " + std::to_string(inst.demands[d].service_id) +
           " has no open column");
    else
      service_col[d] = static_cast<std::size_t>(it - sol.services.begin());
  }
  for (std::size_t k = 0; k < sol.open.size(); ++k)
    if (sol.open[k] != 0.0 && sol.open[k] != 1.0)
      fail("binary: open flag (" + std::to_string(k / std::max<std::size_t>(S, 1)) + "," +
           std::to_string(k % std::max<std::size_t>(S, 1)) + ") = " + std::to_string(sol.open[k]));

  for (std::size_t d = 0; d < D; ++d) {
    const double vol = inst.demands[d].volume;
    const double tol = rel_tol * std::max(1.0, vol);
    double got = 0.0;
    for (std::size_t f = 0; f < F; ++f) {
      const double x = sol.assignment[f * D + d];
      got += x;
      if (x < -tol) fail("non-negativity: x(" + std::to_string(f) + "," + std::to_string(d) + ") < 0");
      if (x > tol && !inst.admissible(f, d))
        fail("admissibility: x(" + std::to_string(f) + "," + std::to_string(d) + ") uses an arc above the latency cap");
      if (x > tol && service_col[d] < S && sol.open[f * S + service_col[d]] < 0.5)
        fail("capacity gating: demand " + std::to_string(d) + " assigned to closed facility " + std::to_string(f));
    }
    if (std::abs(got - vol) > tol)
      fail("demand balance: demand " + std::to_string(d) + " receives " + std::to_string(got) + " of " +
           std::to_string(vol));
  }
  for (std::size_t f = 0; f < F; ++f) {
    double load = 0.0;
    for (std::size_t d = 0; d < D; ++d) load += sol.assignment[f * D + d];
    const double cap = inst.facilities[f].capacity * (sol.facility_open(f) ? 1.0 : 0.0);
    if (load > cap + rel_tol * std::max(1.0, inst.facilities[f].capacity))
      fail("capacity: facility " + std::to_string(f) + " load " + std::to_string(load) + " exceeds " +
           std::to_string(cap));
  }
  return r;
}

double NodeLoad::free_for_multimedia() const { return std::max(0.0, capacity - concurrent); }

double NodeLoad::load_fraction() const {
  if (!(capacity > 0.0)) return 1.0;
  return std::clamp(concurrent / capacity, 0.0, 1.0);
}

NodeState initial_node_state(const Topology& topo, double capacity_scale) {
  if (!(capacity_scale > 0.0)) throw ConfigError("capacity scale must be > 0");
  NodeState s;
  for (const auto& n : topo.nodes()) s[n.id] = NodeLoad{n.resources.storage_gb * capacity_scale, 0.0, 0.0};
  return s;
}

PlacementInstance build_instance(const Topology& topo, const DemandSnapshot& snapshot, const NodeState& state,
                                 const InstanceOptions& opts) {
  if (snapshot.demands.empty()) throw InvalidInput("snapshot has no demand");
  PlacementInstance inst;
  inst.slot = snapshot.slot;
  inst.demands = snapshot.demands;
  inst.latency_cap_ms = opts.latency_cap_ms;
  inst.facility_weight = opts.facility_weight;
  std::vector<NodeId> ids;
  std::vector<double> load;
  for (const auto& [id, s] : state) {
    const double free = s.free_for_multimedia();
    if (free <= 0.0) continue;
    inst.facilities.push_back({id, free, opts.open_cost});
    ids.push_back(id);
    load.push_back(s.load_fraction());
  }
  std::vector<NodeId> regions;
  for (const auto& d : inst.demands) regions.push_back(d.region_id);
  inst.latency = kernels::latency_matrix(topo, ids, load, regions);
  inst.validate();
  return inst;
}

AssignmentResult solve_assignment(const PlacementInstance& inst, const std::vector<int>& services,
                                  const std::vector<char>& open) {
  const std::size_t F = inst.facility_count(), D = inst.demand_count(), S = services.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> supply(D), capacity(F), cost(F * D, inf);
  for (std::size_t f = 0; f < F; ++f) capacity[f] = inst.facilities[f].capacity;
  for (std::size_t d = 0; d < D; ++d) {
    supply[d] = inst.demands[d].volume;
    const auto col = static_cast<std::size_t>(
        std::lower_bound(services.begin(), services.end(), inst.demands[d].service_id) - services.begin());
    if (col >= S) continue;
    for (std::size_t f = 0; f < F; ++f)
      if (inst.admissible(f, d) && open[f * S + col]) cost[f * D + d] = inst.lat(f, d);
  }
  const auto t = solve_transport(supply, capacity, cost);

  AssignmentResult r;
  r.assignment = t.flow;
  r.cost = t.cost;
  const double sink_pot = t.potential[D + F];
  r.demand_price.resize(D);
  r.facility_price.assign(F, 0.0);
  for (std::size_t d = 0; d < D; ++d) r.demand_price[d] = sink_pot - t.potential[d];
  for (std::size_t f = 0; f < F; ++f) {
    double load = 0.0;
    for (std::size_t d = 0; d < D; ++d) load += t.flow[f * D + d];
    if (load > 0.0) r.facility_price[f] = std::max(0.0, sink_pot - t.potential[D + f]);
  }
  r.uncovered.resize(D);
  for (std::size_t d = 0; d < D; ++d) {
    r.uncovered[d] = std::max(0.0, inst.demands[d].volume - t.shipped[d]);
    if (r.uncovered[d] <= 1e-12 * std::max(1.0, inst.demands[d].volume)) r.uncovered[d] = 0.0;
    r.unmet += r.uncovered[d];
  }
  return r;
}

PlacementSolution solve_auto(const PlacementInstance& inst, std::uint64_t seed, const ExactLimits& limits,
                             const HeuristicOptions& heuristic) {
  if (within_exact_limits(inst, limits)) return solve_exact(inst, limits);
  return solve_heuristic(inst, seed, heuristic);
}

}  // namespace fogplace
