#include "fogplace/strategies.hpp"

#include <algorithm>
#include <tuple>

namespace fogplace {

namespace {

struct Filler {
  const PlacementInstance& inst;
  PlacementSolution sol;
  std::vector<double> residual;

  explicit Filler(const PlacementInstance& i) : inst(i), sol(empty_solution(i)), residual(i.facility_count()) {
    for (std::size_t f = 0; f < i.facility_count(); ++f) residual[f] = i.facilities[f].capacity;
  }

  void give(std::size_t f, std::size_t d) {
    const double amount = std::min(residual[f], sol.uncovered[d]);
    if (amount <= 0.0) return;
    const std::size_t D = inst.demand_count(), S = sol.services.size();
    sol.assignment[f * D + d] += amount;
    residual[f] -= amount;
    sol.uncovered[d] -= amount;
    const auto col = static_cast<std::size_t>(
        std::lower_bound(sol.services.begin(), sol.services.end(), inst.demands[d].service_id) - sol.services.begin());
    sol.open[f * S + col] = 1.0;
  }

  PlacementSolution finish(const char* name) {
    bool covered = true;
    for (double u : sol.uncovered) covered = covered && u <= 0.0;
    sol.status = covered ? SolveStatus::feasible_heuristic : SolveStatus::infeasible;
    sol.objective = objective(inst, sol);
    sol.diagnostics.solver = name;
    return std::move(sol);
  }
};

}  // namespace

PlacementSolution strategy_da(const PlacementInstance& inst, const Topology& topo) {
  Filler fill(inst);
  for (std::size_t d = 0; d < inst.demand_count(); ++d) {
    const NodeId region = inst.demands[d].region_id;
    for (int tier = 0; tier < topo.tier_count() && fill.sol.uncovered[d] > 0.0; ++tier) {
      const NodeId on_path = topo.ancestor_at(region, tier);
      std::vector<std::tuple<int, double, NodeId, std::size_t>> order;
      for (std::size_t f = 0; f < inst.facility_count(); ++f) {
        const auto& node = topo.node(inst.facilities[f].node_id);
        if (node.tier != tier || !inst.admissible(f, d)) continue;
        order.emplace_back(node.id == on_path ? 0 : 1, inst.lat(f, d), node.id, f);
      }
      std::sort(order.begin(), order.end());
      for (const auto& o : order) fill.give(std::get<3>(o), d);
    }
  }
  return fill.finish("da");
}

PlacementSolution strategy_qoeap(const PlacementInstance& inst, const Topology&) {
  Filler fill(inst);
  double max_cap = 0.0;
  for (const auto& f : inst.facilities) max_cap = std::max(max_cap, f.capacity);
  std::vector<std::tuple<double, std::size_t, std::size_t>> arcs;
  for (std::size_t f = 0; f < inst.facility_count(); ++f)
    for (std::size_t d = 0; d < inst.demand_count(); ++d)
      if (inst.admissible(f, d))
        arcs.emplace_back(-(inst.facilities[f].capacity / max_cap - inst.lat(f, d) / inst.latency_cap_ms), f, d);
  std::sort(arcs.begin(), arcs.end());
  for (const auto& [score, f, d] : arcs) fill.give(f, d);
  return fill.finish("qoeap");
}

}  // namespace fogplace
