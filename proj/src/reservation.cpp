#include "fogplace/reservation.hpp"

#include <algorithm>
#include <limits>

#include "fogplace/error.hpp"

namespace fogplace {

ReservationSets reserve(const NodeSet& current, const NodeSet& predicted) {
  ReservationSets r;
  std::set_intersection(current.begin(), current.end(), predicted.begin(), predicted.end(),
                        std::inserter(r.Y, r.Y.end()));
  std::set_union(r.Y.begin(), r.Y.end(), predicted.begin(), predicted.end(), std::inserter(r.Gamma, r.Gamma.end()));
  return r;
}

NodeSet open_nodes(const PlacementInstance& inst, const PlacementSolution& sol) {
  NodeSet out;
  for (std::size_t f = 0; f < inst.facility_count(); ++f)
    if (sol.facility_open(f)) out.insert(inst.facilities[f].node_id);
  return out;
}

std::map<NodeId, double> assigned_volume(const PlacementInstance& inst, const PlacementSolution& sol) {
  std::map<NodeId, double> out;
  const std::size_t D = inst.demand_count();
  for (std::size_t f = 0; f < inst.facility_count(); ++f) {
    if (!sol.facility_open(f)) continue;
    double v = 0.0;
    for (std::size_t d = 0; d < D; ++d) v += sol.assignment[f * D + d];
    out[inst.facilities[f].node_id] = v;
  }
  return out;
}

PredictedPlacement predicted_placement(const Topology& topo, const DemandSnapshot& forecast, const NodeState& state,
                                       const InstanceOptions& opts, std::uint64_t seed, const ExactLimits& limits,
                                       const HeuristicOptions& heuristic) {
  PredictedPlacement p;
  if (forecast.demands.empty()) return p;
  const auto inst = build_instance(topo, forecast, state, opts);
  const auto sol = solve_auto(inst, seed, limits, heuristic);
  p.nodes = open_nodes(inst, sol);
  p.volume = assigned_volume(inst, sol);
  p.solver = sol.diagnostics.solver;
  return p;
}

std::vector<std::string> ReservationPlan::check(const NodeSet& predicted) const {
  std::vector<std::string> out;
  for (auto n : Y)
    if (!Gamma.count(n)) out.push_back("Y node " + std::to_string(n) + " missing from Gamma");
  for (auto n : predicted)
    if (!Gamma.count(n)) out.push_back("predicted node " + std::to_string(n) + " missing from Gamma");
  NodeSet expect = Y;
  expect.insert(predicted.begin(), predicted.end());
  if (expect != Gamma) out.push_back("Gamma differs from Y ∪ P");
  for (const auto& [n, v] : reserved_capacity)
    if (!Y.count(n)) out.push_back("reservation on node " + std::to_string(n) + " outside Y");
  return out;
}

ReservationPlan plan_reservation(std::size_t t_next, const NodeSet& current, const PredictedPlacement& predicted,
                                 NodeState& state) {
  ReservationPlan plan;
  plan.t_next = t_next;
  auto sets = reserve(current, predicted.nodes);
  plan.Y = std::move(sets.Y);
  plan.Gamma = std::move(sets.Gamma);
  for (auto n : plan.Y) {
    auto it = state.find(n);
    if (it == state.end()) throw LookupError("reserved node " + std::to_string(n) + " has no state");
    auto vol = predicted.volume.find(n);
    const double need = vol == predicted.volume.end() ? 0.0 : vol->second;
    const double free = std::max(0.0, it->second.free_for_multimedia() - it->second.reserved);
    const double amount = std::min(need, free);
    if (amount <= 0.0) continue;
    it->second.reserved += amount;
    plan.reserved_capacity[n] = amount;
  }
  return plan;
}

namespace {

double room(const NodeLoad& l) { return l.capacity - l.concurrent - l.reserved; }

void admit(NodeLoad& l, double amount) { l.concurrent += std::max(0.0, std::min(amount, l.capacity - l.concurrent - l.reserved)); }

}  // namespace

void apply_reservation(const Topology& topo, NodeState& state, ReservationPlan& plan,
                       const std::vector<ConcurrentService>& queue) {
  for (const auto& s : queue) {
    auto it = state.find(s.node);
    if (it == state.end()) throw LookupError("concurrent service targets unknown node " + std::to_string(s.node));
    NodeLoad& home = it->second;
    if (s.amount <= room(home) || home.reserved <= 0.0) {
      admit(home, s.amount);
      continue;
    }
    NodeId target = -1;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [id, load] : state) {
      if (id == s.node || plan.Gamma.count(id) || room(load) < s.amount) continue;
      const double lat = topo.latency(id, s.region, load.load_fraction());
      if (lat <= s.max_latency_ms && lat < best) {
        best = lat;
        target = id;
      }
    }
    if (target >= 0) {
      state[target].concurrent += s.amount;
      plan.migrations.push_back({s.id, s.node, target, s.amount});
      continue;
    }
    const double conflict = std::min(home.reserved, s.amount - std::max(0.0, room(home)));
    home.reserved -= conflict;
    auto r = plan.reserved_capacity.find(s.node);
    if (r != plan.reserved_capacity.end()) {
      r->second -= conflict;
      if (r->second <= 0.0) plan.reserved_capacity.erase(r);
    }
    plan.waivers.push_back({s.id, s.node, conflict});
    admit(home, s.amount);
  }
}

void admit_concurrent(NodeState& state, const std::vector<ConcurrentService>& queue) {
  for (const auto& s : queue) {
    auto it = state.find(s.node);
    if (it == state.end()) throw LookupError("concurrent service targets unknown node " + std::to_string(s.node));
    admit(it->second, s.amount);
  }
}

}  // namespace fogplace
