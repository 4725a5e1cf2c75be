#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "fogplace/error.hpp"
#include "fogplace/placement.hpp"

namespace fogplace {

namespace {

struct Pair {
  std::size_t facility;
  std::size_t service_col;
};

// (facility, service) pairs that can serve at least one demand.
std::vector<Pair> usable_pairs(const PlacementInstance& inst, const std::vector<int>& services) {
  std::vector<Pair> out;
  for (std::size_t f = 0; f < inst.facility_count(); ++f)
    for (std::size_t s = 0; s < services.size(); ++s)
      for (std::size_t d = 0; d < inst.demand_count(); ++d)
        if (inst.demands[d].service_id == services[s] && inst.admissible(f, d)) {
          out.push_back({f, s});
          break;
        }
  return out;
}

std::size_t usable_facility_count(const PlacementInstance& inst) {
  std::size_t n = 0;
  for (std::size_t f = 0; f < inst.facility_count(); ++f)
    for (std::size_t d = 0; d < inst.demand_count(); ++d)
      if (inst.admissible(f, d)) {
        ++n;
        break;
      }
  return n;
}

class BranchAndBound {
 public:
  BranchAndBound(const PlacementInstance& inst, const ExactLimits& limits)
      : inst_(inst), limits_(limits), services_(inst.services()), pairs_(usable_pairs(inst, services_)) {
    const std::size_t D = inst.demand_count();
    serving_.resize(D);
    for (std::size_t j = 0; j < pairs_.size(); ++j)
      for (std::size_t d = 0; d < D; ++d)
        if (inst.demands[d].service_id == services_[pairs_[j].service_col] && inst.admissible(pairs_[j].facility, d))
          serving_[d].push_back(j);
    state_.assign(pairs_.size(), kUndecided);
    start_ = std::chrono::steady_clock::now();
  }

  PlacementSolution run() {
    PlacementSolution sol = empty_solution(inst_);
    sol.diagnostics.solver = "exact";
    if (inst_.demands.empty()) return sol;

    // all usable pairs open: feasibility test and first incumbent
    std::vector<char> all(inst_.facility_count() * services_.size(), 0);
    for (const auto& p : pairs_) all[p.facility * services_.size() + p.service_col] = 1;
    const auto full = solve_assignment(inst_, services_, all);
    if (full.unmet > 0.0) return best_effort(std::move(sol), all, full);

    std::vector<std::size_t> all_pairs(pairs_.size());
    for (std::size_t j = 0; j < pairs_.size(); ++j) all_pairs[j] = j;
    consider(all_pairs, all, full);

    dfs(0, 0.0);

    sol.open.assign(all.size(), 0.0);
    for (auto j : best_set_) sol.open[pairs_[j].facility * services_.size() + pairs_[j].service_col] = 1.0;
    sol.assignment = best_.assignment;
    sol.uncovered = best_.uncovered;
    sol.objective = objective(inst_, sol);
    sol.status = SolveStatus::optimal;
    sol.diagnostics.nodes_explored = nodes_;
    sol.diagnostics.bound_history = history_;
    sol.diagnostics.budget_exhausted = out_of_time_;
    if (out_of_time_) sol.status = SolveStatus::feasible_heuristic;
    return sol;
  }

 private:
  static constexpr char kUndecided = 0, kOpen = 1, kClosed = 2;

  PlacementSolution best_effort(PlacementSolution sol, std::vector<char> open, const AssignmentResult& full) {
    // keep only pairs that carry flow
    const std::size_t D = inst_.demand_count(), S = services_.size();
    for (const auto& p : pairs_) {
      double used = 0.0;
      for (std::size_t d = 0; d < D; ++d)
        if (inst_.demands[d].service_id == services_[p.service_col]) used += full.assignment[p.facility * D + d];
      if (used <= 0.0) open[p.facility * S + p.service_col] = 0;
    }
    sol.open.assign(open.begin(), open.end());
    sol.assignment = full.assignment;
    sol.uncovered = full.uncovered;
    sol.objective = objective(inst_, sol);
    sol.status = SolveStatus::infeasible;
    return sol;
  }

  bool tied_or_better(double value, double incumbent) const {
    return value <= incumbent + 1e-9 * std::max(1.0, std::abs(incumbent));
  }

  void consider(const std::vector<std::size_t>& set, const std::vector<char>&, const AssignmentResult& a) {
    double fixed = 0.0;
    for (auto j : set) fixed += inst_.facilities[pairs_[j].facility].open_cost;
    const double value = inst_.facility_weight * fixed + a.cost;
    const double tol = std::isfinite(incumbent_) ? 1e-9 * std::max(1.0, std::abs(incumbent_)) : 0.0;
    const bool better = value < incumbent_ - tol;
    const bool tie = !better && std::abs(value - incumbent_) <= tol && set < best_set_;
    if (better || tie) {
      incumbent_ = value;
      best_set_ = set;
      best_ = a;
      history_.push_back(value);
    }
  }

  void dfs(std::size_t k, double fixed) {
    ++nodes_;
    if (limits_.time_budget_ms > 0.0 && (nodes_ & 255) == 0) {
      const std::chrono::duration<double, std::milli> el = std::chrono::steady_clock::now() - start_;
      if (el.count() > limits_.time_budget_ms) out_of_time_ = true;
    }
    if (out_of_time_) return;

    // uncapacitated relaxation over open and undecided pairs
    double bound = inst_.facility_weight * fixed;
    for (std::size_t d = 0; d < inst_.demand_count(); ++d) {
      double best = std::numeric_limits<double>::infinity();
      for (auto j : serving_[d])
        if (state_[j] != kClosed) best = std::min(best, inst_.lat(pairs_[j].facility, d));
      if (!std::isfinite(best)) return;
      bound += best * inst_.demands[d].volume;
    }
    if (!tied_or_better(bound, incumbent_)) return;
    double cap = 0.0;
    std::size_t last_f = std::numeric_limits<std::size_t>::max();
    for (std::size_t j = 0; j < pairs_.size(); ++j)
      if (state_[j] != kClosed && pairs_[j].facility != last_f) {
        cap += inst_.facilities[pairs_[j].facility].capacity;
        last_f = pairs_[j].facility;
      }
    if (cap < inst_.total_demand() * (1.0 - 1e-12)) return;

    if (k == pairs_.size()) {
      std::vector<char> open(inst_.facility_count() * services_.size(), 0);
      std::vector<std::size_t> set;
      for (std::size_t j = 0; j < pairs_.size(); ++j)
        if (state_[j] == kOpen) {
          open[pairs_[j].facility * services_.size() + pairs_[j].service_col] = 1;
          set.push_back(j);
        }
      const auto a = solve_assignment(inst_, services_, open);
      if (a.unmet > 0.0) return;
      consider(set, open, a);
      return;
    }
    state_[k] = kClosed;
    dfs(k + 1, fixed);
    state_[k] = kOpen;
    dfs(k + 1, fixed + inst_.facilities[pairs_[k].facility].open_cost);
    state_[k] = kUndecided;
  }

  const PlacementInstance& inst_;
  ExactLimits limits_;
  std::vector<int> services_;
  std::vector<Pair> pairs_;
  std::vector<std::vector<std::size_t>> serving_;
  std::vector<char> state_;
  double incumbent_ = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_set_;
  AssignmentResult best_;
  std::vector<double> history_;
  std::size_t nodes_ = 0;
  bool out_of_time_ = false;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

bool within_exact_limits(const PlacementInstance& inst, const ExactLimits& limits) {
  return usable_facility_count(inst) <= limits.max_facilities && inst.demand_count() <= limits.max_demands;
}

PlacementSolution solve_exact(const PlacementInstance& inst, const ExactLimits& limits) {
  inst.validate();
  if (!within_exact_limits(inst, limits))
    throw SizeLimitError("instance has " + std::to_string(usable_facility_count(inst)) + " usable facilities and " +
                         std::to_string(inst.demand_count()) + " demands; exact limits are " +
                         std::to_string(limits.max_facilities) + " x " + std::to_string(limits.max_demands) +
                         " (use the heuristic solver)");
  const auto t0 = std::chrono::steady_clock::now();
  auto sol = BranchAndBound(inst, limits).run();
  sol.diagnostics.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

}  // namespace fogplace
