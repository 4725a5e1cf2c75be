#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

#include "fogplace/placement.hpp"
#include "fogplace/rng.hpp"

namespace fogplace {

namespace {

struct Candidate {
  std::size_t facility;
  std::size_t service_col;
};

class LocalSearch {
 public:
  LocalSearch(const PlacementInstance& inst, std::uint64_t seed, const HeuristicOptions& opts)
      : inst_(inst), opts_(opts), services_(inst.services()), rng_(seed) {
    const std::size_t D = inst.demand_count();
    double max_lat = 0.0, max_cost = 0.0;
    for (std::size_t f = 0; f < inst.facility_count(); ++f) {
      max_cost = std::max(max_cost, inst.facilities[f].open_cost);
      for (std::size_t s = 0; s < services_.size(); ++s) {
        bool usable = false;
        for (std::size_t d = 0; d < D; ++d)
          if (inst.demands[d].service_id == services_[s] && inst.admissible(f, d)) {
            usable = true;
            max_lat = std::max(max_lat, inst.lat(f, d));
          }
        if (usable) {
          cands_.push_back({f, s});
          arcs_.emplace_back();
          for (std::size_t d = 0; d < D; ++d)
            if (inst.demands[d].service_id == services_[s] && inst.admissible(f, d)) arcs_.back().push_back(d);
        }
      }
    }
    // uncovered volume must never be worth trading for cost
    penalty_ = 1e3 * (max_lat + inst.facility_weight * max_cost + 1.0);

    // swap partners ordered by how similar their latency profiles are
    auto profile = [&](std::size_t j, std::size_t d) {
      return inst.demands[d].service_id == services_[cands_[j].service_col] && inst.admissible(cands_[j].facility, d)
                 ? inst.lat(cands_[j].facility, d)
                 : 2.0 * inst.latency_cap_ms;
    };
    near_.resize(cands_.size());
    for (std::size_t i = 0; i < cands_.size(); ++i) {
      std::vector<std::pair<double, std::size_t>> order;
      for (std::size_t j = 0; j < cands_.size(); ++j) {
        if (j == i || cands_[j].service_col != cands_[i].service_col) continue;
        double dist = 0.0;
        for (std::size_t d = 0; d < D; ++d) dist += std::abs(profile(i, d) - profile(j, d));
        order.emplace_back(dist, j);
      }
      std::sort(order.begin(), order.end());
      for (const auto& [dist, j] : order) near_[i].push_back(j);
    }
  }

  PlacementSolution run() {
    PlacementSolution sol = empty_solution(inst_);
    sol.diagnostics.solver = "heuristic";
    if (inst_.demands.empty()) return sol;

    std::vector<char> cur(cands_.size(), 0);
    double cur_v = value(cur);
    greedy(cur, cur_v);
    descend(cur, cur_v, sol.diagnostics.objective_trace);

    std::vector<char> best = cur;
    double best_v = cur_v;
    for (std::size_t k = 0; k < opts_.kicks && !cands_.empty(); ++k) {
      std::vector<char> trial = best;
      kick(trial);
      double trial_v = value(trial);
      descend(trial, trial_v, scratch_trace_);
      if (trial_v < best_v - tol(best_v)) {
        best = std::move(trial);
        best_v = trial_v;
      }
      sol.diagnostics.objective_trace.push_back(best_v);
    }

    const auto open = expand(best);
    const auto a = solve_assignment(inst_, services_, open);
    sol.open.assign(open.begin(), open.end());
    sol.assignment = a.assignment;
    sol.uncovered = a.uncovered;
    sol.objective = objective(inst_, sol);
    sol.status = a.unmet > 0.0 ? SolveStatus::infeasible : SolveStatus::feasible_heuristic;
    sol.diagnostics.nodes_explored = evaluations_;
    return sol;
  }

 private:
  static double tol(double v) { return 1e-9 * std::max(1.0, std::abs(v)); }

  std::vector<char> expand(const std::vector<char>& sel) const {
    std::vector<char> open(inst_.facility_count() * services_.size(), 0);
    for (std::size_t j = 0; j < cands_.size(); ++j)
      if (sel[j]) open[cands_[j].facility * services_.size() + cands_[j].service_col] = 1;
    return open;
  }

  // Objective with uncovered demand priced at the penalty rate.
  double value(const std::vector<char>& sel) {
    const std::string key(sel.begin(), sel.end());
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    ++evaluations_;
    double fixed = 0.0;
    for (std::size_t j = 0; j < cands_.size(); ++j)
      if (sel[j]) fixed += inst_.facilities[cands_[j].facility].open_cost;
    const auto a = solve_assignment(inst_, services_, expand(sel));
    const double v = inst_.facility_weight * fixed + a.cost + penalty_ * a.unmet;
    memo_.emplace(key, v);
    return v;
  }

  // Lazy greedy: a stale gain ratio is treated as an upper bound, so only
  // the current leader is re-evaluated before it is accepted.
  void greedy(std::vector<char>& sel, double& v) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> ratio(cands_.size(), inf), fresh_v(cands_.size(), 0.0);
    std::vector<char> fresh(cands_.size(), 0);
    while (true) {
      std::size_t pick = cands_.size();
      for (std::size_t j = 0; j < cands_.size(); ++j)
        if (!sel[j] && ratio[j] > 0.0 && (pick == cands_.size() || ratio[j] > ratio[pick])) pick = j;
      if (pick == cands_.size()) return;
      if (!fresh[pick]) {
        sel[pick] = 1;
        const double nv = value(sel);
        sel[pick] = 0;
        const double gain = v - nv;
        ratio[pick] = gain > tol(v) ? gain / inst_.facilities[cands_[pick].facility].capacity : -inf;
        fresh[pick] = 1;
        fresh_v[pick] = nv;
        continue;
      }
      sel[pick] = 1;
      v = fresh_v[pick];
      std::fill(fresh.begin(), fresh.end(), 0);
    }
  }

  // Best-improvement descent over add and drop moves; swaps are only
  // scanned once neither improves. When the current selection covers all
  // demand, the transportation duals give a lower bound on every move and
  // moves that provably cannot improve are skipped without a solve.
  void descend(std::vector<char>& sel, double& v, std::vector<double>& trace) {
    const std::size_t none = cands_.size();
    const std::size_t D = inst_.demand_count();
    for (std::size_t it = 0; it < opts_.max_iterations; ++it) {
      std::size_t a = none, b = none;  // open a / close b
      double best_v = v - tol(v);

      ++evaluations_;
      const auto cur = solve_assignment(inst_, services_, expand(sel));
      const bool priced = cur.unmet <= 0.0;
      std::vector<int> pairs_open(inst_.facility_count(), 0);
      for (std::size_t j = 0; j < cands_.size(); ++j) pairs_open[cands_[j].facility] += sel[j];

      // no arc of j undercuts the current marginal demand cost
      auto useless = [&](std::size_t j) {
        const std::size_t f = cands_[j].facility;
        for (auto d : arcs_[j])
          if (inst_.lat(f, d) + cur.facility_price[f] < cur.demand_price[d] - 1e-9 * (1.0 + std::abs(cur.demand_price[d])))
            return false;
        return true;
      };
      auto carried = [&](std::size_t j) {
        double x = 0.0;
        for (auto d : arcs_[j]) x += cur.assignment[cands_[j].facility * D + d];
        return x;
      };
      auto cost_of = [&](std::size_t j) {
        return j == none ? 0.0 : inst_.facility_weight * inst_.facilities[cands_[j].facility].open_cost;
      };

      auto try_move = [&](std::size_t add, std::size_t drop) {
        double nv = std::numeric_limits<double>::quiet_NaN();
        if (priced && (add == none || useless(add))) {
          double bound = v + cost_of(add) - cost_of(drop);
          if (drop != none) {
            const std::size_t f = cands_[drop].facility;
            const bool closes = pairs_open[f] == 1 && (add == none || cands_[add].facility != f);
            if (add == none && carried(drop) <= 0.0) nv = bound;  // flow unchanged
            else if (closes) bound += inst_.facilities[f].capacity * cur.facility_price[f];
          }
          if (std::isnan(nv) && bound >= best_v) return;
        }
        if (std::isnan(nv)) {
          if (add < none) sel[add] = 1;
          if (drop < none) sel[drop] = 0;
          nv = value(sel);
          if (add < none) sel[add] = 0;
          if (drop < none) sel[drop] = 1;
        }
        if (nv < best_v) {
          best_v = nv;
          a = add;
          b = drop;
        }
      };
      for (std::size_t j = 0; j < cands_.size(); ++j) try_move(sel[j] ? none : j, sel[j] ? j : none);
      for (std::size_t i = 0; i < cands_.size() && a == none && b == none; ++i) {
        if (!sel[i]) continue;
        std::size_t tried = 0;
        for (auto j : near_[i]) {
          if (sel[j]) continue;
          if (opts_.swap_neighbors > 0 && tried++ == opts_.swap_neighbors) break;
          try_move(j, i);
        }
      }
      if (a == none && b == none) return;
      if (a != none) sel[a] = 1;
      if (b != none) sel[b] = 0;
      v = best_v;
      trace.push_back(v);
    }
  }

  void kick(std::vector<char>& sel) {
    std::vector<std::size_t> on, off;
    for (std::size_t j = 0; j < cands_.size(); ++j) (sel[j] ? on : off).push_back(j);
    for (int r = 0; r < 2; ++r) {
      if (!on.empty() && (off.empty() || rng_() % 2 == 0)) {
        const auto k = rng_() % on.size();
        sel[on[k]] = 0;
        off.push_back(on[k]);
        on.erase(on.begin() + static_cast<std::ptrdiff_t>(k));
      } else if (!off.empty()) {
        const auto k = rng_() % off.size();
        sel[off[k]] = 1;
        on.push_back(off[k]);
        off.erase(off.begin() + static_cast<std::ptrdiff_t>(k));
      }
    }
  }

  const PlacementInstance& inst_;
  HeuristicOptions opts_;
  std::vector<int> services_;
  std::vector<Candidate> cands_;
  Rng rng_;
  double penalty_ = 0.0;
  std::size_t evaluations_ = 0;
  std::vector<double> scratch_trace_;
  std::unordered_map<std::string, double> memo_;
  std::vector<std::vector<std::size_t>> near_;
  std::vector<std::vector<std::size_t>> arcs_;  // admissible demands per candidate
};

}  // namespace

PlacementSolution solve_heuristic(const PlacementInstance& inst, std::uint64_t seed, const HeuristicOptions& opts) {
  inst.validate();
  const auto t0 = std::chrono::steady_clock::now();
  auto sol = LocalSearch(inst, seed, opts).run();
  sol.diagnostics.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

}  // namespace fogplace
