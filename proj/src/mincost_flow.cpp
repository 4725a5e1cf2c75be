#include "fogplace/mincost_flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "fogplace/error.hpp"

namespace fogplace {

namespace {
constexpr double kFlowEps = 1e-12;
}

MinCostFlow::MinCostFlow(std::size_t nodes) : g_(nodes) {}

std::size_t MinCostFlow::add_edge(std::size_t from, std::size_t to, double capacity, double cost) {
  if (from >= g_.size() || to >= g_.size()) throw InvalidInput("flow edge endpoint out of range");
  if (!(cost >= 0.0)) throw InvalidInput("flow edge costs must be >= 0");
  g_[from].push_back({to, g_[to].size() + (from == to ? 1 : 0), capacity, cost});
  g_[to].push_back({from, g_[from].size() - 1, 0.0, -cost});
  handles_.emplace_back(from, g_[from].size() - 1);
  original_cap_.push_back(capacity);
  return handles_.size() - 1;
}

double MinCostFlow::flow(std::size_t edge) const {
  const auto [u, i] = handles_.at(edge);
  return original_cap_[edge] - g_[u][i].cap;
}

MinCostFlow::Result MinCostFlow::solve(std::size_t s, std::size_t t, double limit) {
  const std::size_t n = g_.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> pot(n, 0.0), dist(n);
  std::vector<std::size_t> prev_node(n), prev_edge(n);
  Result r;
  using Item = std::pair<double, std::size_t>;
  while (r.flow < limit - kFlowEps) {
    std::fill(dist.begin(), dist.end(), inf);
    dist[s] = 0.0;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.emplace(0.0, s);
    while (!pq.empty()) {
      const auto [d, u] = pq.top();
      pq.pop();
      if (d > dist[u]) continue;
      for (std::size_t i = 0; i < g_[u].size(); ++i) {
        const Edge& e = g_[u][i];
        if (e.cap <= kFlowEps) continue;
        // reduced costs are >= 0 up to rounding; clamp so Dijkstra stays valid
        const double nd = d + std::max(0.0, e.cost + pot[u] - pot[e.to]);
        if (nd < dist[e.to]) {
          dist[e.to] = nd;
          prev_node[e.to] = u;
          prev_edge[e.to] = i;
          pq.emplace(nd, e.to);
        }
      }
    }
    if (dist[t] == inf) break;
    // capping at dist[t] keeps every residual reduced cost non-negative,
    // including edges out of nodes Dijkstra did not reach
    for (std::size_t v = 0; v < n; ++v) pot[v] += std::min(dist[v], dist[t]);
    double push = limit - r.flow;
    for (std::size_t v = t; v != s; v = prev_node[v]) push = std::min(push, g_[prev_node[v]][prev_edge[v]].cap);
    for (std::size_t v = t; v != s; v = prev_node[v]) {
      Edge& e = g_[prev_node[v]][prev_edge[v]];
      e.cap -= push;
      g_[v][e.rev].cap += push;
      r.cost += push * e.cost;
    }
    r.flow += push;
  }
  return r;
}

TransportResult solve_transport(std::span<const double> supply, std::span<const double> capacity,
                                std::span<const double> cost) {
  const std::size_t S = supply.size(), T = capacity.size(), V = S + T + 1, sink = S + T;
  if (cost.size() != S * T) throw InvalidInput("transport cost matrix has the wrong size");
  for (double c : cost)
    if (!(c >= 0.0)) throw InvalidInput("transport costs must be >= 0");
  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t none = V;

  TransportResult r;
  r.flow.assign(S * T, 0.0);
  r.shipped.assign(S, 0.0);
  std::vector<double> load(T, 0.0), pot(V, 0.0), dist(V);
  std::vector<std::size_t> prev(V);
  std::vector<char> done(V);
  double want = 0.0, max_cost = 0.0;
  for (double s : supply) want += s;
  for (double c : cost)
    if (std::isfinite(c)) max_cost = std::max(max_cost, c);
  const double ctol = 1e-9 * (1.0 + max_cost);
  std::vector<std::size_t> iter(V), path;
  std::vector<char> dead(V), on_path(V, 0);

  // Sources with remaining supply are reached from the implicit super source
  // at distance 0; their potential stays 0 until they run dry.
  while (r.total < want - kFlowEps) {
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(done.begin(), done.end(), 0);
    for (std::size_t i = 0; i < S; ++i)
      if (supply[i] - r.shipped[i] > kFlowEps) {
        dist[i] = 0.0;
        prev[i] = none;
      }
    auto relax = [&](std::size_t u, std::size_t v, double c) {
      const double nd = dist[u] + std::max(0.0, c + pot[u] - pot[v]);
      if (nd < dist[v]) {
        dist[v] = nd;
        prev[v] = u;
      }
    };
    while (true) {
      std::size_t u = none;
      for (std::size_t v = 0; v < V; ++v)
        if (!done[v] && dist[v] < inf && (u == none || dist[v] < dist[u])) u = v;
      if (u == none || u == sink) break;
      done[u] = 1;
      if (u < S) {
        for (std::size_t j = 0; j < T; ++j) {
          const double c = cost[j * S + u];
          if (std::isfinite(c) && !done[S + j] && r.flow[j * S + u] < supply[u] - kFlowEps) relax(u, S + j, c);
        }
      } else {
        const std::size_t j = u - S;
        if (capacity[j] - load[j] > kFlowEps) relax(u, sink, 0.0);
        for (std::size_t i = 0; i < S; ++i)
          if (!done[i] && r.flow[j * S + i] > kFlowEps) relax(u, i, -cost[j * S + i]);
      }
    }
    if (dist[sink] == inf) break;
    for (std::size_t v = 0; v < V; ++v) pot[v] += std::min(dist[v], dist[sink]);

    // Augment along every shortest path at once: DFS over arcs with zero
    // reduced cost (up to rounding) until that subgraph is blocked.
    std::fill(dead.begin(), dead.end(), 0);
    std::fill(iter.begin(), iter.end(), 0);
    bool pushed = false;
    auto arc_target = [&](std::size_t u, std::size_t k) -> std::size_t {
      if (u < S) {
        const double c = cost[k * S + u];
        const bool ok = std::isfinite(c) && r.flow[k * S + u] < supply[u] - kFlowEps &&
                        std::abs(c + pot[u] - pot[S + k]) <= ctol;
        return ok ? S + k : none;
      }
      const std::size_t j = u - S;
      if (k == 0) return capacity[j] - load[j] > kFlowEps && std::abs(pot[u] - pot[sink]) <= ctol ? sink : none;
      const std::size_t i = k - 1;
      const bool ok = r.flow[j * S + i] > kFlowEps && std::abs(pot[u] - pot[i] - cost[j * S + i]) <= ctol;
      return ok ? i : none;
    };
    for (std::size_t s0 = 0; s0 < S; ++s0) {
      while (!dead[s0] && supply[s0] - r.shipped[s0] > kFlowEps) {
        path.assign(1, s0);
        on_path[s0] = 1;
        while (!path.empty() && path.back() != sink) {
          const std::size_t u = path.back();
          const std::size_t arcs = u < S ? T : S + 1;
          std::size_t v = none;
          for (; iter[u] < arcs; ++iter[u]) {
            v = arc_target(u, iter[u]);
            if (v != none && (v == sink || (!dead[v] && !on_path[v]))) break;
            v = none;
          }
          if (v == none) {
            dead[u] = 1;
            on_path[u] = 0;
            path.pop_back();
            continue;
          }
          path.push_back(v);
          if (v != sink) on_path[v] = 1;
        }
        if (path.empty()) break;

        double push = supply[s0] - r.shipped[s0];
        for (std::size_t m = 0; m + 1 < path.size(); ++m) {
          const std::size_t u = path[m], v = path[m + 1];
          if (u < S) push = std::min(push, supply[u] - r.flow[(v - S) * S + u]);
          else if (v == sink) push = std::min(push, capacity[u - S] - load[u - S]);
          else push = std::min(push, r.flow[(u - S) * S + v]);
        }
        for (std::size_t m = 0; m + 1 < path.size(); ++m) {
          const std::size_t u = path[m], v = path[m + 1];
          if (u < S) r.flow[(v - S) * S + u] += push;
          else if (v == sink) load[u - S] += push;
          else r.flow[(u - S) * S + v] -= push;
          on_path[u] = 0;
        }
        r.shipped[s0] += push;
        r.total += push;
        pushed = true;
      }
    }
    if (!pushed) {
      // rounding hid the zero-cost arcs; augment along the Dijkstra tree path
      std::size_t j = prev[sink] - S;
      double push = capacity[j] - load[j];
      for (std::size_t v = prev[sink];;) {
        const std::size_t i = prev[v];
        push = std::min(push, supply[i] - r.flow[(v - S) * S + i]);
        if (prev[i] == none) {
          push = std::min(push, supply[i] - r.shipped[i]);
          break;
        }
        push = std::min(push, r.flow[(prev[i] - S) * S + i]);
        v = prev[i];
      }
      for (std::size_t v = prev[sink];;) {
        const std::size_t i = prev[v];
        r.flow[(v - S) * S + i] += push;
        if (prev[i] == none) {
          r.shipped[i] += push;
          break;
        }
        r.flow[(prev[i] - S) * S + i] -= push;
        v = prev[i];
      }
      load[j] += push;
      r.total += push;
    }
  }
  r.cost = 0.0;
  for (std::size_t k = 0; k < r.flow.size(); ++k) {
    if (r.flow[k] <= kFlowEps) r.flow[k] = 0.0;
    r.cost += r.flow[k] * (r.flow[k] > 0.0 ? cost[k] : 0.0);
  }
  r.potential = std::move(pot);
  return r;
}

}  // namespace fogplace
