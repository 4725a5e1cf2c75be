#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fogplace {

/// Successive shortest paths with Dijkstra and node potentials. Costs must
/// be non-negative; capacities are real-valued.
class MinCostFlow {
 public:
  explicit MinCostFlow(std::size_t nodes);

  /// Returns an edge handle for flow().
  std::size_t add_edge(std::size_t from, std::size_t to, double capacity, double cost);

  struct Result {
    double flow = 0.0;
    double cost = 0.0;
  };
  /// Pushes up to `limit` units from s to t at minimum cost; stops early when
  /// t becomes unreachable, so the result is a max flow of min cost.
  Result solve(std::size_t s, std::size_t t, double limit);

  double flow(std::size_t edge) const;

 private:
  struct Edge {
    std::size_t to;
    std::size_t rev;
    double cap;
    double cost;
  };
  std::vector<std::vector<Edge>> g_;
  std::vector<std::pair<std::size_t, std::size_t>> handles_;
  std::vector<double> original_cap_;
};

struct TransportResult {
  std::vector<double> flow;     // sinks x sources, row-major
  std::vector<double> shipped;  // per source
  double total = 0.0;
  double cost = 0.0;
  // Node potentials (sources, sinks, then the super sink) certifying
  // optimality: every residual arc has non-negative reduced cost.
  std::vector<double> potential;
};

/// Dense transportation problem solved by the same successive-shortest-path
/// scheme with an O(V^2) Dijkstra, which beats the heap version on the
/// small complete bipartite graphs of a placement slot. `cost[j * S + i]`
/// is the unit cost from source i to sink j (+inf for no arc). Ships as
/// much as the capacities allow, at minimum cost among maximum flows.
TransportResult solve_transport(std::span<const double> supply, std::span<const double> capacity,
                                std::span<const double> cost);

}  // namespace fogplace
