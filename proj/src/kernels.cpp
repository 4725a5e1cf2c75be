#include "fogplace/kernels.hpp"

#include <algorithm>

#include "fogplace/rng.hpp"

namespace fogplace::kernels {

namespace {

inline bool within(Point a, Point b, double r2) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy <= r2;
}

std::size_t best_station(Point c, std::span<const BaseStation> stations) {
  std::size_t best_cov = stations.size(), best_any = 0;
  double d_cov = 0.0, d_any = 0.0;
  for (std::size_t s = 0; s < stations.size(); ++s) {
    const double d = distance(c, stations[s].position);
    if (s == 0 || d < d_any) {
      d_any = d;
      best_any = s;
    }
    if (d <= stations[s].coverage_radius_m && (best_cov == stations.size() || d < d_cov)) {
      d_cov = d;
      best_cov = s;
    }
  }
  return best_cov != stations.size() ? best_cov : best_any;
}

}  // namespace

UndirectedGraph proximity_graph(std::span<const Point> points, double radius_m) {
  const auto n = static_cast<std::int64_t>(points.size());
  const double r2 = radius_m * radius_m;
  UndirectedGraph g;
  g.adj.resize(points.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) {
    auto& row = g.adj[static_cast<std::size_t>(i)];
    for (std::int64_t j = 0; j < n; ++j)
      if (j != i && within(points[i], points[j], r2)) row.push_back(static_cast<std::size_t>(j));
  }
  return g;
}

UndirectedGraph proximity_graph_serial(std::span<const Point> points, double radius_m) {
  const double r2 = radius_m * radius_m;
  UndirectedGraph g;
  g.adj.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      if (within(points[i], points[j], r2)) {
        g.adj[i].push_back(j);
        g.adj[j].push_back(i);
      }
  for (auto& row : g.adj) std::sort(row.begin(), row.end());
  return g;
}

std::vector<std::size_t> nearest_covering(std::span<const Point> cells,
                                          std::span<const BaseStation> stations) {
  std::vector<std::size_t> out(cells.size());
  const auto n = static_cast<std::int64_t>(cells.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = best_station(cells[i], stations);
  return out;
}

std::vector<std::size_t> nearest_covering_serial(std::span<const Point> cells,
                                                 std::span<const BaseStation> stations) {
  std::vector<std::size_t> out;
  out.reserve(cells.size());
  for (auto c : cells) out.push_back(best_station(c, stations));
  return out;
}

std::vector<double> latency_matrix(const Topology& topo, std::span<const NodeId> facilities,
                                   std::span<const double> load_fraction,
                                   std::span<const NodeId> regions) {
  const std::size_t d = regions.size();
  std::vector<double> out(facilities.size() * d);
  const auto f = static_cast<std::int64_t>(facilities.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < f; ++i)
    for (std::size_t j = 0; j < d; ++j)
      out[static_cast<std::size_t>(i) * d + j] =
          topo.latency(facilities[i], regions[j], load_fraction[i]);
  return out;
}

std::vector<double> latency_matrix_serial(const Topology& topo, std::span<const NodeId> facilities,
                                          std::span<const double> load_fraction,
                                          std::span<const NodeId> regions) {
  std::vector<double> out;
  out.reserve(facilities.size() * regions.size());
  for (std::size_t i = 0; i < facilities.size(); ++i)
    for (auto r : regions) out.push_back(topo.latency(facilities[i], r, load_fraction[i]));
  return out;
}

namespace {

std::uint64_t count_flow(const PacketFlow& f, std::uint64_t seed) {
  if (f.success_prob >= 1.0) return f.packets;
  std::uint64_t ok = 0;
  for (std::uint64_t i = 0; i < f.packets; ++i)
    ok += hash_uniform(seed, f.key_a, f.key_b, f.first_index + i) < f.success_prob ? 1 : 0;
  return ok;
}

}  // namespace

std::uint64_t delivered_packets(std::span<const PacketFlow> flows, std::uint64_t seed) {
  std::uint64_t total = 0;
  const auto n = static_cast<std::int64_t>(flows.size());
#pragma omp parallel for reduction(+ : total) schedule(dynamic, 4)
  for (std::int64_t i = 0; i < n; ++i) total += count_flow(flows[i], seed);
  return total;
}

std::uint64_t delivered_packets_serial(std::span<const PacketFlow> flows, std::uint64_t seed) {
  std::uint64_t total = 0;
  for (const auto& f : flows) total += count_flow(f, seed);
  return total;
}

}  // namespace fogplace::kernels
