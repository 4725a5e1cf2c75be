#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fogplace/community.hpp"

namespace fogplace {

using NodeId = std::int64_t;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Point a, Point b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

struct BaseStation {
  NodeId id = 0;
  Point position;
  double coverage_radius_m = 0.0;
};

struct NodeResources {
  double mips = 0.0;        // 10^9 instructions / s
  double storage_gb = 0.0;
  double ram_gb = 0.0;
  double up_mbps = 0.0;
  double down_mbps = 0.0;
};

struct FogNode {
  NodeId id = 0;
  int tier = 0;  // 0 = base station
  Point position;
  std::optional<NodeId> parent;
  std::vector<NodeId> children;
  NodeResources resources;
};

/// Per-hop propagation and per-node processing latency. `hop_ms[k]` is the
/// cost of crossing the boundary between tier k and k+1; the hop into the
/// root always costs `hop_ms.back()`, and deeper non-root boundaries reuse
/// the second-to-last entry.
struct LatencyModel {
  std::vector<double> hop_ms{2.0, 8.0, 20.0, 45.0};
  std::vector<double> processing_ms{4.0, 6.0, 10.0};
  double root_processing_ms = 35.0;
  double load_penalty = 0.5;

  void validate() const;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct TierRange {
  Range mips, storage_gb, ram_gb, up_mbps, down_mbps;
};

/// Hardware ranges per tier. With four tiers these are exactly the
/// reference values (base station, cloudlet, regional cloud, cloud); other
/// depths pin tier 0 and the root to the outer columns and interpolate the
/// intermediate tiers between the cloudlet and regional-cloud columns.
std::vector<TierRange> default_tier_ranges(int tier_count);

class Topology {
 public:
  Topology() = default;
  Topology(std::vector<FogNode> nodes, LatencyModel latency);

  std::span<const FogNode> nodes() const { return nodes_; }
  std::span<FogNode> mutable_nodes() { return nodes_; }
  const FogNode& node(NodeId id) const;
  bool contains(NodeId id) const { return index_.count(id) != 0; }
  std::size_t size() const { return nodes_.size(); }

  int tier_count() const { return tier_count_; }
  NodeId root() const { return root_; }
  std::vector<std::size_t> tier_sizes() const;
  std::vector<NodeId> nodes_in_tier(int tier) const;
  std::vector<NodeId> base_stations() const { return nodes_in_tier(0); }
  const LatencyModel& latency_model() const { return latency_; }

  /// Ancestor of `id` at `tier` (the node itself when tiers match).
  NodeId ancestor_at(NodeId id, int tier) const;
  /// Tree path from `from` to `to`, both ends included.
  std::vector<NodeId> path(NodeId from, NodeId to) const;
  int hop_count(NodeId from, NodeId to) const;

  /// Latency of crossing the boundary between `lower_tier` and the tier above.
  double hop_latency(int lower_tier) const;
  double processing_latency(NodeId node, double load_fraction) const;

  /// Latency offered by `node` to a demand originating at base station
  /// `region`: hop latencies along the tree path plus loaded processing.
  double latency(NodeId node, NodeId region, double load_fraction) const;

 private:
  std::vector<FogNode> nodes_;
  std::unordered_map<NodeId, std::size_t> index_;
  LatencyModel latency_;
  int tier_count_ = 0;
  NodeId root_ = -1;
};

/// Edge (i, j) iff the Euclidean distance between stations i and j is at
/// most `radius_m`. Vertices are station indices.
UndirectedGraph build_proximity_graph(std::span<const BaseStation> stations, double radius_m);

struct HierarchyOptions {
  double radius_m = 3000.0;
  int mu = 2;
  std::uint64_t seed = 0;
  LatencyModel latency;
};

/// Bottom-up construction: communities of the proximity graph become
/// cloudlets, then each tier is re-partitioned until at most `mu` nodes
/// remain, and a single root is placed above them. Added nodes sit at the
/// centroid of their children.
Topology build_hierarchy(std::span<const BaseStation> stations, const HierarchyOptions& opts);

/// Draws every node's resources uniformly from its tier's range.
void assign_resources(Topology& topology, std::span<const TierRange> ranges, std::uint64_t seed);

/// Structural checks (single root, reachability, parent tiers, strictly
/// decreasing tier sizes). Returns one message per violation.
std::vector<std::string> check_invariants(const Topology& topology);

/// Uniform random layout in a `width_m` x `height_m` rectangle.
std::vector<BaseStation> random_stations(std::size_t count, double width_m, double height_m,
                                         double coverage_radius_m, std::uint64_t seed);

/// Reads `id,x_m,y_m,coverage_radius_m` or, with `latlon`,
/// `id,lat,lon,coverage_radius_m` (projected to local meters).
std::vector<BaseStation> parse_stations_csv(std::string_view text, bool latlon);

}  // namespace fogplace
