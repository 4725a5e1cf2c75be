#include "fogplace/topology.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <map>
#include <numbers>
#include <set>

#include "fogplace/csv.hpp"
#include "fogplace/error.hpp"
#include "fogplace/kernels.hpp"
#include "fogplace/rng.hpp"

namespace fogplace {

void LatencyModel::validate() const {
  if (hop_ms.empty() || processing_ms.empty())
    throw ConfigError("latency model needs hop and processing tables");
  for (double v : hop_ms)
    if (!(v > 0.0)) throw ConfigError("hop latencies must be > 0");
  for (double v : processing_ms)
    if (!(v > 0.0)) throw ConfigError("processing latencies must be > 0");
  if (!(root_processing_ms > 0.0)) throw ConfigError("root processing latency must be > 0");
  if (!(load_penalty >= 0.0)) throw ConfigError("load penalty must be >= 0");
}

std::vector<TierRange> default_tier_ranges(int tier_count) {
  if (tier_count < 2) throw ConfigError("topology needs at least two tiers");
  const TierRange cols[4] = {
      {{2.8, 5.3}, {100.0 * 100.0, 100.0 * 100.0}, {25, 25}, {300, 300}, {300, 300}},
      {{5.3, 7.8}, {200.0 * 200.0, 200.0 * 200.0}, {40, 40}, {500, 500}, {500, 500}},
      {{7.8, 10.2}, {400.0 * 400.0, 400.0 * 400.0}, {60, 60}, {800, 800}, {800, 800}},
      {{10.2, 20.5}, {1000.0 * 1000.0, 1000.0 * 1000.0}, {100, 100}, {2000, 2000}, {2000, 2000}},
  };
  auto lerp = [](const TierRange& a, const TierRange& b, double f) {
    auto mix = [f](Range x, Range y) { return Range{x.lo + f * (y.lo - x.lo), x.hi + f * (y.hi - x.hi)}; };
    return TierRange{mix(a.mips, b.mips), mix(a.storage_gb, b.storage_gb), mix(a.ram_gb, b.ram_gb),
                     mix(a.up_mbps, b.up_mbps), mix(a.down_mbps, b.down_mbps)};
  };
  std::vector<TierRange> out;
  out.push_back(cols[0]);
  const int inner = tier_count - 2;
  for (int i = 1; i <= inner; ++i) {
    if (inner == 1)
      out.push_back(cols[1]);
    else
      out.push_back(lerp(cols[1], cols[2], static_cast<double>(i - 1) / (inner - 1)));
  }
  out.push_back(cols[3]);
  return out;
}

Topology::Topology(std::vector<FogNode> nodes, LatencyModel latency)
    : nodes_(std::move(nodes)), latency_(std::move(latency)) {
  latency_.validate();
  std::sort(nodes_.begin(), nodes_.end(), [](const FogNode& a, const FogNode& b) { return a.id < b.id; });
  std::size_t roots = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!index_.emplace(nodes_[i].id, i).second)
      throw InvalidInput("duplicate node id " + std::to_string(nodes_[i].id));
    tier_count_ = std::max(tier_count_, nodes_[i].tier + 1);
    if (!nodes_[i].parent) {
      ++roots;
      root_ = nodes_[i].id;
    }
  }
  if (roots != 1) root_ = -1;
}

const FogNode& Topology::node(NodeId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw LookupError("unknown node id " + std::to_string(id));
  return nodes_[it->second];
}

std::vector<std::size_t> Topology::tier_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(tier_count_), 0);
  for (const auto& n : nodes_) ++sizes[static_cast<std::size_t>(n.tier)];
  return sizes;
}

std::vector<NodeId> Topology::nodes_in_tier(int tier) const {
  std::vector<NodeId> out;
  for (const auto& n : nodes_)
    if (n.tier == tier) out.push_back(n.id);
  return out;
}

NodeId Topology::ancestor_at(NodeId id, int tier) const {
  const FogNode* n = &node(id);
  while (n->tier < tier) {
    if (!n->parent) throw LookupError("node " + std::to_string(id) + " has no ancestor at tier " + std::to_string(tier));
    n = &node(*n->parent);
  }
  return n->id;
}

std::vector<NodeId> Topology::path(NodeId from, NodeId to) const {
  std::vector<NodeId> up{from}, down{to};
  const FogNode* a = &node(from);
  const FogNode* b = &node(to);
  auto climb = [this](const FogNode*& n, std::vector<NodeId>& trail) {
    if (!n->parent) throw LookupError("nodes are not connected");
    n = &node(*n->parent);
    trail.push_back(n->id);
  };
  while (a->tier < b->tier) climb(a, up);
  while (b->tier < a->tier) climb(b, down);
  while (a->id != b->id) {
    climb(a, up);
    climb(b, down);
  }
  down.pop_back();  // LCA already at the end of `up`
  up.insert(up.end(), down.rbegin(), down.rend());
  return up;
}

int Topology::hop_count(NodeId from, NodeId to) const {
  return static_cast<int>(path(from, to).size()) - 1;
}

double Topology::hop_latency(int lower_tier) const {
  const auto& hops = latency_.hop_ms;
  if (lower_tier + 1 == tier_count_ - 1) return hops.back();
  if (hops.size() == 1) return hops[0];
  return hops[std::min<std::size_t>(static_cast<std::size_t>(lower_tier), hops.size() - 2)];
}

double Topology::processing_latency(NodeId id, double load_fraction) const {
  if (!(load_fraction >= 0.0 && load_fraction <= 1.0))
    throw InvalidInput("load fraction must lie in [0, 1]");
  const auto& n = node(id);
  const auto& proc = latency_.processing_ms;
  const double base = n.id == root_ ? latency_.root_processing_ms
                                    : proc[std::min<std::size_t>(static_cast<std::size_t>(n.tier), proc.size() - 1)];
  return base * (1.0 + latency_.load_penalty * load_fraction);
}

double Topology::latency(NodeId id, NodeId region, double load_fraction) const {
  if (node(region).tier != 0) throw LookupError("region " + std::to_string(region) + " is not a base station");
  const auto p = path(region, id);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i)
    total += hop_latency(std::min(node(p[i]).tier, node(p[i + 1]).tier));
  return total + processing_latency(id, load_fraction);
}

UndirectedGraph build_proximity_graph(std::span<const BaseStation> stations, double radius_m) {
  if (stations.empty()) throw InvalidInput("no base stations");
  if (!(radius_m > 0.0)) throw InvalidInput("radius must be > 0");
  std::vector<Point> pts;
  pts.reserve(stations.size());
  for (const auto& s : stations) pts.push_back(s.position);
  return kernels::proximity_graph(pts, radius_m);
}

namespace {

// Complete graph over `pts` weighted by a Gaussian proximity kernel whose
// bandwidth is the median nearest-neighbor distance.
WeightedGraph kernel_graph(const std::vector<Point>& pts) {
  const std::size_t n = pts.size();
  std::vector<double> nn(n, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) nn[i] = std::min(nn[i], distance(pts[i], pts[j]));
  std::vector<double> sorted = nn;
  std::sort(sorted.begin(), sorted.end());
  double sigma = n > 1 ? sorted[n / 2] : 1.0;
  if (!(sigma > 0.0) || !std::isfinite(sigma)) sigma = 1.0;
  WeightedGraph g;
  g.adj.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = distance(pts[i], pts[j]);
      const double w = std::exp(-d * d / (2.0 * sigma * sigma));
      g.adj[i].emplace_back(j, std::max(w, 1e-300));
    }
  return g;
}

}  // namespace

Topology build_hierarchy(std::span<const BaseStation> stations_in, const HierarchyOptions& opts) {
  if (stations_in.size() < 2) throw InvalidInput("hierarchy needs at least two base stations");
  if (opts.mu < 1) throw InvalidInput("mu must be >= 1");
  if (!(opts.radius_m > 0.0)) throw InvalidInput("radius must be > 0");

  std::vector<BaseStation> stations(stations_in.begin(), stations_in.end());
  std::sort(stations.begin(), stations.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < stations.size(); ++i) {
    if (i > 0 && stations[i].id == stations[i - 1].id)
      throw InvalidInput("duplicate station id " + std::to_string(stations[i].id));
    if (!(stations[i].coverage_radius_m > 0.0))
      throw InvalidInput("coverage radius must be > 0 for station " + std::to_string(stations[i].id));
  }

  std::vector<FogNode> nodes;
  for (const auto& s : stations) nodes.push_back(FogNode{s.id, 0, s.position, std::nullopt, {}, {}});
  NodeId next_id = stations.back().id + 1;

  auto add_parent = [&](const std::vector<std::size_t>& members, int tier) {
    FogNode up{next_id++, tier, {}, std::nullopt, {}, {}};
    for (auto m : members) {
      up.position.x += nodes[m].position.x;
      up.position.y += nodes[m].position.y;
      up.children.push_back(nodes[m].id);
      nodes[m].parent = up.id;
    }
    up.position.x /= static_cast<double>(members.size());
    up.position.y /= static_cast<double>(members.size());
    nodes.push_back(std::move(up));
    return nodes.size() - 1;
  };

  std::vector<std::size_t> current(nodes.size());
  std::iota(current.begin(), current.end(), 0);
  for (int level = 0;; ++level) {
    const std::size_t n = current.size();
    std::vector<Point> pts;
    for (auto i : current) pts.push_back(nodes[i].position);
    const auto seed = split_seed(opts.seed, static_cast<std::uint64_t>(level));

    Partition part;
    if (level == 0) {
      part = detect_communities(build_proximity_graph(stations, opts.radius_m), seed);
      if (community_count(part) == n) {
        // no edge merged anything: fall back to geographic affinity
        const auto w = kernel_graph(pts);
        part = louvain(w, seed);
        if (community_count(part) == n) part = agglomerative_best(w, 1, n - 1);
      }
    } else {
      const auto w = kernel_graph(pts);
      part = louvain(w, seed);
      const auto k = community_count(part);
      if (k == 1 || k == n) part = agglomerative_best(w, n >= 3 ? 2 : 1, n - 1);
    }

    const std::size_t k = community_count(part);
    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t v = 0; v < n; ++v) members[part[v]].push_back(current[v]);
    std::vector<std::size_t> added;
    for (const auto& m : members) added.push_back(add_parent(m, level + 1));

    if (k == 1) break;
    if (k <= static_cast<std::size_t>(opts.mu)) {
      add_parent(added, level + 2);
      break;
    }
    current = std::move(added);
  }
  return Topology(std::move(nodes), opts.latency);
}

void assign_resources(Topology& topology, std::span<const TierRange> ranges, std::uint64_t seed) {
  if (ranges.size() < static_cast<std::size_t>(topology.tier_count()))
    throw ConfigError("tier ranges cover " + std::to_string(ranges.size()) + " tiers, topology has " +
                      std::to_string(topology.tier_count()));
  auto check = [](Range r) {
    if (!(r.lo > 0.0) || !(r.hi >= r.lo)) throw ConfigError("resource ranges must satisfy 0 < lo <= hi");
  };
  for (const auto& t : ranges) {
    check(t.mips);
    check(t.storage_gb);
    check(t.ram_gb);
    check(t.up_mbps);
    check(t.down_mbps);
  }
  Rng rng(seed);
  for (auto& n : topology.mutable_nodes()) {
    const auto& t = ranges[static_cast<std::size_t>(n.tier)];
    n.resources.mips = uniform(rng, t.mips.lo, t.mips.hi);
    n.resources.storage_gb = uniform(rng, t.storage_gb.lo, t.storage_gb.hi);
    n.resources.ram_gb = uniform(rng, t.ram_gb.lo, t.ram_gb.hi);
    n.resources.up_mbps = uniform(rng, t.up_mbps.lo, t.up_mbps.hi);
    n.resources.down_mbps = uniform(rng, t.down_mbps.lo, t.down_mbps.hi);
  }
}

std::vector<std::string> check_invariants(const Topology& topo) {
  std::vector<std::string> out;
  std::size_t roots = 0;
  for (const auto& n : topo.nodes()) {
    if (!n.parent) {
      ++roots;
      continue;
    }
    if (!topo.contains(*n.parent)) {
      out.push_back("node " + std::to_string(n.id) + " has unknown parent");
      continue;
    }
    const auto& p = topo.node(*n.parent);
    if (p.tier != n.tier + 1) out.push_back("node " + std::to_string(n.id) + ": parent tier mismatch");
    if (std::find(p.children.begin(), p.children.end(), n.id) == p.children.end())
      out.push_back("node " + std::to_string(n.id) + " missing from parent's children");
  }
  if (roots != 1) out.push_back("expected exactly one root, found " + std::to_string(roots));
  if (topo.tier_count() < 2) out.push_back("fewer than two tiers");
  const auto sizes = topo.tier_sizes();
  for (std::size_t t = 1; t < sizes.size(); ++t)
    if (sizes[t] >= sizes[t - 1])
      out.push_back("tier " + std::to_string(t) + " is not smaller than tier " + std::to_string(t - 1));
  if (roots == 1) {
    for (auto bs : topo.base_stations()) {
      const FogNode* n = &topo.node(bs);
      std::set<NodeId> seen;
      while (n->parent && seen.insert(n->id).second && topo.contains(*n->parent)) n = &topo.node(*n->parent);
      if (n->id != topo.root()) out.push_back("base station " + std::to_string(bs) + " not reachable from root");
    }
  }
  return out;
}

std::vector<BaseStation> random_stations(std::size_t count, double width_m, double height_m,
                                         double coverage_radius_m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<BaseStation> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = uniform(rng, 0.0, width_m);
    const double y = uniform(rng, 0.0, height_m);
    out.push_back({static_cast<NodeId>(i), {x, y}, coverage_radius_m});
  }
  return out;
}

std::vector<BaseStation> parse_stations_csv(std::string_view text, bool latlon) {
  std::vector<std::string_view> lines;
  for (auto& l : split_fields(text, '\n'))
    if (!trim(l).empty()) lines.push_back(l);
  if (lines.empty()) throw FormatError("station file is empty");

  const auto header = split_fields(trim(lines[0]), ',');
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[std::string(trim(header[i]))] = i;
  const char* xs = latlon ? "lon" : "x_m";
  const char* ys = latlon ? "lat" : "y_m";
  for (const char* need : {"id", xs, ys, "coverage_radius_m"})
    if (!col.count(need)) throw FormatError(std::string("station header lacks column '") + need + "'");

  std::vector<BaseStation> out;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto f = split_fields(trim(lines[li]), ',');
    if (f.size() < header.size()) throw FormatError("station line " + std::to_string(li + 1) + " is short");
    out.push_back({parse_int(f[col["id"]], "id"),
                   {parse_double(f[col[xs]], xs), parse_double(f[col[ys]], ys)},
                   parse_double(f[col["coverage_radius_m"]], "coverage_radius_m")});
  }
  if (out.empty()) throw InvalidInput("station file has no rows");
  if (latlon) {
    // local equirectangular projection about the centroid
    double lat0 = 0.0, lon0 = 0.0;
    for (const auto& s : out) {
      lon0 += s.position.x;
      lat0 += s.position.y;
    }
    lat0 /= static_cast<double>(out.size());
    lon0 /= static_cast<double>(out.size());
    constexpr double kEarthRadius = 6371000.0;
    const double rad = std::numbers::pi / 180.0;
    for (auto& s : out) {
      const double lon = s.position.x, lat = s.position.y;
      s.position = {kEarthRadius * std::cos(lat0 * rad) * (lon - lon0) * rad, kEarthRadius * (lat - lat0) * rad};
    }
  }
  return out;
}

}  // namespace fogplace
