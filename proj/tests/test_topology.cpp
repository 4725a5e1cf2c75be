#include <doctest.h>

#include <algorithm>

#include "fogplace/community.hpp"
#include "fogplace/error.hpp"
#include "fogplace/rng.hpp"
#include "fogplace/topology.hpp"
#include "oracles.hpp"

using namespace fogplace;

namespace {

std::vector<std::vector<std::size_t>> adjacency(const UndirectedGraph& g) { return g.adj; }

UndirectedGraph from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  UndirectedGraph g;
  g.adj.resize(n);
  for (auto [a, b] : edges) {
    g.adj[a].push_back(b);
    g.adj[b].push_back(a);
  }
  for (auto& l : g.adj) std::sort(l.begin(), l.end());
  return g;
}

UndirectedGraph random_graph(std::size_t n, double p, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (uniform(rng, 0.0, 1.0) < p) e.emplace_back(i, j);
  return from_edges(n, e);
}

}  // namespace

TEST_SUITE("topology") {
  TEST_CASE("proximity edges include the radius boundary") {
    std::vector<BaseStation> st{{0, {0, 0}, 500}, {1, {2999, 0}, 500}, {2, {6000, 0}, 500}};
    const auto g = build_proximity_graph(st, 3000.0);
    CHECK(g.has_edge(0, 1));
    CHECK_FALSE(g.has_edge(1, 2));  // 3001 m
    CHECK(g.edge_count() == 1);
    CHECK_THROWS_AS(build_proximity_graph({}, 3000.0), InvalidInput);
  }

  TEST_CASE("proximity graph equals pairwise distance brute force") {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto st = random_stations(50, 10000, 10000, 1000, s);
      const auto g = build_proximity_graph(st, 3000.0);
      for (std::size_t i = 0; i < st.size(); ++i)
        for (std::size_t j = 0; j < st.size(); ++j) {
          const bool want = i != j && distance(st[i].position, st[j].position) <= 3000.0;
          REQUIRE(g.has_edge(i, j) == want);
        }
    }
  }

  TEST_CASE("modularity matches the textbook formula") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto g = random_graph(9, 0.4, s);
      Rng rng(s);
      Partition p(9);
      for (auto& l : p) l = rng() % 3;
      CHECK(modularity(WeightedGraph::from(g), p) == doctest::Approx(oracle::modularity(g.adj, p)).epsilon(1e-12));
    }
  }

  TEST_CASE("two 4-cliques joined by a bridge split into the cliques") {
    std::vector<std::pair<std::size_t, std::size_t>> e;
    for (std::size_t base : {0u, 4u})
      for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j) e.emplace_back(base + i, base + j);
    e.emplace_back(3, 4);
    const auto g = from_edges(8, e);
    const auto p = detect_communities(g, 7);
    CHECK(community_count(p) == 2);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(p[i] == p[0]);
      CHECK(p[4 + i] == p[4]);
    }
    std::vector<std::size_t> best;
    const double q_best = oracle::best_modularity(adjacency(g), &best);
    CHECK(modularity(WeightedGraph::from(g), p) == doctest::Approx(q_best).epsilon(1e-12));
  }

  TEST_CASE("graph without edges keeps every vertex alone") {
    const auto g = from_edges(5, {});
    CHECK(community_count(detect_communities(g, 1)) == 5);
  }

  TEST_CASE("louvain beats both trivial partitions and is deterministic") {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto g = random_graph(30, 0.15, 100 + s);
      const auto w = WeightedGraph::from(g);
      const auto p = detect_communities(g, s);
      REQUIRE(p.size() == 30);
      CHECK(p == canonicalize(p));
      const double q = modularity(w, p);
      CHECK(q >= modularity(w, Partition(30, 0)) - 1e-12);
      Partition singles(30);
      for (std::size_t i = 0; i < 30; ++i) singles[i] = i;
      CHECK(q >= modularity(w, singles) - 1e-12);
      CHECK(detect_communities(g, s) == p);
    }
  }

  TEST_CASE("louvain is at or near the exhaustive optimum on small graphs") {
    int optimal = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto g = random_graph(8, 0.35, 300 + s);
      const double q = modularity(WeightedGraph::from(g), detect_communities(g, s));
      const double best = oracle::best_modularity(g.adj);
      CHECK(q <= best + 1e-12);
      CHECK(q >= best - 0.05);
      optimal += q >= best - 1e-9;
    }
    CHECK(optimal >= 6);
  }

  TEST_CASE("four mutually close stations collapse to one cloudlet that is the root") {
    std::vector<BaseStation> st{{1, {0, 0}, 500}, {2, {100, 0}, 500}, {3, {0, 100}, 500}, {4, {100, 100}, 500}};
    const auto t = build_hierarchy(st, HierarchyOptions{});
    CHECK(t.tier_sizes() == std::vector<std::size_t>{4, 1});
    CHECK(t.tier_count() == 2);
    CHECK(t.node(t.root()).position.x == doctest::Approx(50.0));
    CHECK(check_invariants(t).empty());
  }

  TEST_CASE("hierarchy invariants on seeded layouts") {
    for (std::uint64_t s = 0; s < 10; ++s)
      for (int mu : {1, 2, 3}) {
        const auto st = random_stations(100, 15000, 15000, 1500, s);
        HierarchyOptions h;
        h.mu = mu;
        h.seed = s;
        const auto t = build_hierarchy(st, h);
        REQUIRE(check_invariants(t).empty());
        const auto sizes = t.tier_sizes();
        CHECK(sizes.front() == 100);
        CHECK(sizes.back() == 1);
        for (auto id : t.base_stations()) CHECK(t.ancestor_at(id, t.tier_count() - 1) == t.root());
        for (const auto& n : t.nodes())
          if (n.parent) CHECK(t.node(*n.parent).tier == n.tier + 1);
      }
  }

  TEST_CASE("added nodes sit at the centroid of their children") {
    const auto t = build_hierarchy(random_stations(40, 10000, 10000, 1500, 4), HierarchyOptions{});
    for (const auto& n : t.nodes()) {
      if (n.children.empty()) continue;
      double x = 0, y = 0;
      for (auto c : n.children) {
        x += t.node(c).position.x;
        y += t.node(c).position.y;
      }
      CHECK(n.position.x == doctest::Approx(x / static_cast<double>(n.children.size())));
      CHECK(n.position.y == doctest::Approx(y / static_cast<double>(n.children.size())));
    }
  }

  TEST_CASE("hierarchy input validation") {
    const auto st = random_stations(10, 1000, 1000, 500, 1);
    HierarchyOptions h;
    h.mu = 0;
    CHECK_THROWS_AS(build_hierarchy(st, h), InvalidInput);
    CHECK_THROWS_AS(build_hierarchy({}, HierarchyOptions{}), InvalidInput);
    auto dup = st;
    dup[1].id = dup[0].id;
    CHECK_THROWS_AS(build_hierarchy(dup, HierarchyOptions{}), InvalidInput);
  }

  TEST_CASE("resources follow the reference tier ranges") {
    auto t = build_hierarchy(random_stations(60, 20000, 20000, 1500, 2), HierarchyOptions{});
    REQUIRE(t.tier_count() == 4);
    assign_resources(t, default_tier_ranges(4), 11);
    for (const auto& n : t.nodes()) {
      if (n.tier == 0) {
        CHECK(n.resources.mips >= 2.8);
        CHECK(n.resources.mips <= 5.3);
        CHECK(n.resources.ram_gb == 25.0);
        CHECK(n.resources.storage_gb == 100.0 * 100.0);
      }
      if (n.tier == 3) {
        CHECK(n.resources.mips >= 10.2);
        CHECK(n.resources.up_mbps == 2000.0);
      }
    }
    auto again = t;
    assign_resources(again, default_tier_ranges(4), 11);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(t.nodes()[i].resources.mips == again.nodes()[i].resources.mips);

    auto ranges = default_tier_ranges(4);
    ranges[1].mips = {5.0, 5.0};
    assign_resources(t, ranges, 3);
    for (auto id : t.nodes_in_tier(1)) CHECK(t.node(id).resources.mips == 5.0);
    CHECK_THROWS_AS(assign_resources(t, default_tier_ranges(3), 3), ConfigError);
  }

  TEST_CASE("tier range maxima grow toward the root") {
    for (int tiers = 2; tiers <= 6; ++tiers) {
      const auto r = default_tier_ranges(tiers);
      REQUIRE(r.size() == static_cast<std::size_t>(tiers));
      for (int k = 1; k < tiers; ++k) CHECK(r[k].mips.hi > r[k - 1].mips.hi);
    }
  }

  TEST_CASE("latency model") {
    auto t = build_hierarchy(random_stations(60, 20000, 20000, 1500, 2), HierarchyOptions{});
    const auto bs = t.base_stations();
    const auto& lm = t.latency_model();
    CHECK(t.latency(bs[0], bs[0], 0.0) == doctest::Approx(lm.processing_ms[0]));
    for (auto b : bs) {
      const auto up = t.node(b).parent.value();
      CHECK(t.latency(up, b, 1.0) >= t.latency(up, b, 0.0));
      CHECK(t.latency(up, b, 0.0) > t.latency(b, b, 0.0));
      CHECK(t.latency(t.root(), b, 0.0) > t.latency(up, b, 0.0));
      CHECK(t.latency(t.ancestor_at(b, 2), b, 1.0) < 100.0);
    }
    CHECK(t.latency(t.root(), bs[0], 1.0) >= 100.0);
    CHECK_THROWS_AS(t.latency(999999, bs[0], 0.0), LookupError);
    CHECK_THROWS_AS(t.latency(bs[0], t.root(), 0.0), LookupError);
    CHECK_THROWS_AS(t.latency(bs[0], bs[0], 1.5), InvalidInput);
  }

  TEST_CASE("station CSV parsing") {
    const auto st = parse_stations_csv("id,x_m,y_m,coverage_radius_m\n3,10,20,500\n4,30,40,600\n", false);
    REQUIRE(st.size() == 2);
    CHECK(st[1].id == 4);
    CHECK(st[1].position.y == 40.0);
    CHECK_THROWS_AS(parse_stations_csv("id,x,y\n1,2,3\n", false), FormatError);
    const auto ll = parse_stations_csv("id,lat,lon,coverage_radius_m\n1,45.46,9.18,500\n2,45.47,9.18,500\n", true);
    CHECK(distance(ll[0].position, ll[1].position) == doctest::Approx(1112.0).epsilon(0.01));
  }
}
