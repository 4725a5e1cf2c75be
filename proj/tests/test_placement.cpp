#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "fogplace/error.hpp"
#include "fogplace/mincost_flow.hpp"
#include "fogplace/placement.hpp"
#include "fogplace/rng.hpp"
#include "fogplace/strategies.hpp"
#include "oracles.hpp"

using namespace fogplace;

namespace {

PlacementInstance random_instance(Rng& rng, std::size_t F, std::size_t D, int max_value, int services, double cap) {
  auto draw = [&](int lo, int hi) { return static_cast<double>(std::uniform_int_distribution<int>(lo, hi)(rng)); };
  PlacementInstance in;
  for (std::size_t f = 0; f < F; ++f) in.facilities.push_back({static_cast<NodeId>(f), draw(1, max_value), 1.0});
  for (std::size_t d = 0; d < D; ++d)
    in.demands.push_back({static_cast<NodeId>(d), static_cast<int>(d % static_cast<std::size_t>(services)),
                          draw(1, max_value)});
  for (std::size_t k = 0; k < F * D; ++k) in.latency.push_back(draw(1, max_value));
  in.latency_cap_ms = cap;
  return in;
}

PlacementInstance two_facility_example() {
  PlacementInstance in;
  in.facilities = {{1, 5.0, 1.0}, {2, 5.0, 1.0}};
  in.demands = {{7, 0, 8.0}};
  in.latency = {1.0, 10.0};
  return in;
}

struct Scene {
  Topology topo;
  NodeState state;
  DemandSnapshot snap;
};

Scene scene(std::uint64_t seed) {
  Scene s;
  s.topo = build_hierarchy(random_stations(20, 10000, 10000, 1500, seed), HierarchyOptions{});
  assign_resources(s.topo, default_tier_ranges(s.topo.tier_count()), seed);
  s.state = initial_node_state(s.topo, 0.01);
  SynthConfig cfg;
  cfg.days = 1;
  const auto series = synth_workload(cfg, seed);
  s.snap = demand_snapshots(series, ServiceSpec{})[60];
  return s;
}

}  // namespace

TEST_SUITE("placement") {
  TEST_CASE("single facility example") {
    PlacementInstance in;
    in.facilities = {{1, 10.0, 1.0}};
    in.demands = {{3, 0, 4.0}};
    in.latency = {2.0};
    const auto ex = solve_exact(in);
    CHECK(ex.status == SolveStatus::optimal);
    CHECK(ex.objective == doctest::Approx(9.0));
    CHECK(ex.x(0, 0, 1) == doctest::Approx(4.0));
    const auto he = solve_heuristic(in, 1);
    CHECK(he.objective == doctest::Approx(9.0));
    CHECK(he.open == ex.open);
  }

  TEST_CASE("two facilities must both open for a demand of 8") {
    const auto in = two_facility_example();
    const auto ex = solve_exact(in);
    REQUIRE(ex.status == SolveStatus::optimal);
    CHECK(ex.x(0, 0, 1) == doctest::Approx(5.0));
    CHECK(ex.x(1, 0, 1) == doctest::Approx(3.0));
    CHECK(ex.objective == doctest::Approx(37.0));
    CHECK(objective(in, ex) == doctest::Approx(37.0));
    CHECK(verify(in, ex).feasible);
  }

  TEST_CASE("exact solver equals exhaustive enumeration") {
    for (std::uint64_t s = 0; s < 150; ++s) {
      Rng rng(s);
      const std::size_t F = 1 + s % 4, D = 1 + s % 5;
      auto in = random_instance(rng, F, D, 10, 1 + static_cast<int>(s % 2), s % 3 == 0 ? 6.0 : 100.0);
      in.facility_weight = s % 4 == 1 ? 4.0 : 1.0;
      const auto bf = oracle::brute_force(in);
      const auto ex = solve_exact(in);
      if (!bf.feasible) {
        CHECK(ex.status == SolveStatus::infeasible);
        CHECK(ex.uncovered_volume() > 0.0);
        continue;
      }
      REQUIRE(ex.status == SolveStatus::optimal);
      CHECK(ex.objective == doctest::Approx(bf.objective).epsilon(1e-9));
      CHECK(verify(in, ex).feasible);
    }
  }

  TEST_CASE("dense transport solver matches cycle canceling") {
    const double inf = std::numeric_limits<double>::infinity();
    for (std::uint64_t s = 0; s < 100; ++s) {
      Rng rng(s);
      const std::size_t S = 1 + s % 6, T = 1 + (s / 6) % 5;
      std::vector<double> supply(S), cap(T), cost(S * T);
      std::vector<std::vector<double>> cost2(T, std::vector<double>(S));
      for (auto& x : supply) x = std::round(uniform(rng, 1, 10));
      for (auto& x : cap) x = std::round(uniform(rng, 1, 12));
      for (std::size_t j = 0; j < T; ++j)
        for (std::size_t i = 0; i < S; ++i)
          cost[j * S + i] = cost2[j][i] = uniform(rng, 0, 1) < 0.2 ? inf : std::round(uniform(rng, 0, 20));
      const auto got = solve_transport(supply, cap, cost);
      const auto want = oracle::cycle_canceling(supply, cap, cost2);
      CHECK(got.total == doctest::Approx(want.shipped));
      CHECK(got.cost == doctest::Approx(want.cost));
      for (std::size_t i = 0; i < S; ++i) CHECK(got.shipped[i] <= supply[i] + 1e-9);
    }
  }

  TEST_CASE("min cost flow on a small network") {
    MinCostFlow g(4);
    const auto a = g.add_edge(0, 1, 2, 1);
    g.add_edge(0, 2, 2, 3);
    g.add_edge(1, 3, 3, 1);
    g.add_edge(2, 3, 3, 1);
    const auto r = g.solve(0, 3, 3);
    CHECK(r.flow == doctest::Approx(3.0));
    CHECK(r.cost == doctest::Approx(2 * 2 + 1 * 4));
    CHECK(g.flow(a) == doctest::Approx(2.0));
  }

  TEST_CASE("verify reports each kind of violation") {
    const auto in = two_facility_example();
    auto sol = solve_exact(in);
    REQUIRE(verify(in, sol).violations.empty());

    auto closed = sol;
    closed.open[1] = 0.0;  // still assigns 3 units to facility 2
    CHECK_FALSE(verify(in, closed).feasible);

    auto unbalanced = sol;
    unbalanced.assignment[0] = 4.0;
    CHECK_FALSE(verify(in, unbalanced).feasible);

    auto negative = sol;
    negative.assignment[0] = 6.0;
    negative.assignment[1] = -1.0;
    CHECK(verify(in, negative).violations.size() >= 2);  // negative flow and capacity

    auto fractional = sol;
    fractional.open[0] = 0.5;
    CHECK_FALSE(verify(in, fractional).feasible);

    auto capped = in;
    capped.latency_cap_ms = 5.0;  // arc to facility 2 is now unusable
    CHECK_FALSE(verify(capped, sol).feasible);
  }

  TEST_CASE("verify agrees with an independent recomputation on perturbed solutions") {
    for (std::uint64_t s = 0; s < 200; ++s) {
      Rng rng(s);
      auto in = random_instance(rng, 3, 4, 10, 1, 100.0);
      for (auto& f : in.facilities) f.capacity += 10.0;
      auto sol = solve_exact(in);
      REQUIRE(sol.status == SolveStatus::optimal);
      const std::size_t k = rng() % sol.assignment.size();
      sol.assignment[k] += std::round(uniform(rng, -3, 3));
      const std::size_t F = 3, D = 4;
      bool ok = true;
      for (std::size_t d = 0; d < D; ++d) {
        double sum = 0.0;
        for (std::size_t f = 0; f < F; ++f) sum += sol.x(f, d, D);
        ok &= std::abs(sum - in.demands[d].volume) <= 1e-9 * in.demands[d].volume;
      }
      for (std::size_t f = 0; f < F; ++f) {
        double used = 0.0;
        for (std::size_t d = 0; d < D; ++d) {
          ok &= sol.x(f, d, D) >= 0.0;
          ok &= sol.x(f, d, D) == 0.0 || sol.open[f] == 1.0;
          used += sol.x(f, d, D);
        }
        ok &= used <= in.facilities[f].capacity * (1 + 1e-9);
      }
      CHECK(verify(in, sol).feasible == ok);
    }
  }

  TEST_CASE("heuristic never beats the optimum and its trace never rises") {
    for (std::uint64_t s = 0; s < 60; ++s) {
      Rng rng(1000 + s);
      auto in = random_instance(rng, 2 + s % 6, 3 + s % 8, 30, 1 + static_cast<int>(s % 2), 25.0);
      for (auto& f : in.facilities) f.capacity += 5.0;
      if (in.capacity_infeasible()) continue;
      const auto ex = solve_exact(in);
      if (ex.status != SolveStatus::optimal) continue;
      const auto he = solve_heuristic(in, s);
      CHECK(he.objective >= ex.objective - 1e-9 * std::max(1.0, ex.objective));
      if (he.status != SolveStatus::infeasible) CHECK(verify(in, he).feasible);
      const auto& tr = he.diagnostics.objective_trace;
      for (std::size_t i = 1; i < tr.size(); ++i) CHECK(tr[i] <= tr[i - 1] + 1e-9);
      CHECK(solve_heuristic(in, s).open == he.open);
    }
  }

  TEST_CASE("an inadmissible facility changes nothing") {
    for (std::uint64_t s = 0; s < 30; ++s) {
      Rng rng(s);
      auto in = random_instance(rng, 4, 5, 10, 1, 50.0);
      const auto ex = solve_exact(in);
      const auto he = solve_heuristic(in, s);
      auto more = in;
      more.facilities.push_back({99, 100.0, 1.0});
      const std::size_t D = in.demand_count();
      more.latency.insert(more.latency.end(), D, 1000.0);
      const auto ex2 = solve_exact(more);
      const auto he2 = solve_heuristic(more, s);
      CHECK(ex2.status == ex.status);
      CHECK(ex2.objective == doctest::Approx(ex.objective));
      CHECK(he2.objective == doctest::Approx(he.objective));
      CHECK_FALSE(ex2.facility_open(4));
    }
  }

  TEST_CASE("scaling latencies and open costs together keeps the open set") {
    for (std::uint64_t s = 0; s < 40; ++s) {
      Rng rng(s);
      auto in = random_instance(rng, 4, 5, 10, 1 + static_cast<int>(s % 2), 100.0);
      for (auto& f : in.facilities) f.capacity += 8.0;
      const auto a = solve_exact(in);
      auto scaled = in;
      const double c = 0.5 + static_cast<double>(s % 5);
      for (auto& l : scaled.latency) l *= c;
      for (auto& f : scaled.facilities) f.open_cost *= c;
      scaled.latency_cap_ms *= c;
      const auto b = solve_exact(scaled);
      CHECK(b.open == a.open);
      CHECK(b.objective == doctest::Approx(c * a.objective));
    }
  }

  TEST_CASE("size limits and input validation") {
    Rng rng(1);
    const auto big = random_instance(rng, 13, 4, 10, 1, 100.0);
    CHECK_THROWS_AS(solve_exact(big), SizeLimitError);
    CHECK_FALSE(within_exact_limits(big));
    CHECK(solve_auto(big, 1).status != SolveStatus::optimal);
    auto bad = two_facility_example();
    bad.latency.pop_back();
    CHECK_THROWS_AS(solve_exact(bad), InvalidInput);
    PlacementInstance none;
    none.facilities = {{1, 1.0, 1.0}};
    CHECK(objective(none, empty_solution(none)) == 0.0);
  }

  TEST_CASE("capacity-infeasible instances keep a maximal partial placement") {
    PlacementInstance in;
    in.facilities = {{1, 3.0, 1.0}, {2, 2.0, 1.0}};
    in.demands = {{1, 0, 4.0}, {2, 0, 4.0}};
    in.latency = {1, 2, 3, 4};
    REQUIRE(in.capacity_infeasible());
    for (const auto& sol : {solve_exact(in), solve_heuristic(in, 0)}) {
      CHECK(sol.status == SolveStatus::infeasible);
      CHECK(sol.placed_volume() == doctest::Approx(5.0));
      CHECK(sol.uncovered_volume() == doctest::Approx(3.0));
    }
  }

  TEST_CASE("instances built from a topology") {
    auto sc = scene(3);
    REQUIRE_FALSE(sc.snap.demands.empty());
    auto inst = build_instance(sc.topo, sc.snap, sc.state);
    std::size_t with_room = 0;
    for (const auto& [id, s] : sc.state) with_room += s.free_for_multimedia() > 0.0;
    CHECK(inst.facility_count() == with_room);
    CHECK(inst.demand_count() == sc.snap.demands.size());
    CHECK(inst.latency.size() == with_room * sc.snap.demands.size());
    for (std::size_t f = 0; f < inst.facility_count(); ++f)
      for (std::size_t d = 0; d < inst.demand_count(); ++d)
        CHECK(inst.lat(f, d) == doctest::Approx(sc.topo.latency(inst.facilities[f].node_id, inst.demands[d].region_id, 0.0)));

    const auto first = sc.state.begin()->first;
    sc.state[first].concurrent = sc.state[first].capacity;
    const auto fewer = build_instance(sc.topo, sc.snap, sc.state);
    CHECK(fewer.facility_count() == with_room - 1);
    CHECK_THROWS_AS(build_instance(sc.topo, DemandSnapshot{}, sc.state), InvalidInput);
  }

  TEST_CASE("baseline strategies are feasible and never beat the optimum") {
    for (std::uint64_t s = 0; s < 5; ++s) {
      auto sc = scene(s);
      if (sc.snap.demands.empty()) continue;
      const auto inst = build_instance(sc.topo, sc.snap, sc.state);
      const auto best = solve_auto(inst, s);
      for (const auto& sol : {strategy_da(inst, sc.topo), strategy_qoeap(inst, sc.topo)}) {
        if (sol.status == SolveStatus::infeasible) continue;
        CHECK(verify(inst, sol).feasible);
        if (best.status == SolveStatus::optimal) CHECK(sol.objective >= best.objective - 1e-9);
      }
    }
  }

  TEST_CASE("DA fills the base station first and spills the overflow upward") {
    Topology topo = build_hierarchy(random_stations(12, 8000, 8000, 1500, 2), HierarchyOptions{});
    const auto bs = topo.base_stations();
    const auto parent = topo.node(bs[0]).parent.value();
    // the only tier-0 facility is the demand's own station
    PlacementInstance in;
    std::vector<NodeId> ids;
    for (const auto& n : topo.nodes()) {
      if (n.tier == 0 && n.id != bs[0]) continue;
      in.facilities.push_back({n.id, n.id == bs[0] ? 3.0 : 100.0, 1.0});
      ids.push_back(n.id);
    }
    in.demands = {{bs[0], 0, 5.0}};
    in.latency_cap_ms = 1000.0;
    for (auto id : ids) in.latency.push_back(topo.latency(id, bs[0], 0.0));
    const auto sol = strategy_da(in, topo);
    for (std::size_t f = 0; f < ids.size(); ++f) {
      const double x = sol.x(f, 0, 1);
      if (ids[f] == bs[0]) CHECK(x == doctest::Approx(3.0));
      else if (ids[f] == parent) CHECK(x == doctest::Approx(2.0));
      else CHECK(x == 0.0);
    }

    const auto own = static_cast<std::size_t>(std::find(ids.begin(), ids.end(), bs[0]) - ids.begin());
    in.facilities[own].capacity = 100.0;
    const auto ample = strategy_da(in, topo);
    for (std::size_t f = 0; f < ids.size(); ++f) CHECK(ample.x(f, 0, 1) == (ids[f] == bs[0] ? 5.0 : 0.0));
  }

  TEST_CASE("DA prefers a tier sibling over the tier above") {
    Topology topo = build_hierarchy(random_stations(12, 8000, 8000, 1500, 2), HierarchyOptions{});
    const auto bs = topo.base_stations();
    PlacementInstance in;
    for (const auto& n : topo.nodes()) in.facilities.push_back({n.id, n.id == bs[0] ? 3.0 : 100.0, 1.0});
    in.demands = {{bs[0], 0, 5.0}};
    in.latency_cap_ms = 1000.0;
    for (const auto& n : topo.nodes()) in.latency.push_back(topo.latency(n.id, bs[0], 0.0));
    const auto sol = strategy_da(in, topo);
    double tier0 = 0.0;
    for (std::size_t f = 0; f < in.facility_count(); ++f)
      if (topo.node(in.facilities[f].node_id).tier == 0) tier0 += sol.x(f, 0, 1);
    CHECK(tier0 == doctest::Approx(5.0));
  }

  TEST_CASE("single facility: DA, QoEAP and exact coincide") {
    Topology topo = build_hierarchy(random_stations(6, 3000, 3000, 1500, 4), HierarchyOptions{});
    const auto b = topo.base_stations()[0];
    PlacementInstance in;
    in.facilities = {{b, 10.0, 1.0}};
    in.demands = {{b, 0, 6.0}};
    in.latency = {topo.latency(b, b, 0.0)};
    const auto ex = solve_exact(in);
    CHECK(strategy_da(in, topo).objective == doctest::Approx(ex.objective));
    CHECK(strategy_qoeap(in, topo).objective == doctest::Approx(ex.objective));
  }
}
