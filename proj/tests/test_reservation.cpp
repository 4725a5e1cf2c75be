#include <doctest.h>

#include <algorithm>

#include "fogplace/error.hpp"
#include "fogplace/reservation.hpp"
#include "fogplace/rng.hpp"

using namespace fogplace;

namespace {

bool subset(const NodeSet& a, const NodeSet& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

struct Scene {
  Topology topo;
  NodeState state;
};

Scene scene() {
  Scene s;
  s.topo = build_hierarchy(random_stations(16, 9000, 9000, 1500, 6), HierarchyOptions{});
  assign_resources(s.topo, default_tier_ranges(s.topo.tier_count()), 6);
  s.state = initial_node_state(s.topo, 0.01);
  return s;
}

}  // namespace

TEST_SUITE("reservation") {
  TEST_CASE("reserved and adequate sets of the walkthrough") {
    constexpr NodeId B = 2, C = 3, D = 4, E = 5;
    const auto r = reserve({E, C}, {E, C, D});
    CHECK(r.Y == NodeSet{E, C});
    CHECK(r.Gamma == NodeSet{E, C, D});
    const auto disjoint = reserve({B}, {C, D});
    CHECK(disjoint.Y.empty());
    CHECK(disjoint.Gamma == NodeSet{C, D});
    const auto same = reserve({C, D}, {C, D});
    CHECK(same.Y == NodeSet{C, D});
    CHECK(same.Gamma == NodeSet{C, D});
  }

  TEST_CASE("set algebra properties on random pairs") {
    Rng rng(17);
    for (int i = 0; i < 500; ++i) {
      NodeSet a, p;
      for (NodeId k = 0; k < 10; ++k) {
        if (rng() % 2) a.insert(k);
        if (rng() % 3 == 0) p.insert(k);
      }
      const auto r = reserve(a, p);
      CHECK(subset(r.Y, a));
      CHECK(subset(r.Y, p));
      CHECK(subset(p, r.Gamma));
      CHECK(subset(r.Y, r.Gamma));
      CHECK(r.Gamma == p);  // Y is already inside P
    }
  }

  TEST_CASE("planning reserves the predicted need, capped by free capacity") {
    auto sc = scene();
    const auto bs = sc.topo.base_stations();
    const NodeId a = bs[0], b = bs[1], c = bs[2];
    PredictedPlacement pred;
    pred.nodes = {a, b};
    pred.volume = {{a, 2.0}, {b, 1e9}};
    const double b_free = sc.state[b].free_for_multimedia();
    const auto plan = plan_reservation(7, {a, b, c}, pred, sc.state);
    CHECK(plan.t_next == 7);
    CHECK(plan.check(pred.nodes).empty());
    CHECK(plan.reserved_capacity.at(a) == 2.0);
    CHECK(plan.reserved_capacity.at(b) == doctest::Approx(b_free));
    CHECK(sc.state[a].reserved == 2.0);
    CHECK(sc.state[c].reserved == 0.0);
    CHECK_FALSE(plan.reserved_capacity.count(c));
    for (const auto& [n, v] : plan.reserved_capacity) CHECK(v <= sc.state[n].capacity);

    ReservationPlan broken = plan;
    broken.Gamma.erase(a);
    CHECK_FALSE(broken.check(pred.nodes).empty());
    broken = plan;
    broken.reserved_capacity[c] = 1.0;
    CHECK_FALSE(broken.check(pred.nodes).empty());
  }

  TEST_CASE("no conflict: full reservation and no migrations") {
    auto sc = scene();
    const NodeId e = sc.topo.base_stations()[0];
    PredictedPlacement pred;
    pred.nodes = {e};
    pred.volume = {{e, 1.0}};
    auto plan = plan_reservation(1, {e}, pred, sc.state);
    apply_reservation(sc.topo, sc.state, plan, {{0, e, e, 0.5, 150.0}});
    CHECK(plan.migrations.empty());
    CHECK(plan.waivers.empty());
    CHECK(plan.reserved_capacity.at(e) == 1.0);
    CHECK(sc.state[e].concurrent == 0.5);
  }

  TEST_CASE("a conflicting service moves to the nearest node outside Gamma") {
    auto sc = scene();
    const auto bs = sc.topo.base_stations();
    const NodeId e = bs[0], c = bs[1];
    const double cap = sc.state[e].capacity;
    PredictedPlacement pred;
    pred.nodes = {e, c};
    pred.volume = {{e, cap}, {c, 1.0}};
    auto plan = plan_reservation(1, {e, c}, pred, sc.state);
    REQUIRE(plan.reserved_capacity.at(e) == doctest::Approx(cap));
    const double amount = 0.25 * cap;
    const auto before = sc.state;
    apply_reservation(sc.topo, sc.state, plan, {{4, e, e, amount, 150.0}});
    REQUIRE(plan.migrations.size() == 1);
    const auto m = plan.migrations[0];
    CHECK(m.service == 4);
    CHECK(m.from == e);
    CHECK_FALSE(plan.Gamma.count(m.to));
    CHECK(sc.state[m.to].concurrent == doctest::Approx(amount));
    CHECK(sc.state[e].reserved == doctest::Approx(cap));
    // oracle: lowest latency among nodes outside Gamma with room, ties by id
    NodeId want = -1;
    double best = 1e300;
    for (const auto& [id, l] : before) {
      if (plan.Gamma.count(id) || l.capacity - l.concurrent - l.reserved < amount) continue;
      const double lat = sc.topo.latency(id, e, l.load_fraction());
      if (lat <= 150.0 && lat < best) {
        best = lat;
        want = id;
      }
    }
    CHECK(m.to == want);
  }

  TEST_CASE("without a migration target the reservation yields the conflicting amount") {
    auto sc = scene();
    const NodeId e = sc.topo.base_stations()[0];
    const double cap = sc.state[e].capacity;
    for (auto& [id, l] : sc.state)
      if (id != e) l.concurrent = l.capacity;  // nowhere to go
    PredictedPlacement pred;
    pred.nodes = {e};
    pred.volume = {{e, 0.8 * cap}};
    auto plan = plan_reservation(1, {e}, pred, sc.state);
    apply_reservation(sc.topo, sc.state, plan, {{9, e, e, 0.5 * cap, 150.0}});
    CHECK(plan.migrations.empty());
    REQUIRE(plan.waivers.size() == 1);
    CHECK(plan.waivers[0].amount == doctest::Approx(0.3 * cap));
    CHECK(sc.state[e].reserved == doctest::Approx(0.5 * cap));
    CHECK(sc.state[e].concurrent == doctest::Approx(0.5 * cap));
    CHECK(plan.reserved_capacity.at(e) == doctest::Approx(0.5 * cap));
  }

  TEST_CASE("plain admission is capped at node capacity") {
    auto sc = scene();
    const NodeId n = sc.topo.root();
    const double cap = sc.state[n].capacity;
    admit_concurrent(sc.state, {{0, n, sc.topo.base_stations()[0], 2 * cap, 150.0}});
    CHECK(sc.state[n].concurrent == doctest::Approx(cap));
    CHECK_THROWS_AS(admit_concurrent(sc.state, {{0, 987654, 0, 1.0, 150.0}}), LookupError);
  }

  TEST_CASE("predicted placement: empty forecast and consistency with a direct solve") {
    auto sc = scene();
    CHECK(predicted_placement(sc.topo, DemandSnapshot{}, sc.state, InstanceOptions{}, 1).nodes.empty());
    SynthConfig cfg;
    cfg.regions = 16;
    cfg.days = 1;
    const auto snaps = demand_snapshots(synth_workload(cfg, 2), ServiceSpec{});
    const auto& snap = snaps[70];
    REQUIRE_FALSE(snap.demands.empty());
    const auto p = predicted_placement(sc.topo, snap, sc.state, InstanceOptions{}, 1);
    const auto inst = build_instance(sc.topo, snap, sc.state);
    const auto sol = solve_auto(inst, 1);
    CHECK(p.nodes == open_nodes(inst, sol));
    double total = 0.0;
    for (const auto& [n, v] : p.volume) total += v;
    CHECK(total == doctest::Approx(sol.placed_volume()));
  }
}
