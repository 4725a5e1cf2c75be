#include "fogplace/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "fogplace/error.hpp"
#include "fogplace/kernels.hpp"
#include "fogplace/rng.hpp"
#include "fogplace/strategies.hpp"

namespace fogplace {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::DA: return "DA";
    case Strategy::QoEAP: return "QoEAP";
    case Strategy::SMART_FL: return "SMART_FL";
    case Strategy::TIPTOP: return "TIPTOP";
  }
  return "unknown";
}

Strategy parse_strategy(const std::string& name) {
  std::string n;
  for (char c : name) n += static_cast<char>(std::toupper(static_cast<unsigned char>(c == '-' ? '_' : c)));
  if (n == "DA") return Strategy::DA;
  if (n == "QOEAP") return Strategy::QoEAP;
  if (n == "SMART_FL" || n == "SMARTFL") return Strategy::SMART_FL;
  if (n == "TIPTOP") return Strategy::TIPTOP;
  throw ConfigError("unknown strategy '" + name + "' (expected DA, QoEAP, SMART_FL or TIPTOP)");
}

void SimConfig::validate() const {
  auto prob = [](double p, const char* what) {
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError(std::string(what) + " reliability must lie in (0, 1]");
  };
  prob(reliability.access, "access");
  prob(reliability.aggregation, "aggregation");
  prob(reliability.core, "core");
  if (interval_s <= 0) throw ConfigError("interval must be > 0");
  if (!(latency_cap_ms > 0.0)) throw ConfigError("latency cap must be > 0");
  if (!(packets_per_unit > 0.0)) throw ConfigError("packets per unit must be > 0");
  if (!(concurrent_load_fraction >= 0.0 && concurrent_load_fraction < 1.0))
    throw ConfigError("concurrent load fraction must lie in [0, 1)");
  if (!(capacity_scale > 0.0)) throw ConfigError("capacity scale must be > 0");
}

namespace {

std::map<NodeId, std::vector<NodeId>> stations_below(const Topology& topo) {
  std::map<NodeId, std::vector<NodeId>> out;
  for (auto bs : topo.base_stations()) {
    NodeId n = bs;
    while (true) {
      out[n].push_back(bs);
      const auto& node = topo.node(n);
      if (!node.parent) break;
      n = *node.parent;
    }
  }
  return out;
}

double path_success(const Topology& topo, NodeId node, NodeId region, const LinkReliability& rel) {
  const auto path = topo.path(region, node);
  double p = rel.access;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const int lower = std::min(topo.node(path[i]).tier, topo.node(path[i + 1]).tier);
    p *= lower + 1 == topo.tier_count() - 1 ? rel.core : rel.aggregation;
  }
  return p;
}

}  // namespace

std::vector<ConcurrentService> concurrent_load(const Topology& topo, const NodeState& state, std::size_t slot,
                                               double fraction, double max_latency_ms, std::uint64_t seed) {
  std::vector<ConcurrentService> out;
  if (fraction <= 0.0) return out;
  const auto below = stations_below(topo);
  Rng rng(split_seed(split_seed(seed, 0x636f6e63), slot));
  for (const auto& [id, load] : state) {
    const double total = fraction * load.capacity * uniform(rng, 0.5, 1.5);
    const auto& bs = below.at(id);
    for (int k = 0; k < 2; ++k) {
      const NodeId region = bs[std::uniform_int_distribution<std::size_t>(0, bs.size() - 1)(rng)];
      out.push_back({out.size(), id, region, total / 2.0, max_latency_ms});
    }
  }
  return out;
}

SimReport run_simulation(const Topology& topo, const std::vector<DemandSnapshot>& snapshots,
                         const std::vector<DemandSnapshot>* forecasts, const SimConfig& cfg) {
  cfg.validate();
  const std::size_t slots = cfg.slots == 0 ? snapshots.size() : cfg.slots;
  if (slots == 0) throw InvalidInput("simulation needs at least one slot");
  if (slots > snapshots.size()) throw InvalidInput("snapshots cover fewer slots than requested");
  const bool tiptop = cfg.strategy == Strategy::TIPTOP;
  if (tiptop && (!forecasts || forecasts->size() < slots)) throw InvalidInput("TIPTOP needs a forecast for every slot");

  const InstanceOptions opts{cfg.latency_cap_ms, cfg.facility_weight, 1.0};
  const NodeState base = initial_node_state(topo, cfg.capacity_scale);
  NodeState expected = base;
  for (auto& [id, l] : expected) l.concurrent = cfg.concurrent_load_fraction * l.capacity;
  const double interval = static_cast<double>(cfg.interval_s);

  SimReport rep;
  rep.strategy = cfg.strategy;
  rep.seed = cfg.seed;
  NodeSet prev_open;
  std::map<NodeId, NodeId> prev_main;
  double lat_volume = 0.0;
  auto event = [&](nlohmann::json j) {
    j["strategy"] = to_string(cfg.strategy);
    j["seed"] = cfg.seed;
    rep.events.push_back(j.dump());
  };

  for (std::size_t t = 0; t < slots; ++t) {
    SlotTrace tr;
    tr.slot = t;
    NodeState state = base;
    const auto queue =
        concurrent_load(topo, state, t, cfg.concurrent_load_fraction, cfg.concurrent_max_latency_ms, cfg.seed);
    if (tiptop) {
      const auto pred = predicted_placement(topo, (*forecasts)[t], expected, opts, split_seed(cfg.seed, 2 * t + 1),
                                            cfg.limits, cfg.heuristic);
      auto plan = plan_reservation(t, prev_open, pred, state);
      apply_reservation(topo, state, plan, queue);
      double reserved = 0.0;
      for (const auto& [n, v] : plan.reserved_capacity) reserved += v;
      event({{"slot", t}, {"kind", "reservation"}, {"Y", plan.Y}, {"Gamma", plan.Gamma}, {"reserved", reserved}});
      for (const auto& m : plan.migrations) {
        tr.migration_usage += m.amount * topo.hop_count(m.from, m.to) / interval;
        event({{"slot", t}, {"kind", "migration"}, {"service", m.service}, {"from", m.from}, {"to", m.to},
               {"amount", m.amount}});
      }
      for (const auto& w : plan.waivers)
        event({{"slot", t}, {"kind", "waiver"}, {"service", w.service}, {"node", w.node}, {"amount", w.amount}});
    } else {
      admit_concurrent(state, queue);
    }

    const auto& snap = snapshots[t];
    tr.demanded = snap.total_volume();
    if (snap.demands.empty()) {
      prev_open.clear();
      prev_main.clear();
      rep.slots.push_back(tr);
      continue;
    }

    const auto inst = build_instance(topo, snap, state, opts);
    PlacementSolution sol;
    try {
      switch (cfg.strategy) {
        case Strategy::DA: sol = strategy_da(inst, topo); break;
        case Strategy::QoEAP: sol = strategy_qoeap(inst, topo); break;
        case Strategy::SMART_FL:
        case Strategy::TIPTOP:
          sol = within_exact_limits(inst, cfg.limits) ? solve_exact(inst, cfg.limits)
                                                      : solve_heuristic(inst, split_seed(cfg.seed, 2 * t), cfg.heuristic);
          (sol.diagnostics.solver == "exact" ? rep.exact_solves : rep.heuristic_solves) += 1;
          break;
      }
    } catch (const Error& e) {
      event({{"slot", t}, {"kind", "degraded"}, {"error", e.what()}});
      sol = strategy_da(inst, topo);
    }
    tr.solver = sol.diagnostics.solver;

    const std::size_t D = inst.demand_count();
    std::vector<kernels::PacketFlow> flows;
    std::uint64_t sent = 0;
    double slot_lat = 0.0;
    std::map<NodeId, NodeId> main_node;
    for (std::size_t d = 0; d < D; ++d) {
      const NodeId region = inst.demands[d].region_id;
      double best_x = 0.0, region_x = 0.0;
      NodeId best_node = -1;
      for (std::size_t f = 0; f < inst.facility_count(); ++f) {
        const double x = sol.assignment[f * D + d];
        if (x <= 0.0) continue;
        const NodeId node = inst.facilities[f].node_id;
        region_x += x;
        slot_lat += x * inst.lat(f, d);
        tr.link_usage += x * topo.hop_count(region, node) / interval;
        const auto packets = static_cast<std::uint64_t>(std::llround(x * cfg.packets_per_unit));
        flows.push_back({t, (static_cast<std::uint64_t>(region) << 32) ^ static_cast<std::uint64_t>(node), 0, packets,
                         path_success(topo, node, region, cfg.reliability)});
        sent += packets;
        if (x > best_x) {
          best_x = x;
          best_node = node;
        }
      }
      tr.placed += inst.demands[d].volume - sol.uncovered[d];
      sent += static_cast<std::uint64_t>(std::llround(sol.uncovered[d] * cfg.packets_per_unit));
      if (best_node < 0) continue;
      main_node[region] = best_node;
      auto prev = prev_main.find(region);
      if (prev != prev_main.end() && prev->second != best_node)
        tr.migration_usage += region_x * topo.hop_count(prev->second, best_node) / interval;
    }
    const auto delivered = kernels::delivered_packets(flows, split_seed(cfg.seed, 0x706b74));
    tr.content_rate = tr.placed / tr.demanded;
    tr.packet_rate = sent > 0 ? static_cast<double>(delivered) / static_cast<double>(sent) : 1.0;
    tr.avg_latency_ms = tr.placed > 0.0 ? slot_lat / tr.placed : 0.0;
    prev_open = open_nodes(inst, sol);
    prev_main = std::move(main_node);
    tr.open_nodes = prev_open.size();

    rep.packets_sent += sent;
    rep.packets_delivered += delivered;
    lat_volume += slot_lat;
    event({{"slot", t}, {"kind", "placement"}, {"solver", tr.solver}, {"status", to_string(sol.status)},
           {"open", prev_open}, {"objective", sol.objective}, {"uncovered", sol.uncovered_volume()}});
    rep.slots.push_back(tr);
  }

  for (const auto& s : rep.slots) {
    rep.demanded_volume += s.demanded;
    rep.placed_volume += s.placed;
    rep.link_usage += s.link_usage;
    rep.migration_usage += s.migration_usage;
  }
  rep.network_usage = rep.link_usage + rep.migration_usage;
  rep.content_delivery_rate = rep.demanded_volume > 0.0 ? rep.placed_volume / rep.demanded_volume : 1.0;
  rep.packet_delivery_rate = rep.packets_sent > 0 ? static_cast<double>(rep.packets_delivered) /
                                                        static_cast<double>(rep.packets_sent)
                                                  : 1.0;
  rep.avg_latency_ms = rep.placed_volume > 0.0 ? lat_volume / rep.placed_volume : 0.0;
  return rep;
}

std::vector<SnapshotAnalysis> snapshot_report(const Topology& topo, const std::vector<TrafficSeries>& series,
                                              const std::vector<std::size_t>& slots, const SimConfig& cfg) {
  cfg.validate();
  const auto snaps = demand_snapshots(series, ServiceSpec{});
  const auto classes = classify_slots(series, 3, split_seed(cfg.seed, 0x6b6d));
  const InstanceOptions opts{cfg.latency_cap_ms, cfg.facility_weight, 1.0};
  const NodeState base = initial_node_state(topo, cfg.capacity_scale);
  std::vector<SnapshotAnalysis> out;
  for (auto t : slots) {
    if (t >= snaps.size()) throw LookupError("slot " + std::to_string(t) + " is outside the workload");
    SnapshotAnalysis a;
    a.slot = t;
    a.intensity = intensity_name(classes.labels[t], 3);
    a.demanded = snaps[t].total_volume();
    if (snaps[t].demands.empty()) {
      out.push_back(std::move(a));
      continue;
    }
    NodeState state = base;
    admit_concurrent(state, concurrent_load(topo, state, t, cfg.concurrent_load_fraction,
                                            cfg.concurrent_max_latency_ms, cfg.seed));
    const auto inst = build_instance(topo, snaps[t], state, opts);
    const auto sol = solve_auto(inst, split_seed(cfg.seed, 2 * t), cfg.limits, cfg.heuristic);
    a.solver = sol.diagnostics.solver;
    const std::size_t D = inst.demand_count();
    for (std::size_t f = 0; f < inst.facility_count(); ++f) {
      if (!sol.facility_open(f)) continue;
      SnapshotNodeRow row;
      row.node = inst.facilities[f].node_id;
      row.tier = topo.node(row.node).tier;
      row.free_capacity = inst.facilities[f].capacity;
      double lat = 0.0;
      for (std::size_t d = 0; d < D; ++d) {
        row.assigned += sol.assignment[f * D + d];
        lat += sol.assignment[f * D + d] * inst.lat(f, d);
      }
      row.mean_latency_ms = row.assigned > 0.0 ? lat / row.assigned : 0.0;
      a.selected.push_back(row.node);
      a.root_selected = a.root_selected || row.node == topo.root();
      a.nodes.push_back(row);
    }
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace fogplace
