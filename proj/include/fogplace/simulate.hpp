#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fogplace/kmeans.hpp"
#include "fogplace/placement.hpp"
#include "fogplace/reservation.hpp"

namespace fogplace {

enum class Strategy { DA, QoEAP, SMART_FL, TIPTOP };
std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& name);

/// Per-hop packet success probabilities. The user's radio hop uses
/// `access`, hops into the root use `core`, all other tree hops use
/// `aggregation`.
struct LinkReliability {
  double access = 0.998;
  double aggregation = 0.9995;
  double core = 0.9999;
};

struct SimConfig {
  Strategy strategy = Strategy::SMART_FL;
  std::size_t slots = 0;  // 0 = every snapshot
  std::int64_t interval_s = 600;
  std::uint64_t seed = 0;
  double latency_cap_ms = 100.0;
  LinkReliability reliability;
  double packets_per_unit = 100.0;
  double concurrent_load_fraction = 0.3;
  double concurrent_max_latency_ms = 150.0;
  double capacity_scale = 0.01;
  double facility_weight = 1.0;
  ExactLimits limits;
  HeuristicOptions heuristic;

  void validate() const;
};

struct SlotTrace {
  std::size_t slot = 0;
  double demanded = 0.0;
  double placed = 0.0;
  double content_rate = 1.0;
  double packet_rate = 1.0;
  double avg_latency_ms = 0.0;
  double link_usage = 0.0;
  double migration_usage = 0.0;
  std::string solver;
  std::size_t open_nodes = 0;
};

struct SimReport {
  Strategy strategy = Strategy::SMART_FL;
  std::uint64_t seed = 0;
  double content_delivery_rate = 1.0;
  double packet_delivery_rate = 1.0;
  double avg_latency_ms = 0.0;
  double link_usage = 0.0;
  double migration_usage = 0.0;
  double network_usage = 0.0;  // link + migration
  double demanded_volume = 0.0;
  double placed_volume = 0.0;
  std::uint64_t packets_sent = 0;
  std::uint64_t packets_delivered = 0;
  std::size_t exact_solves = 0;
  std::size_t heuristic_solves = 0;
  std::vector<SlotTrace> slots;
  std::vector<std::string> events;  // one JSON object per line
};

/// Seeded concurrent services for one slot: each node receives services
/// totalling about `fraction` of its capacity. Identical for every strategy.
std::vector<ConcurrentService> concurrent_load(const Topology& topo, const NodeState& state, std::size_t slot,
                                               double fraction, double max_latency_ms, std::uint64_t seed);

/// Runs the slot loop. `forecasts` must cover the same slots as `snapshots`
/// for TIPTOP and is ignored otherwise.
SimReport run_simulation(const Topology& topo, const std::vector<DemandSnapshot>& snapshots,
                         const std::vector<DemandSnapshot>* forecasts, const SimConfig& cfg);

struct SnapshotNodeRow {
  NodeId node = 0;
  int tier = 0;
  double free_capacity = 0.0;
  double assigned = 0.0;
  double mean_latency_ms = 0.0;  // volume-weighted over its assignments
};

struct SnapshotAnalysis {
  std::size_t slot = 0;
  std::string intensity;
  double demanded = 0.0;
  std::vector<NodeId> selected;
  bool root_selected = false;
  std::vector<SnapshotNodeRow> nodes;
  std::string solver;
};

/// For each requested slot: intensity class, SMART-FL selection and a
/// per-node capacity/latency table.
std::vector<SnapshotAnalysis> snapshot_report(const Topology& topo, const std::vector<TrafficSeries>& series,
                                              const std::vector<std::size_t>& slots, const SimConfig& cfg);

}  // namespace fogplace
