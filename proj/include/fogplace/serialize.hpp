#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fogplace/forecast/arima.hpp"
#include "fogplace/forecast/lstm.hpp"
#include "fogplace/placement.hpp"
#include "fogplace/reservation.hpp"
#include "fogplace/simulate.hpp"
#include "fogplace/topology.hpp"

namespace fogplace {

using Json = nlohmann::json;

// Bumped whenever the corresponding document layout changes.
inline constexpr int kTopologySchema = 1;
inline constexpr int kInstanceSchema = 1;
inline constexpr int kSolutionSchema = 1;
inline constexpr int kArimaSchema = 1;
inline constexpr int kLstmSchema = 1;
inline constexpr int kReservationSchema = 1;
inline constexpr int kReportSchema = 1;
inline constexpr int kManifestSchema = 1;

/// `name version` lines for every serialized format.
std::string schema_versions();

Json topology_to_json(const Topology& topo, const Json& config_echo = Json::object());
Topology topology_from_json(const Json& j);

Json instance_to_json(const PlacementInstance& inst);
PlacementInstance instance_from_json(const Json& j);
Json solution_to_json(const PlacementSolution& sol);
PlacementSolution solution_from_json(const Json& j);
/// Structured one-line record of solver diagnostics.
Json diagnostics_to_json(const SolveDiagnostics& d);

Json arima_to_json(const forecast::ArimaModel& m);
forecast::ArimaModel arima_from_json(const Json& j);
Json lstm_to_json(const forecast::LstmModel& m);
forecast::LstmModel lstm_from_json(const Json& j);

Json reservation_to_json(const ReservationPlan& plan);

Json report_to_json(const SimReport& rep);
/// `seed,slot,strategy,content_rate,packet_rate,avg_latency_ms,link_usage,migration_usage`
std::string trace_csv(std::span<const SimReport> reports);
/// One summary row per report.
std::string comparison_csv(std::span<const SimReport> reports);

Json snapshot_report_to_json(std::span<const SnapshotAnalysis> rows);
/// `slot,intensity,node,tier,free_capacity,assigned,mean_latency_ms`
std::string snapshot_report_csv(std::span<const SnapshotAnalysis> rows);

/// Throws FormatError unless `j["schema"]` names `kind` at `version`.
void require_schema(const Json& j, const std::string& kind, int version);

}  // namespace fogplace
