#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fogplace/kv_config.hpp"
#include "fogplace/topology.hpp"

namespace fogplace {

struct CdrRecord {
  std::int64_t grid_id = 0;
  std::int64_t timestamp_ms = 0;  // UTC epoch milliseconds
  double traffic = 0.0;
};

/// Which columns of a delimited CDR file hold the fields we use. With a
/// header the names are looked up; without one the indices are used.
struct ColumnMap {
  char delimiter = ',';
  bool has_header = true;
  std::string grid = "grid_id";
  std::string timestamp = "timestamp";
  std::string traffic = "traffic";
  std::size_t grid_index = 0;
  std::size_t timestamp_index = 1;
  std::size_t traffic_index = 2;
};

struct CdrParseResult {
  std::vector<CdrRecord> records;  // sorted by (grid_id, timestamp_ms)
  std::size_t skipped_rows = 0;    // missing grid/timestamp/traffic field
  std::size_t merged_rows = 0;     // rows folded into an earlier (grid, timestamp)
};

/// Parses CDR text. Timestamps are epoch milliseconds or ISO-8601 in UTC.
/// Rows sharing (grid, timestamp) are summed.
CdrParseResult parse_cdr(std::string_view text, const ColumnMap& columns);

/// Parses `YYYY-MM-DD[ T]HH:MM[:SS[.fff]][Z]` or an integer millisecond count.
std::int64_t parse_timestamp_ms(std::string_view s);
std::string format_timestamp(std::int64_t ms);

/// Regular grid of square cells, ids assigned row-major from `first_id`.
struct GridGeometry {
  std::size_t rows = 100;
  std::size_t cols = 100;
  double cell_m = 235.0;
  Point origin;
  std::int64_t first_id = 1;

  std::size_t cell_count() const { return rows * cols; }
  std::int64_t id_of(std::size_t index) const { return first_id + static_cast<std::int64_t>(index); }
  Point center(std::size_t index) const;
};

/// Maps each grid cell to the nearest station whose coverage contains the
/// cell center, or to the nearest station when none does.
std::map<std::int64_t, NodeId> map_grids_to_stations(const GridGeometry& grid,
                                                     std::span<const BaseStation> stations);

struct TrafficSeries {
  NodeId region_id = 0;
  std::int64_t start_ms = 0;
  std::int64_t interval_s = 600;
  std::vector<double> values;
};

struct AggregateResult {
  std::vector<TrafficSeries> series;  // sorted by region id, common start and length
  std::size_t zero_filled = 0;        // (region, slot) cells with no records
};

/// Sums grid traffic per region and interval. Every region named in
/// `grid_map` gets a series; slots without records are 0.
AggregateResult aggregate_to_regions(std::span<const CdrRecord> records,
                                     const std::map<std::int64_t, NodeId>& grid_map,
                                     std::int64_t interval_s);

enum class ServiceClass { multimedia, concurrent };

struct ServiceSpec {
  ServiceClass service_class = ServiceClass::multimedia;
  double max_latency_ms = 100.0;
  double ram_gb = 1.0;
  double mips_demand = 1.0;

  void validate() const;
};

struct Demand {
  NodeId region_id = 0;
  int service_id = 0;
  double volume = 0.0;
};

struct DemandSnapshot {
  std::size_t slot = 0;
  std::vector<Demand> demands;  // ascending region id

  double total_volume() const;
};

/// Region r demands at slot t iff its value exceeds the mean over all
/// regions at t; the demanded volume is the value itself.
std::vector<DemandSnapshot> demand_snapshots(std::span<const TrafficSeries> series, const ServiceSpec& spec,
                                             int service_id = 0);

struct SynthConfig {
  std::size_t regions = 20;
  std::size_t days = 7;
  std::int64_t interval_s = 600;
  double base_level = 100.0;
  double daily_amp = 0.6;     // relative swing between midnight and midday
  double weekly_damp = 0.6;   // weekend multiplier for urban regions
  double noise_sd = 5.0;
  double urban_fraction = 0.5;
  double region_spread = 0.5; // region scale drawn from [1 - s, 1 + s]
  std::int64_t start_ms = 1383264000000;  // 2013-11-01 00:00 UTC

  static SynthConfig from(const KeyValueConfig& cfg);
  void validate() const;
};

/// Diurnal traffic with weekend damping in the first
/// round(urban_fraction * regions) regions and Gaussian noise, clipped at 0.
/// Region ids are 0..regions-1.
std::vector<TrafficSeries> synth_workload(const SynthConfig& cfg, std::uint64_t seed);

/// Checks that all series share start, interval and length.
void require_aligned(std::span<const TrafficSeries> series);

/// `region_id,slot,timestamp_ms,value`
std::string series_to_csv(std::span<const TrafficSeries> series);
/// Inverse of series_to_csv. The interval comes from the timestamps, or
/// from `interval_s` when every series has a single slot.
std::vector<TrafficSeries> parse_series_csv(std::string_view text, std::int64_t interval_s = 600);
std::string snapshots_to_csv(std::span<const DemandSnapshot> snapshots);

}  // namespace fogplace
