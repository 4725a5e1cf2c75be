#include "fogplace/workload.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "fogplace/csv.hpp"
#include "fogplace/error.hpp"
#include "fogplace/kernels.hpp"
#include "fogplace/rng.hpp"

namespace fogplace {

namespace {

constexpr std::int64_t kDayMs = 86'400'000;

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

int fixed_int(std::string_view s, std::size_t pos, std::size_t len, std::string_view whole) {
  if (pos + len > s.size() || !all_digits(s.substr(pos, len)))
    throw FormatError("invalid timestamp: '" + std::string(whole) + "'");
  return static_cast<int>(parse_int(s.substr(pos, len), "timestamp"));
}

}  // namespace

std::int64_t parse_timestamp_ms(std::string_view s) {
  s = trim(s);
  if (all_digits(s)) return parse_int(s, "timestamp");
  // YYYY-MM-DD[ T]HH:MM[:SS[.fff]][Z]
  const int y = fixed_int(s, 0, 4, s), mo = fixed_int(s, 5, 2, s), d = fixed_int(s, 8, 2, s);
  if (s.size() < 16 || s[4] != '-' || s[7] != '-' || (s[10] != ' ' && s[10] != 'T') || s[13] != ':')
    throw FormatError("invalid timestamp: '" + std::string(s) + "'");
  const int h = fixed_int(s, 11, 2, s), mi = fixed_int(s, 14, 2, s);
  int sec = 0, milli = 0;
  std::size_t pos = 16;
  if (pos < s.size() && s[pos] == ':') {
    sec = fixed_int(s, pos + 1, 2, s);
    pos += 3;
    if (pos < s.size() && s[pos] == '.') {
      std::size_t e = pos + 1;
      while (e < s.size() && std::isdigit(static_cast<unsigned char>(s[e]))) ++e;
      const auto frac = s.substr(pos + 1, std::min<std::size_t>(e - pos - 1, 3));
      if (frac.empty()) throw FormatError("invalid timestamp: '" + std::string(s) + "'");
      milli = static_cast<int>(parse_int(frac, "timestamp"));
      for (std::size_t k = frac.size(); k < 3; ++k) milli *= 10;
      pos = e;
    }
  }
  if (pos < s.size() && s[pos] == 'Z') ++pos;
  if (pos != s.size()) throw FormatError("invalid timestamp: '" + std::string(s) + "'");

  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) throw FormatError("invalid timestamp: '" + std::string(s) + "'");
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * kDayMs + ((h * 60LL + mi) * 60 + sec) * 1000 + milli;
}

std::string format_timestamp(std::int64_t ms) {
  using namespace std::chrono;
  std::int64_t days = ms / kDayMs;
  std::int64_t rem = ms % kDayMs;
  if (rem < 0) {
    rem += kDayMs;
    --days;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  const auto secs = rem / 1000;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02lld:%02lld:%02lld", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long long>(secs / 3600), static_cast<long long>(secs / 60 % 60),
                static_cast<long long>(secs % 60));
  return buf;
}

CdrParseResult parse_cdr(std::string_view text, const ColumnMap& columns) {
  CdrParseResult out;
  std::size_t gi = columns.grid_index, ti = columns.timestamp_index, vi = columns.traffic_index;
  bool header_pending = columns.has_header;
  std::size_t line_no = 0;
  for (auto raw : split_fields(text, '\n')) {
    ++line_no;
    const auto line = raw.empty() || raw.back() != '\r' ? raw : raw.substr(0, raw.size() - 1);
    if (trim(line).empty()) continue;
    const auto f = split_fields(line, columns.delimiter);
    if (header_pending) {
      header_pending = false;
      auto find = [&](const std::string& name) {
        for (std::size_t i = 0; i < f.size(); ++i)
          if (trim(f[i]) == name) return i;
        throw FormatError("CDR header lacks column '" + name + "'");
      };
      gi = find(columns.grid);
      ti = find(columns.timestamp);
      vi = find(columns.traffic);
      continue;
    }
    auto field = [&](std::size_t i) { return i < f.size() ? trim(f[i]) : std::string_view{}; };
    if (field(gi).empty() || field(ti).empty() || field(vi).empty()) {
      ++out.skipped_rows;
      continue;
    }
    CdrRecord r;
    try {
      r.grid_id = parse_int(field(gi), "grid id");
      r.timestamp_ms = parse_timestamp_ms(field(ti));
      r.traffic = parse_double(field(vi), "traffic");
    } catch (const FormatError& e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!(r.traffic >= 0.0) || !std::isfinite(r.traffic))
      throw InvalidInput("line " + std::to_string(line_no) + ": traffic must be finite and >= 0");
    out.records.push_back(r);
  }
  if (header_pending) throw FormatError("CDR input has no header line");

  std::stable_sort(out.records.begin(), out.records.end(), [](const CdrRecord& a, const CdrRecord& b) {
    return a.grid_id != b.grid_id ? a.grid_id < b.grid_id : a.timestamp_ms < b.timestamp_ms;
  });
  std::vector<CdrRecord> merged;
  for (const auto& r : out.records) {
    if (!merged.empty() && merged.back().grid_id == r.grid_id && merged.back().timestamp_ms == r.timestamp_ms) {
      merged.back().traffic += r.traffic;
      ++out.merged_rows;
    } else {
      merged.push_back(r);
    }
  }
  out.records = std::move(merged);
  return out;
}

Point GridGeometry::center(std::size_t index) const {
  const auto r = index / cols, c = index % cols;
  return {origin.x + (static_cast<double>(c) + 0.5) * cell_m, origin.y + (static_cast<double>(r) + 0.5) * cell_m};
}

std::map<std::int64_t, NodeId> map_grids_to_stations(const GridGeometry& grid,
                                                     std::span<const BaseStation> stations) {
  if (stations.empty()) throw InvalidInput("no base stations to map grids onto");
  if (grid.rows == 0 || grid.cols == 0 || !(grid.cell_m > 0.0)) throw InvalidInput("grid geometry is empty");
  std::vector<Point> centers(grid.cell_count());
  for (std::size_t i = 0; i < centers.size(); ++i) centers[i] = grid.center(i);
  const auto idx = kernels::nearest_covering(centers, stations);
  std::map<std::int64_t, NodeId> out;
  for (std::size_t i = 0; i < idx.size(); ++i) out.emplace_hint(out.end(), grid.id_of(i), stations[idx[i]].id);
  return out;
}

AggregateResult aggregate_to_regions(std::span<const CdrRecord> records,
                                     const std::map<std::int64_t, NodeId>& grid_map, std::int64_t interval_s) {
  if (interval_s <= 0) throw InvalidInput("interval must be > 0");
  AggregateResult out;
  std::map<NodeId, std::size_t> region_index;
  for (const auto& [g, r] : grid_map) region_index.emplace(r, 0);
  std::size_t i = 0;
  for (auto& [r, idx] : region_index) {
    idx = i++;
    out.series.push_back(TrafficSeries{r, 0, interval_s, {}});
  }
  if (records.empty()) return out;

  const std::int64_t step = interval_s * 1000;
  auto floor_div = [](std::int64_t a, std::int64_t b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); };
  std::int64_t lo = records.front().timestamp_ms, hi = lo;
  for (const auto& r : records) {
    lo = std::min(lo, r.timestamp_ms);
    hi = std::max(hi, r.timestamp_ms);
  }
  const std::int64_t start = floor_div(lo, step) * step;
  const auto slots = static_cast<std::size_t>(floor_div(hi - start, step) + 1);
  std::vector<std::vector<bool>> seen(out.series.size(), std::vector<bool>(slots, false));
  for (auto& s : out.series) {
    s.start_ms = start;
    s.values.assign(slots, 0.0);
  }
  for (const auto& r : records) {
    auto it = grid_map.find(r.grid_id);
    if (it == grid_map.end()) throw InvalidInput("grid " + std::to_string(r.grid_id) + " is not mapped to a station");
    const auto ri = region_index.at(it->second);
    const auto slot = static_cast<std::size_t>((r.timestamp_ms - start) / step);
    out.series[ri].values[slot] += r.traffic;
    seen[ri][slot] = true;
  }
  for (const auto& row : seen) out.zero_filled += static_cast<std::size_t>(std::count(row.begin(), row.end(), false));
  return out;
}

void ServiceSpec::validate() const {
  if (!(max_latency_ms > 0.0)) throw ConfigError("service max latency must be > 0");
  if (service_class == ServiceClass::multimedia && max_latency_ms > 100.0)
    throw ConfigError("multimedia services need max latency <= 100 ms");
  if (!(ram_gb >= 0.0) || !(mips_demand >= 0.0)) throw ConfigError("service resource demands must be >= 0");
}

double DemandSnapshot::total_volume() const {
  double s = 0.0;
  for (const auto& d : demands) s += d.volume;
  return s;
}

void require_aligned(std::span<const TrafficSeries> series) {
  for (const auto& s : series) {
    if (s.interval_s <= 0) throw InvalidInput("series interval must be > 0");
    if (s.start_ms != series[0].start_ms || s.interval_s != series[0].interval_s ||
        s.values.size() != series[0].values.size())
      throw InvalidInput("series are not aligned (region " + std::to_string(s.region_id) + ")");
  }
}

std::vector<DemandSnapshot> demand_snapshots(std::span<const TrafficSeries> series, const ServiceSpec& spec,
                                             int service_id) {
  spec.validate();
  std::vector<DemandSnapshot> out;
  if (series.empty()) return out;
  require_aligned(series);
  std::vector<std::size_t> order(series.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return series[a].region_id < series[b].region_id; });

  const std::size_t slots = series[0].values.size();
  out.resize(slots);
  for (std::size_t t = 0; t < slots; ++t) {
    out[t].slot = t;
    long double sum = 0.0L;
    for (const auto& s : series) sum += s.values[t];
    const long double mean = sum / static_cast<long double>(series.size());
    for (auto i : order) {
      const double v = series[i].values[t];
      if (static_cast<long double>(v) > mean && v > 0.0) out[t].demands.push_back({series[i].region_id, service_id, v});
    }
  }
  return out;
}

SynthConfig SynthConfig::from(const KeyValueConfig& cfg) {
  SynthConfig c;
  c.regions = static_cast<std::size_t>(cfg.get_int("regions", static_cast<long long>(c.regions)));
  c.days = static_cast<std::size_t>(cfg.get_int("days", static_cast<long long>(c.days)));
  c.interval_s = cfg.get_int("interval_s", c.interval_s);
  c.base_level = cfg.get_double("base_level", c.base_level);
  c.daily_amp = cfg.get_double("daily_amp", c.daily_amp);
  c.weekly_damp = cfg.get_double("weekly_damp", c.weekly_damp);
  c.noise_sd = cfg.get_double("noise_sd", c.noise_sd);
  c.urban_fraction = cfg.get_double("urban_fraction", c.urban_fraction);
  c.region_spread = cfg.get_double("region_spread", c.region_spread);
  if (auto s = cfg.get("start")) c.start_ms = parse_timestamp_ms(*s);
  c.validate();
  return c;
}

void SynthConfig::validate() const {
  if (regions < 1) throw ConfigError("regions must be >= 1");
  if (days < 1) throw ConfigError("days must be >= 1");
  if (interval_s <= 0 || 86400 % interval_s != 0) throw ConfigError("interval_s must divide one day");
  if (!(base_level > 0.0)) throw ConfigError("base_level must be > 0");
  if (!(daily_amp >= 0.0 && daily_amp <= 1.0)) throw ConfigError("daily_amp must lie in [0, 1]");
  if (!(weekly_damp > 0.0 && weekly_damp <= 1.0)) throw ConfigError("weekly_damp must lie in (0, 1]");
  if (!(noise_sd >= 0.0)) throw ConfigError("noise_sd must be >= 0");
  if (!(urban_fraction >= 0.0 && urban_fraction <= 1.0)) throw ConfigError("urban_fraction must lie in [0, 1]");
  if (!(region_spread >= 0.0 && region_spread < 1.0)) throw ConfigError("region_spread must lie in [0, 1)");
}

std::vector<TrafficSeries> synth_workload(const SynthConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const std::size_t per_day = static_cast<std::size_t>(86400 / cfg.interval_s);
  const std::size_t slots = per_day * cfg.days;
  const auto urban = static_cast<std::size_t>(std::llround(cfg.urban_fraction * static_cast<double>(cfg.regions)));
  std::vector<TrafficSeries> out;
  for (std::size_t r = 0; r < cfg.regions; ++r) {
    Rng scale_rng(split_seed(seed, 2 * r));
    Rng noise_rng(split_seed(seed, 2 * r + 1));
    std::normal_distribution<double> noise(0.0, cfg.noise_sd > 0.0 ? cfg.noise_sd : 1.0);
    const double scale = uniform(scale_rng, 1.0 - cfg.region_spread, 1.0 + cfg.region_spread);
    TrafficSeries s{static_cast<NodeId>(r), cfg.start_ms, cfg.interval_s, std::vector<double>(slots)};
    for (std::size_t t = 0; t < slots; ++t) {
      const std::int64_t ms = cfg.start_ms + static_cast<std::int64_t>(t) * cfg.interval_s * 1000;
      std::int64_t day = ms / kDayMs, in_day = ms % kDayMs;
      if (in_day < 0) {
        in_day += kDayMs;
        --day;
      }
      const double hour = static_cast<double>(in_day) / 3'600'000.0;
      const auto weekday = ((day % 7) + 11) % 7;  // 0 = Sunday; 1970-01-01 was a Thursday
      const bool weekend = weekday == 0 || weekday == 6;
      const double week = (r < urban && weekend) ? cfg.weekly_damp : 1.0;
      const double daily = 1.0 - cfg.daily_amp * std::cos(2.0 * std::numbers::pi * hour / 24.0);
      double v = cfg.base_level * scale * daily * week;
      if (cfg.noise_sd > 0.0) v += noise(noise_rng);
      s.values[t] = std::max(0.0, v);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string series_to_csv(std::span<const TrafficSeries> series) {
  std::ostringstream os;
  os.precision(17);
  os << "region_id,slot,timestamp_ms,value\n";
  for (const auto& s : series)
    for (std::size_t t = 0; t < s.values.size(); ++t)
      os << s.region_id << ',' << t << ',' << s.start_ms + static_cast<std::int64_t>(t) * s.interval_s * 1000 << ','
         << s.values[t] << '\n';
  return os.str();
}

std::vector<TrafficSeries> parse_series_csv(std::string_view text, std::int64_t interval_s) {
  if (interval_s <= 0) throw ConfigError("interval_s must be > 0");
  std::map<NodeId, TrafficSeries> by_region;
  std::map<NodeId, std::int64_t> second_ts;
  std::size_t line_no = 0;
  bool header = true;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    if (header) {
      if (line != "region_id,slot,timestamp_ms,value") throw FormatError("series CSV: unexpected header");
      header = false;
      continue;
    }
    const auto f = split_fields(line, ',');
    if (f.size() != 4) throw FormatError("series CSV line " + std::to_string(line_no) + ": expected 4 fields");
    const NodeId region = parse_int(f[0], "region_id");
    const auto slot = parse_int(f[1], "slot");
    const auto ts = parse_int(f[2], "timestamp_ms");
    auto& s = by_region[region];
    if (slot != static_cast<long long>(s.values.size()))
      throw FormatError("series CSV line " + std::to_string(line_no) + ": slots must be contiguous from 0");
    if (slot == 0) {
      s.region_id = region;
      s.start_ms = ts;
    } else if (slot == 1) {
      second_ts[region] = ts;
    }
    s.values.push_back(parse_double(f[3], "value"));
  }
  if (header) throw FormatError("series CSV is empty");
  std::vector<TrafficSeries> out;
  for (auto& [id, s] : by_region) {
    auto it = second_ts.find(id);
    if (it != second_ts.end()) {
      const auto step = it->second - s.start_ms;
      if (step <= 0 || step % 1000 != 0) throw FormatError("series CSV: bad timestamp step for region " + std::to_string(id));
      s.interval_s = step / 1000;
    } else {
      s.interval_s = interval_s;
    }
    out.push_back(std::move(s));
  }
  require_aligned(out);
  return out;
}

std::string snapshots_to_csv(std::span<const DemandSnapshot> snapshots) {
  std::ostringstream os;
  os.precision(17);
  os << "slot,region_id,service_id,volume\n";
  for (const auto& s : snapshots)
    for (const auto& d : s.demands) os << s.slot << ',' << d.region_id << ',' << d.service_id << ',' << d.volume << '\n';
  return os.str();
}

}  // namespace fogplace
