// Batch front end: topology, workload, forecast, place, simulate and
// snapshot-report subcommands. Every command that writes a file also writes
// `<out>.manifest.json` next to its primary output.

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

#include <omp.h>

#include <CLI11.hpp>

#include "fogplace/csv.hpp"
#include "fogplace/error.hpp"
#include "fogplace/forecast/arima.hpp"
#include "fogplace/forecast/lstm.hpp"
#include "fogplace/forecast/metrics.hpp"
#include "fogplace/forecast/rolling.hpp"
#include "fogplace/kmeans.hpp"
#include "fogplace/kv_config.hpp"
#include "fogplace/manifest.hpp"
#include "fogplace/rng.hpp"
#include "fogplace/serialize.hpp"
#include "fogplace/simulate.hpp"
#include "fogplace/topology.hpp"
#include "fogplace/workload.hpp"

namespace {

using namespace fogplace;
namespace fc = fogplace::forecast;

enum ExitCode { kOk = 0, kUsage = 2, kInfeasible = 3, kInternal = 4 };

/// Result of a run that is not an exception but still maps to a nonzero exit.
struct Outcome {
  int code = kOk;
  std::string message;
};

struct Command {
  Command(CLI::App* a, std::string n) : app(a), name(std::move(n)) {}
  CLI::App* app = nullptr;
  std::string name;
  std::vector<CLI::Option*> required;
  std::string* out = nullptr;  // primary output; the manifest goes next to it
  std::uint64_t* seed = nullptr;
  std::function<Outcome(RunManifest&)> run;
};

std::string read_input(RunManifest& m, const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) throw InvalidInput("cannot open input file '" + path + "'");
  m.add_input(path);
  return read_file(path);
}

void write_output(RunManifest& m, const std::string& path, const std::string& contents) {
  write_file(path, contents);
  m.add_output(path);
}

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw FormatError(what + ": " + e.what());
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

/// Effective settings of a subcommand as canonical key=value text.
std::string effective_config(const CLI::App* app) {
  KeyValueConfig kv;
  for (const CLI::Option* opt : app->get_options()) {
    const std::string name = opt->get_single_name();
    if (opt->get_lnames().empty() || name == "help" || name == "config") continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    } else {
      value = opt->get_default_str();
      if (value.empty() && opt->get_expected_max() == 0) value = "false";
    }
    kv.set(name, value);
  }
  return kv.canonical();
}

/// Fills options not given on the command line from the config file. Keys
/// are long option names; '_' and '-' are interchangeable.
void apply_config(CLI::App* app, const KeyValueConfig& kv) {
  for (CLI::Option* opt : app->get_options()) {
    if (opt->count() > 0 || opt->get_lnames().empty()) continue;
    const std::string name = opt->get_single_name();
    std::string alt = name;
    std::replace(alt.begin(), alt.end(), '-', '_');
    auto value = kv.get(name);
    if (!value) value = kv.get(alt);
    if (!value) continue;
    if (opt->get_expected_max() > 1) {
      for (auto f : split_fields(*value, ',')) opt->add_result(std::string(trim(f)));
    } else {
      opt->add_result(*value);
    }
    opt->run_callback();
  }
}

// -- topology ---------------------------------------------------------------

std::string stations_csv(std::span<const BaseStation> stations) {
  std::ostringstream os;
  os.precision(17);
  os << "id,x_m,y_m,coverage_radius_m\n";
  for (const auto& s : stations) os << s.id << ',' << s.position.x << ',' << s.position.y << ',' << s.coverage_radius_m << '\n';
  return os.str();
}

void add_topology(CLI::App& root, std::vector<Command>& cmds) {
  auto* topo = root.add_subcommand("topology", "Build the tiered fog hierarchy");
  topo->require_subcommand(1);

  {
    struct Opts {
      std::string stations, out;
      bool latlon = false;
      double radius_m = 3000.0;
      int mu = 2;
      std::uint64_t seed = 0;
      std::vector<double> hop_ms{2.0, 8.0, 20.0, 45.0};
      double load_penalty = 0.5;
    };
    auto o = std::make_shared<Opts>();
    auto* app = topo->add_subcommand("build", "Hierarchy and resources from a station CSV");
    Command c{app, "topology build"};
    c.required.push_back(app->add_option("--stations", o->stations, "Station CSV (id,x_m,y_m,coverage_radius_m)"));
    app->add_flag("--latlon", o->latlon, "Stations given as id,lat,lon,coverage_radius_m");
    app->add_option("--radius-m", o->radius_m, "Proximity radius")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--mu", o->mu, "Stop when at most mu subgraphs remain")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--seed", o->seed)->capture_default_str();
    app->add_option("--hop-ms", o->hop_ms, "Per-boundary hop latency")->delimiter(',')->capture_default_str();
    app->add_option("--load-penalty", o->load_penalty)->capture_default_str();
    c.required.push_back(app->add_option("--out", o->out, "Topology JSON"));
    c.out = &o->out;
    c.seed = &o->seed;
    c.run = [o](RunManifest& m) {
      const auto stations = parse_stations_csv(read_input(m, o->stations), o->latlon);
      HierarchyOptions h;
      h.radius_m = o->radius_m;
      h.mu = o->mu;
      h.seed = split_seed(o->seed, 1);
      h.latency.hop_ms = o->hop_ms;
      h.latency.load_penalty = o->load_penalty;
      h.latency.validate();
      auto t = build_hierarchy(stations, h);
      assign_resources(t, default_tier_ranges(t.tier_count()), split_seed(o->seed, 2));
      if (auto v = check_invariants(t); !v.empty()) throw InvariantViolation("topology: " + v.front());
      const Json echo = {{"radius_m", o->radius_m}, {"mu", o->mu}, {"seed", o->seed}, {"stations", o->stations}};
      write_output(m, o->out, dump(topology_to_json(t, echo)));
      std::string sizes;
      for (auto n : t.tier_sizes()) sizes += (sizes.empty() ? "" : "/") + std::to_string(n);
      std::cerr << "tiers " << sizes << "\n";
      return Outcome{};
    };
    cmds.push_back(std::move(c));
  }
  {
    struct Opts {
      std::size_t count = 20;
      double width_m = 10000.0, height_m = 10000.0, coverage_m = 1500.0;
      std::uint64_t seed = 0;
      std::string out;
    };
    auto o = std::make_shared<Opts>();
    auto* app = topo->add_subcommand("synth-stations", "Uniform random station layout");
    Command c{app, "topology synth-stations"};
    app->add_option("--count", o->count)->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--width-m", o->width_m)->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--height-m", o->height_m)->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--coverage-m", o->coverage_m)->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--seed", o->seed)->capture_default_str();
    c.required.push_back(app->add_option("--out", o->out, "Station CSV"));
    c.out = &o->out;
    c.seed = &o->seed;
    c.run = [o](RunManifest& m) {
      const auto st = random_stations(o->count, o->width_m, o->height_m, o->coverage_m, split_seed(o->seed, 1));
      write_output(m, o->out, stations_csv(st));
      return Outcome{};
    };
    cmds.push_back(std::move(c));
  }
}

// -- workload ---------------------------------------------------------------

std::vector<TrafficSeries> load_series(RunManifest& m, const std::string& path) {
  return parse_series_csv(read_input(m, path));
}

void add_workload(CLI::App& root, std::vector<Command>& cmds) {
  auto* wl = root.add_subcommand("workload", "Traffic series and demand snapshots");
  wl->require_subcommand(1);

  {
    struct Opts {
      std::vector<std::string> cdr;
      std::string stations, out, snapshots;
      bool latlon = false, no_header = false, check_conservation = false;
      std::size_t grid_rows = 100, grid_cols = 100;
      double cell_m = 235.0, origin_x = 0.0, origin_y = 0.0;
      std::int64_t first_id = 1, interval_s = 600;
      std::string delimiter = ",", grid_col = "grid_id", time_col = "timestamp", traffic_col = "traffic";
    };
    auto o = std::make_shared<Opts>();
    auto* app = wl->add_subcommand("ingest", "Aggregate CDR files to per-station series");
    Command c{app, "workload ingest"};
    c.required.push_back(app->add_option("--cdr", o->cdr, "CDR files (plain or gzip)")->expected(1, -1));
    c.required.push_back(app->add_option("--stations", o->stations, "Station CSV"));
    app->add_flag("--latlon", o->latlon);
    app->add_option("--grid-rows", o->grid_rows)->capture_default_str();
    app->add_option("--grid-cols", o->grid_cols)->capture_default_str();
    app->add_option("--cell-m", o->cell_m)->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--origin-x", o->origin_x)->capture_default_str();
    app->add_option("--origin-y", o->origin_y)->capture_default_str();
    app->add_option("--first-id", o->first_id)->capture_default_str();
    app->add_option("--delimiter", o->delimiter, "Field separator; 'tab' for tabs")->capture_default_str();
    app->add_flag("--no-header", o->no_header, "Columns are given as zero-based indices");
    app->add_option("--grid-col", o->grid_col)->capture_default_str();
    app->add_option("--time-col", o->time_col)->capture_default_str();
    app->add_option("--traffic-col", o->traffic_col)->capture_default_str();
    app->add_option("--interval-s", o->interval_s)->check(CLI::PositiveNumber)->capture_default_str();
    app->add_flag("--check-conservation", o->check_conservation, "Recompute totals and fail on mismatch");
    app->add_option("--snapshots", o->snapshots, "Demand snapshot CSV");
    c.required.push_back(app->add_option("--out", o->out, "Series CSV"));
    c.out = &o->out;
    c.run = [o](RunManifest& m) {
      ColumnMap cols;
      if (o->delimiter == "tab" || o->delimiter == "\\t") {
        cols.delimiter = '\t';
      } else if (o->delimiter.size() == 1) {
        cols.delimiter = o->delimiter[0];
      } else {
        throw ConfigError("delimiter must be one character or 'tab'");
      }
      cols.has_header = !o->no_header;
      if (cols.has_header) {
        cols.grid = o->grid_col;
        cols.timestamp = o->time_col;
        cols.traffic = o->traffic_col;
      } else {
        cols.grid_index = static_cast<std::size_t>(parse_int(o->grid_col, "grid-col"));
        cols.timestamp_index = static_cast<std::size_t>(parse_int(o->time_col, "time-col"));
        cols.traffic_index = static_cast<std::size_t>(parse_int(o->traffic_col, "traffic-col"));
      }
      const auto stations = parse_stations_csv(read_input(m, o->stations), o->latlon);
      std::vector<CdrRecord> records;
      std::size_t skipped = 0, merged = 0;
      for (const auto& path : o->cdr) {
        auto r = parse_cdr(read_input(m, path), cols);
        records.insert(records.end(), r.records.begin(), r.records.end());
        skipped += r.skipped_rows;
        merged += r.merged_rows;
      }
      GridGeometry grid;
      grid.rows = o->grid_rows;
      grid.cols = o->grid_cols;
      grid.cell_m = o->cell_m;
      grid.origin = {o->origin_x, o->origin_y};
      grid.first_id = o->first_id;
      const auto grid_map = map_grids_to_stations(grid, stations);
      const auto agg = aggregate_to_regions(records, grid_map, o->interval_s);
      if (o->check_conservation) {
        double in = 0.0, outsum = 0.0;
        for (const auto& r : records) in += r.traffic;
        for (const auto& s : agg.series) outsum = std::accumulate(s.values.begin(), s.values.end(), outsum);
        if (std::abs(in - outsum) > 1e-9 * std::max(1.0, std::abs(in)))
          throw InvariantViolation("conservation: records total " + std::to_string(in) + " vs series total " +
                                   std::to_string(outsum));
        std::cerr << "conservation ok: total " << in << "\n";
      }
      std::cerr << "records " << records.size() << ", skipped " << skipped << ", merged " << merged
                << ", zero-filled cells " << agg.zero_filled << "\n";
      write_output(m, o->out, series_to_csv(agg.series));
      if (!o->snapshots.empty())
        write_output(m, o->snapshots, snapshots_to_csv(demand_snapshots(agg.series, ServiceSpec{})));
      return Outcome{};
    };
    cmds.push_back(std::move(c));
  }
  {
    struct Opts {
      SynthConfig cfg;
      std::uint64_t seed = 0;
      std::string out, snapshots;
    };
    auto o = std::make_shared<Opts>();
    auto* app = wl->add_subcommand("synth", "Synthetic diurnal traffic");
    Command c{app, "workload synth"};
    app->add_option("--regions", o->cfg.regions)->capture_default_str();
    app->add_option("--days", o->cfg.days)->capture_default_str();
    app->add_option("--interval-s", o->cfg.interval_s)->capture_default_str();
    app->add_option("--base-level", o->cfg.base_level)->capture_default_str();
    app->add_option("--daily-amp", o->cfg.daily_amp)->capture_default_str();
    app->add_option("--weekly-damp", o->cfg.weekly_damp)->capture_default_str();
    app->add_option("--noise-sd", o->cfg.noise_sd)->capture_default_str();
    app->add_option("--urban-fraction", o->cfg.urban_fraction)->capture_default_str();
    app->add_option("--region-spread", o->cfg.region_spread)->capture_default_str();
    app->add_option("--seed", o->seed)->capture_default_str();
    app->add_option("--snapshots", o->snapshots, "Demand snapshot CSV");
    c.required.push_back(app->add_option("--out", o->out, "Series CSV"));
    c.out = &o->out;
    c.seed = &o->seed;
    c.run = [o](RunManifest& m) {
      o->cfg.validate();
      const auto series = synth_workload(o->cfg, split_seed(o->seed, 1));
      write_output(m, o->out, series_to_csv(series));
      if (!o->snapshots.empty())
        write_output(m, o->snapshots, snapshots_to_csv(demand_snapshots(series, ServiceSpec{})));
      return Outcome{};
    };
    cmds.push_back(std::move(c));
  }
  {
    struct Opts {
      std::string series, out;
      std::size_t k = 3;
      std::uint64_t seed = 0;
    };
    auto o = std::make_shared<Opts>();
    auto* app = wl->add_subcommand("classify", "K-means traffic intensity per slot");
    Command c{app, "workload classify"};
    c.required.push_back(app->add_option("--series", o->series, "Series CSV"));
    app->add_option("--k", o->k)->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--seed", o->seed)->capture_default_str();
    c.required.push_back(app->add_option("--out", o->out, "Slot class CSV"));
    c.out = &o->out;
    c.seed = &o->seed;
    c.run = [o](RunManifest& m) {
      const auto series = load_series(m, o->series);
      const auto km = classify_slots(series, o->k, split_seed(o->seed, 1));
      std::ostringstream os;
      os.precision(17);
      os << "slot,mean,label,intensity\n";
      for (std::size_t t = 0; t < km.labels.size(); ++t) {
        double mean = 0.0;
        for (const auto& s : series) mean += s.values[t];
        mean /= static_cast<double>(series.size());
        os << t << ',' << mean << ',' << km.labels[t] << ',' << intensity_name(km.labels[t], o->k) << '\n';
      }
      write_output(m, o->out, os.str());
      return Outcome{};
    };
    cmds.push_back(std::move(c));
  }
}

// -- forecast ---------------------------------------------------------------

const TrafficSeries& pick_region(const std::vector<TrafficSeries>& series, long long region) {
  if (series.empty()) throw InvalidInput("no series");
  if (region < 0) return series.front();
  for (const auto& s : series)
    if (s.region_id == region) return s;
  throw LookupError("region " + std::to_string(region) + " not in series");
}

std::size_t split_point(std::size_t n, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("fraction must lie in (0, 1]");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction)));
}

struct LstmFlags {
  fc::LstmConfig cfg;
  std::string loss = "mae";
  void add(CLI::App* app) {
    app->add_option("--window", cfg.window)->capture_default_str();
    app->add_option("--hidden", cfg.hidden)->capture_default_str();
    app->add_option("--layers", cfg.layers)->capture_default_str();
    app->add_option("--epochs", cfg.epochs)->capture_default_str();
    app->add_option("--learning-rate", cfg.learning_rate)->capture_default_str();
    app->add_option("--batch-size", cfg.batch_size)->capture_default_str();
    app->add_option("--loss", loss, "mae or mse")->capture_default_str();
  }
  fc::LstmConfig resolved() const {
    auto c = cfg;
    c.loss = fc::parse_loss(loss);
    c.validate();
    return c;
  }
};

Json metrics_json(const fc::ForecastMetrics& e) { return {{"mae", e.mae}, {"rmse", e.rmse}, {"n", e.n}}; }

void add_forecast(CLI::App& root, std::vector<Command>& cmds) {
  auto* fcst = root.add_subcommand("forecast", "ARIMA and LSTM forecasting");
  fcst->require_subcommand(1);

  {
    struct Opts {
      std::string series, out, model = "arima", metrics;
      long long region = -1;
      int p = 1, d = 1, q = 1;
      bool auto_select = false;
      int max_p = 2, max_q = 2, max_d = 1, max_pq = 2;
      double holdout_fraction = 0.2, train_fraction = 1.0;
      LstmFlags lstm;
      std::uint64_t seed = 0;
    };
    auto o = std::make_shared<Opts>();
    auto* app = fcst->add_subcommand("fit", "Fit one region's model");
    Command c{app, "forecast fit"};
    c.required.push_back(app->add_option("--series", o->series, "Series CSV"));
    app->add_option("--region", o->region, "Region id; default the first")->capture_default_str();
    app->add_option("--model", o->model, "arima or lstm")->check(CLI::IsMember({"arima", "lstm"}))->capture_default_str();
    app->add_option("--p", o->p)->capture_default_str();
    app->add_option("--d", o->d)->capture_default_str();
    app->add_option("--q", o->q)->capture_default_str();
    app->add_flag("--auto", o->auto_select, "Grid-search (p, d, q) on a trailing holdout");
    app->add_option("--max-p", o->max_p)->capture_default_str();
    app->add_option("--max-q", o->max_q)->capture_default_str();
    app->add_option("--max-d", o->max_d)->capture_default_str();
    app->add_option("--max-pq", o->max_pq)->capture_default_str();
    app->add_option("--holdout-fraction", o->holdout_fraction)->capture_default_str();
    app->add_option("--train-fraction", o->train_fraction, "Leading share used for fitting")->capture_default_str();
    o->lstm.add(app);
    app->add_option("--seed", o->seed)->capture_default_str();
    app->add_option("--metrics", o->metrics, "Holdout metrics JSON (needs --train-fraction < 1)");
    c.required.push_back(app->add_option("--out", o->out, "Model JSON"));
    c.out = &o->out;
    c.seed = &o->seed;
    c.run = [o](RunManifest& m) {
      const auto all = load_series(m, o->series);
      const auto& s = pick_region(all, o->region);
      const std::span<const double> values(s.values);
      const std::size_t nt = split_point(values.size(), o->train_fraction);
      const auto train = values.first(nt);
      const auto test = values.subspan(nt);
      Json model;
      std::vector<double> pred;
      if (o->model == "arima") {
        fc::ArimaModel am;
        if (o->auto_select) {
          fc::AutoArimaOptions ao;
          ao.max_p = o->max_p;
          ao.max_q = o->max_q;
          ao.max_d = o->max_d;
          ao.max_pq = o->max_pq;
          ao.holdout_fraction = o->holdout_fraction;
          ao.fit.seed = split_seed(o->seed, 1);
          am = fc::auto_arima(train, ao).model;
        } else {
          fc::ArimaFitOptions fo;
          fo.seed = split_seed(o->seed, 1);
          am = fc::fit_arima(train, o->p, o->d, o->q, fo);
        }
        if (!test.empty()) pred = fc::rolling_forecast(am, test);
        model = arima_to_json(am);
        std::cerr << "ARIMA(" << am.p << "," << am.d << "," << am.q << ")\n";
      } else {
        const auto lm = fc::lstm_train(train, o->lstm.resolved(), split_seed(o->seed, 1));
        if (!test.empty()) pred = fc::lstm_rolling_forecast(lm, train, test);
        model = lstm_to_json(lm);
      }
      model["region_id"] = s.region_id;
      write_output(m, o->out, dump(model));
      if (!o->metrics.empty()) {
        if (test.empty()) throw ConfigError("--metrics needs --train-fraction < 1");
        const Json j = {{"region_id", s.region_id},
                        {"model", o->model},
                        {"holdout", metrics_json(fc::evaluate(pred, test))},
                        {"naive", metrics_json(fc::evaluate(fc::naive_forecast(train.back(), test), test))}};
        write_output(m, o->metrics, dump(j));
      }
      return Outcome{};
    };
    cmds.push_back(std::move(c));
  }
  {
    struct Opts {
      std::string model_file, series, out;
      std::size_t horizon = 6;
    };
    auto o = std::make_shared<Opts>();
    auto* app = fcst->add_subcommand("predict", "Multi-step forecast from a fitted model");
    Command c{app, "forecast predict"};
    c.required.push_back(app->add_option("--model-file", o->model_file, "Model JSON from forecast fit"));
    app->add_option("--series", o->series, "Series CSV supplying the LSTM input window");
    app->add_option("--horizon", o->horizon)->check(CLI::PositiveNumber)->capture_default_str();
    c.required.push_back(app->add_option("--out", o->out, "Forecast CSV (step,value)"));
    c.out = &o->out;
    c.run = [o](RunManifest& m) {
      const Json j = parse_json(read_input(m, o->model_file), o->model_file);
      const std::string kind = j.value("schema", Json::object()).value("kind", "");
      std::vector<double> out;
      if (kind == "arima") {
        out = fc::predict_arima(arima_from_json(j), o->horizon);
      } else if (kind == "lstm") {
        if (o->series.empty()) throw ConfigError("LSTM prediction needs --series");
        const auto lm = lstm_from_json(j);
        const auto all = load_series(m, o->series);
        const auto& s = pick_region(all, j.value("region_id", -1LL));
        if (s.values.size() < lm.window) throw InvalidInput("series shorter than the model window");
        std::vector<double> hist(s.values.end() - static_cast<std::ptrdiff_t>(lm.window), s.values.end());
        for (std::size_t h = 0; h < o->horizon; ++h) {
          const double y = fc::lstm_forward(lm, hist);
          out.push_back(y);
          hist.erase(hist.begin());
          hist.push_back(y);
        }
      } else {
        throw FormatError("unknown model kind '" + kind + "'");
      }
      std::ostringstream os;
      os.precision(17);
      os << "step,value\n";
      for (std::size_t h = 0; h < out.size(); ++h) os << h + 1 << ',' << out[h] << '\n';
      write_output(m, o->out, os.str());
      return Outcome{};
    };
    cmds.push_back(std::move(c));
  }
  {
    struct Opts {
      std::string series, out, model = "arima";
      long long region = -1;
      int max_p = 2, max_q = 2, max_d = 1, max_pq = 2;
      double holdout_fraction = 0.3;
      std::size_t window = 24, batch_size = 32;
      std::vector<std::size_t> epochs{1500, 1700, 1800};
      std::vector<double> learning_rates{0.001, 0.01, 0.1, 0.0001};
      std::vector<std::string> losses{"mae", "mse"};
      std::vector<std::size_t> layers{1, 2, 3};
      std::vector<std::size_t> hidden{200, 400, 600};
      std::uint64_t seed = 0;
    };
    auto o = std::make_shared<Opts>();
    auto* app = fcst->add_subcommand("sweep", "Hyperparameter grid scored on a trailing holdout");
    Command c{app, "forecast sweep"};
    c.required.push_back(app->add_option("--series", o->series, "Series CSV"));
    app->add_option("--region", o->region)->capture_default_str();
    app->add_option("--model", o->model)->check(CLI::IsMember({"arima", "lstm"}))->capture_default_str();
    app->add_option("--max-p", o->max_p)->capture_default_str();
    app->add_option("--max-q", o->max_q)->capture_default_str();
    app->add_option("--max-d", o->max_d)->capture_default_str();
    app->add_option("--max-pq", o->max_pq)->capture_default_str();
    app->add_option("--holdout-fraction", o->holdout_fraction)->capture_default_str();
    app->add_option("--window", o->window)->capture_default_str();
    app->add_option("--batch-size", o->batch_size)->capture_default_str();
    app->add_option("--epochs-list", o->epochs)->delimiter(',')->capture_default_str();
    app->add_option("--lr-list", o->learning_rates)->delimiter(',')->capture_default_str();
    app->add_option("--loss-list", o->losses)->delimiter(',')->capture_default_str();
    app->add_option("--layers-list", o->layers)->delimiter(',')->capture_default_str();
    app->add_option("--hidden-list", o->hidden)->delimiter(',')->capture_default_str();
    app->add_option("--seed", o->seed)->capture_default_str();
    c.required.push_back(app->add_option("--out", o->out, "Candidate table CSV"));
    c.out = &o->out;
    c.seed = &o->seed;
    c.run = [o](RunManifest& m) {
      const auto all = load_series(m, o->series);
      const auto& s = pick_region(all, o->region);
      std::ostringstream os;
      os.precision(17);
      if (o->model == "arima") {
        fc::AutoArimaOptions ao;
        ao.max_p = o->max_p;
        ao.max_q = o->max_q;
        ao.max_d = o->max_d;
        ao.max_pq = o->max_pq;
        ao.holdout_fraction = o->holdout_fraction;
        ao.fit.seed = split_seed(o->seed, 1);
        const auto r = fc::auto_arima(s.values, ao);
        os << "p,d,q,ok,mae,rmse,selected,error\n";
        for (const auto& cand : r.candidates) {
          const bool sel = cand.p == r.model.p && cand.d == r.model.d && cand.q == r.model.q;
          os << cand.p << ',' << cand.d << ',' << cand.q << ',' << cand.ok << ',' << cand.holdout.mae << ','
             << cand.holdout.rmse << ',' << sel << ",\"" << cand.error << "\"\n";
        }
      } else {
        const std::span<const double> values(s.values);
        const std::size_t nt = split_point(values.size(), 1.0 - o->holdout_fraction);
        const auto train = values.first(nt), test = values.subspan(nt);
        if (test.empty()) throw ConfigError("holdout is empty");
        os << "epochs,learning_rate,loss,layers,hidden,mae,rmse\n";
        std::uint64_t run = 0;
        for (auto e : o->epochs)
          for (auto lr : o->learning_rates)
            for (const auto& loss : o->losses)
              for (auto l : o->layers)
                for (auto h : o->hidden) {
                  fc::LstmConfig cfg;
                  cfg.window = o->window;
                  cfg.batch_size = o->batch_size;
                  cfg.epochs = e;
                  cfg.learning_rate = lr;
                  cfg.loss = fc::parse_loss(loss);
                  cfg.layers = l;
                  cfg.hidden = h;
                  const auto lm = fc::lstm_train(train, cfg, split_seed(o->seed, ++run));
                  const auto ev = fc::evaluate(fc::lstm_rolling_forecast(lm, train, test), test);
                  os << e << ',' << lr << ',' << loss << ',' << l << ',' << h << ',' << ev.mae << ',' << ev.rmse << '\n';
                }
      }
      write_output(m, o->out, os.str());
      return Outcome{};
    };
    cmds.push_back(std::move(c));
  }
  {
    struct Opts {
      std::size_t hidden = 4, window = 6, layers = 1;
      bool mutate = false;
      double tolerance = 1e-4;
      std::uint64_t seed = 0;
      std::string out;
    };
    auto o = std::make_shared<Opts>();
    auto* app = fcst->add_subcommand("gradcheck", "Analytic vs finite-difference LSTM gradient");
    Command c{app, "forecast gradcheck"};
    app->add_option("--hidden", o->hidden)->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--window", o->window)->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--layers", o->layers)->check(CLI::PositiveNumber)->capture_default_str();
    app->add_flag("--mutate", o->mutate, "Corrupt the forget-gate gradient");
    app->add_option("--tolerance", o->tolerance)->capture_default_str();
    app->add_option("--seed", o->seed)->capture_default_str();
    app->add_option("--out", o->out, "Result JSON; stdout when omitted");
    c.out = &o->out;
    c.seed = &o->seed;
    c.run = [o](RunManifest& m) {
      const auto lm = fc::lstm_init(o->window, o->hidden, o->layers, split_seed(o->seed, 1));
      Rng rng(split_seed(o->seed, 2));
      std::vector<double> xs(o->window);
      for (auto& x : xs) x = uniform(rng, 0.0, 1.0);
      const double target = uniform(rng, 0.0, 1.0);
      const double err = fc::lstm_gradient_check(
          lm, xs, target, o->mutate ? fc::GradFault::negate_forget_gate : fc::GradFault::none);
      const bool passed = err <= o->tolerance;
      const Json j = {{"max_relative_error", err},
                      {"tolerance", o->tolerance},
                      {"mutated", o->mutate},
                      {"parameters", lm.params.size()},
                      {"passed", passed}};
      if (o->out.empty()) {
        std::cout << dump(j);
      } else {
        write_output(m, o->out, dump(j));
      }
      if (!passed && !o->mutate) return Outcome{kInternal, "gradient check failed"};
      return Outcome{};
    };
    cmds.push_back(std::move(c));
  }
}

// -- place ------------------------------------------------------------------

void add_place(CLI::App& root, std::vector<Command>& cmds) {
  auto* pl = root.add_subcommand("place", "Single-slot placement instances");
  pl->require_subcommand(1);
  {
    struct Opts {
      std::string topology, series, out;
      std::size_t slot = 0;
      double latency_cap_ms = 100.0, capacity_scale = 0.01, facility_weight = 1.0;
    };
    auto o = std::make_shared<Opts>();
    auto* app = pl->add_subcommand("build", "Instance for one slot");
    Command c{app, "place build"};
    c.required.push_back(app->add_option("--topology", o->topology, "Topology JSON"));
    c.required.push_back(app->add_option("--series", o->series, "Series CSV"));
    app->add_option("--slot", o->slot)->capture_default_str();
    app->add_option("--latency-cap-ms", o->latency_cap_ms)->capture_default_str();
    app->add_option("--capacity-scale", o->capacity_scale)->capture_default_str();
    app->add_option("--facility-weight", o->facility_weight)->capture_default_str();
    c.required.push_back(app->add_option("--out", o->out, "Instance JSON"));
    c.out = &o->out;
    c.run = [o](RunManifest& m) {
      const auto topo = topology_from_json(parse_json(read_input(m, o->topology), o->topology));
      const auto snaps = demand_snapshots(load_series(m, o->series), ServiceSpec{});
      if (o->slot >= snaps.size()) throw LookupError("slot " + std::to_string(o->slot) + " out of range");
      if (snaps[o->slot].demands.empty()) throw DegenerateInput("slot has no demand");
      InstanceOptions io;
      io.latency_cap_ms = o->latency_cap_ms;
      io.facility_weight = o->facility_weight;
      const auto inst = build_instance(topo, snaps[o->slot], initial_node_state(topo, o->capacity_scale), io);
      write_output(m, o->out, dump(instance_to_json(inst)));
      return Outcome{};
    };
    cmds.push_back(std::move(c));
  }
  {
    struct Opts {
      std::string instance, out, solver = "auto";
      std::uint64_t seed = 0;
      ExactLimits limits;
      HeuristicOptions heuristic;
    };
    auto o = std::make_shared<Opts>();
    auto* app = pl->add_subcommand("solve", "Solve a placement instance");
    Command c{app, "place solve"};
    c.required.push_back(app->add_option("--instance", o->instance, "Instance JSON"));
    app->add_option("--solver", o->solver)->check(CLI::IsMember({"auto", "exact", "heuristic"}))->capture_default_str();
    app->add_option("--max-facilities", o->limits.max_facilities)->capture_default_str();
    app->add_option("--max-demands", o->limits.max_demands)->capture_default_str();
    app->add_option("--time-budget-ms", o->limits.time_budget_ms)->capture_default_str();
    app->add_option("--kicks", o->heuristic.kicks)->capture_default_str();
    app->add_option("--swap-neighbors", o->heuristic.swap_neighbors)->capture_default_str();
    app->add_option("--seed", o->seed)->capture_default_str();
    c.required.push_back(app->add_option("--out", o->out, "Solution JSON"));
    c.out = &o->out;
    c.seed = &o->seed;
    c.run = [o](RunManifest& m) {
      const auto inst = instance_from_json(parse_json(read_input(m, o->instance), o->instance));
      const auto seed = split_seed(o->seed, 1);
      PlacementSolution sol;
      if (o->solver == "exact") {
        sol = solve_exact(inst, o->limits);
      } else if (o->solver == "heuristic") {
        sol = solve_heuristic(inst, seed, o->heuristic);
      } else {
        sol = solve_auto(inst, seed, o->limits, o->heuristic);
      }
      std::cerr << diagnostics_to_json(sol.diagnostics).dump() << "\n";
      if (const auto rep = verify(inst, sol); sol.status != SolveStatus::infeasible && !rep.feasible)
        throw InvariantViolation("solver returned an infeasible solution: " + rep.violations.front());
      write_output(m, o->out, dump(solution_to_json(sol)));
      if (sol.status == SolveStatus::infeasible)
        return Outcome{kInfeasible, "capacity-infeasible: " + std::to_string(sol.uncovered_volume()) + " uncovered"};
      return Outcome{};
    };
    cmds.push_back(std::move(c));
  }
}

// -- simulate ---------------------------------------------------------------

struct SimFlags {
  SimConfig cfg;
  std::string topology, series;
  std::uint64_t seed = 0;
  void add(CLI::App* app, Command& c) {
    c.required.push_back(app->add_option("--topology", topology, "Topology JSON"));
    c.required.push_back(app->add_option("--series", series, "Series CSV"));
    app->add_option("--seed", seed)->capture_default_str();
    app->add_option("--latency-cap-ms", cfg.latency_cap_ms)->capture_default_str();
    app->add_option("--concurrent-fraction", cfg.concurrent_load_fraction)->capture_default_str();
    app->add_option("--concurrent-max-latency-ms", cfg.concurrent_max_latency_ms)->capture_default_str();
    app->add_option("--capacity-scale", cfg.capacity_scale)->capture_default_str();
    app->add_option("--facility-weight", cfg.facility_weight)->capture_default_str();
    app->add_option("--max-facilities", cfg.limits.max_facilities)->capture_default_str();
    app->add_option("--max-demands", cfg.limits.max_demands)->capture_default_str();
    app->add_option("--kicks", cfg.heuristic.kicks)->capture_default_str();
    app->add_option("--swap-neighbors", cfg.heuristic.swap_neighbors)->capture_default_str();
    c.seed = &seed;
  }
};

void add_simulate(CLI::App& root, std::vector<Command>& cmds) {
  {
    struct Opts {
      SimFlags sim;
      std::string strategy = "all", forecast = "arima", out, trace, comparison, events;
      std::size_t slots = 0, runs = 1;
      int parallel_runs = 1;
      double train_fraction = 0.25;
      bool global_model = false;
      LstmFlags lstm;
    };
    auto o = std::make_shared<Opts>();
    auto* app = root.add_subcommand("simulate", "Slot-by-slot placement with delivery metrics");
    Command c{app, "simulate"};
    o->sim.add(app, c);
    app->add_option("--strategy", o->strategy, "DA, QoEAP, SMART_FL, TIPTOP or all")->capture_default_str();
    app->add_option("--slots", o->slots, "Number of slots; default every slot")->check(CLI::PositiveNumber);
    app->add_option("--runs", o->runs, "Independent runs with seeds seed, seed+1, ...")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--parallel-runs", o->parallel_runs, "Runs executed concurrently")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--forecast", o->forecast, "TIPTOP predictor: perfect, naive, arima, lstm")->capture_default_str();
    app->add_option("--train-fraction", o->train_fraction)->capture_default_str();
    app->add_flag("--global-model", o->global_model, "One forecast model shared by all regions");
    app->add_option("--packets-per-unit", o->sim.cfg.packets_per_unit)->capture_default_str();
    app->add_option("--reliability-access", o->sim.cfg.reliability.access)->capture_default_str();
    app->add_option("--reliability-aggregation", o->sim.cfg.reliability.aggregation)->capture_default_str();
    app->add_option("--reliability-core", o->sim.cfg.reliability.core)->capture_default_str();
    o->lstm.add(app);
    c.required.push_back(app->add_option("--out", o->out, "Report JSON"));
    app->add_option("--trace", o->trace, "Per-slot trace CSV");
    app->add_option("--comparison", o->comparison, "One row per strategy and run");
    app->add_option("--events", o->events, "Event log (JSON lines)");
    c.out = &o->out;
    c.run = [o](RunManifest& m) {
      std::vector<Strategy> strategies;
      if (o->strategy == "all") {
        strategies = {Strategy::DA, Strategy::QoEAP, Strategy::SMART_FL, Strategy::TIPTOP};
      } else {
        strategies.push_back(parse_strategy(o->strategy));
      }
      const auto topo = topology_from_json(parse_json(read_input(m, o->sim.topology), o->sim.topology));
      const auto series = load_series(m, o->sim.series);
      const auto snaps = demand_snapshots(series, ServiceSpec{});
      if (o->slots > snaps.size())
        throw InvalidInput("requested " + std::to_string(o->slots) + " slots but the series has " +
                           std::to_string(snaps.size()));
      const bool needs_forecast = std::find(strategies.begin(), strategies.end(), Strategy::TIPTOP) != strategies.end();
      fc::RollingOptions ro;
      ro.method = fc::parse_method(o->forecast);
      ro.train_fraction = o->train_fraction;
      ro.global = o->global_model;
      ro.lstm = o->lstm.resolved();
      auto cfg = o->sim.cfg;
      cfg.slots = o->slots;
      cfg.interval_s = series.front().interval_s;
      cfg.validate();

      const std::size_t runs = o->runs;
      std::vector<std::vector<SimReport>> results(runs);
      std::vector<std::exception_ptr> errors(runs);
#pragma omp parallel for schedule(dynamic) num_threads(o->parallel_runs)
      for (std::size_t r = 0; r < runs; ++r) {
        try {
          const std::uint64_t seed = o->sim.seed + r;
          std::vector<DemandSnapshot> fsnaps;
          if (needs_forecast) {
            auto opts = ro;
            opts.seed = split_seed(seed, 1);
            fsnaps = opts.method == fc::Method::perfect
                         ? snaps
                         : demand_snapshots(fc::rolling_series_forecast(series, opts), ServiceSpec{});
          }
          for (auto s : strategies) {
            auto run_cfg = cfg;
            run_cfg.strategy = s;
            run_cfg.seed = seed;
            results[r].push_back(run_simulation(topo, snaps, needs_forecast ? &fsnaps : nullptr, run_cfg));
          }
        } catch (...) {
          errors[r] = std::current_exception();
        }
      }
      for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

      std::vector<SimReport> flat;
      for (auto& v : results)
        for (auto& rep : v) flat.push_back(std::move(rep));
      Json doc = {{"schema", {{"kind", "report_set"}, {"version", kReportSchema}}}, {"reports", Json::array()}};
      for (const auto& rep : flat) doc["reports"].push_back(report_to_json(rep));
      write_output(m, o->out, dump(doc));
      if (!o->trace.empty()) write_output(m, o->trace, trace_csv(flat));
      if (!o->comparison.empty()) write_output(m, o->comparison, comparison_csv(flat));
      if (!o->events.empty()) {
        std::string lines;
        for (const auto& rep : flat)
          for (const auto& e : rep.events) lines += e + "\n";
        write_output(m, o->events, lines);
      }
      std::cerr << comparison_csv(flat);
      return Outcome{};
    };
    cmds.push_back(std::move(c));
  }
  {
    struct Opts {
      SimFlags sim;
      std::vector<std::size_t> slots;
      std::string out, csv;
    };
    auto o = std::make_shared<Opts>();
    auto* app = root.add_subcommand("snapshot-report", "Intensity class and node usage for chosen slots");
    Command c{app, "snapshot-report"};
    o->sim.add(app, c);
    c.required.push_back(app->add_option("--slots", o->slots, "Slot indices")->delimiter(','));
    c.required.push_back(app->add_option("--out", o->out, "Report JSON"));
    app->add_option("--csv", o->csv, "Per-node table CSV");
    c.out = &o->out;
    c.run = [o](RunManifest& m) {
      const auto topo = topology_from_json(parse_json(read_input(m, o->sim.topology), o->sim.topology));
      const auto series = load_series(m, o->sim.series);
      auto cfg = o->sim.cfg;
      cfg.seed = o->sim.seed;
      cfg.interval_s = series.front().interval_s;
      cfg.validate();
      const auto rows = snapshot_report(topo, series, o->slots, cfg);
      write_output(m, o->out, dump(snapshot_report_to_json(rows)));
      if (!o->csv.empty()) write_output(m, o->csv, snapshot_report_csv(rows));
      return Outcome{};
    };
    cmds.push_back(std::move(c));
  }
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const InvalidInput*>(&e) || dynamic_cast<const FormatError*>(&e) ||
      dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const LookupError*>(&e))
    return kUsage;
  if (dynamic_cast<const DegenerateInput*>(&e) || dynamic_cast<const SizeLimitError*>(&e) ||
      dynamic_cast<const TrainingError*>(&e) || dynamic_cast<const fc::ArimaFitError*>(&e))
    return kInfeasible;
  return kInternal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical fog placement simulator"};
  app.set_version_flag("--version", std::string("fogplace ") + kToolVersion + "\n" + schema_versions());
  std::string config_path;
  app.add_option("--config", config_path, "key = value file supplying any flag; flags on the command line win");
  app.require_subcommand(1);

  std::vector<Command> cmds;
  add_topology(app, cmds);
  add_workload(app, cmds);
  add_forecast(app, cmds);
  add_place(app, cmds);
  add_simulate(app, cmds);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  Command* cmd = nullptr;
  for (auto& c : cmds)
    if (c.app->parsed()) cmd = &c;
  if (!cmd) {
    std::cerr << app.help();
    return kUsage;
  }

  RunManifest manifest;
  manifest.command = cmd->name;
  manifest.started_utc = utc_now();
  try {
    if (!config_path.empty()) {
      if (!std::filesystem::is_regular_file(config_path)) throw InvalidInput("cannot open config '" + config_path + "'");
      apply_config(cmd->app, KeyValueConfig::load(config_path));
      manifest.add_input(config_path);
    }
    for (const auto* opt : cmd->required)
      if (opt->count() == 0) throw CLI::RequiredError(opt->get_name());
    manifest.config = effective_config(cmd->app);
    if (cmd->seed) manifest.seed = *cmd->seed;

    const Outcome outcome = cmd->run(manifest);
    manifest.finished_utc = utc_now();
    if (cmd->out && !cmd->out->empty()) write_manifest(manifest, *cmd->out + ".manifest.json");
    if (outcome.code != kOk) std::cerr << "error: " << outcome.message << "\n";
    return outcome.code;
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}
