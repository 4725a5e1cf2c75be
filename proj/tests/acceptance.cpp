// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.
//
// Optional data (checked only when set):
//   FOGPLACE_PAPER_STATIONS  station CSV of the 1150-station reference layout
//   FOGPLACE_MILAN_SERIES    series CSV of the Milan traffic (10-minute slots)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "fogplace/csv.hpp"
#include "fogplace/forecast/arima.hpp"
#include "fogplace/forecast/lstm.hpp"
#include "fogplace/forecast/metrics.hpp"
#include "fogplace/forecast/rolling.hpp"
#include "fogplace/kernels.hpp"
#include "fogplace/kmeans.hpp"
#include "fogplace/manifest.hpp"
#include "fogplace/placement.hpp"
#include "fogplace/reservation.hpp"
#include "fogplace/rng.hpp"
#include "fogplace/serialize.hpp"
#include "fogplace/simulate.hpp"
#include "fogplace/topology.hpp"
#include "fogplace/workload.hpp"
#include "oracles.hpp"

using namespace fogplace;
namespace fc = fogplace::forecast;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool close_rel(double a, double b, double tol = 1e-9) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

// Small integer instance; `services` distinct service ids over the demands.
PlacementInstance random_instance(Rng& rng, std::size_t F, std::size_t D, int max_value, int services,
                                  double latency_cap) {
  auto draw = [&](int lo, int hi) { return static_cast<double>(std::uniform_int_distribution<int>(lo, hi)(rng)); };
  PlacementInstance in;
  for (std::size_t f = 0; f < F; ++f) in.facilities.push_back({static_cast<NodeId>(f), draw(1, max_value), 1.0});
  for (std::size_t d = 0; d < D; ++d)
    in.demands.push_back({static_cast<NodeId>(d), static_cast<int>(d % static_cast<std::size_t>(services)), draw(1, max_value)});
  for (std::size_t k = 0; k < F * D; ++k) in.latency.push_back(draw(1, max_value));
  in.latency_cap_ms = latency_cap;
  return in;
}

// ---- 1 ----
Verdict exact_vs_brute_force() {
  const auto t0 = Clock::now();
  std::size_t n = 0, agree = 0, infeasible = 0;
  for (std::size_t F = 1; F <= 5; ++F)
    for (std::size_t D = 1; D <= 6; ++D)
      for (int rep = 0; rep < 40; ++rep) {
        Rng rng(split_seed(0xC1, F * 1000 + D * 100 + static_cast<std::size_t>(rep)));
        // every fourth instance has inadmissible arcs
        const auto inst = random_instance(rng, F, D, 10, 1, rep % 4 == 3 ? 7.0 : 100.0);
        const auto bf = oracle::brute_force(inst);
        const auto ex = solve_exact(inst);
        ++n;
        if (!bf.feasible) {
          ++infeasible;
          agree += ex.status == SolveStatus::infeasible;
        } else {
          agree += ex.status == SolveStatus::optimal && close_rel(ex.objective, bf.objective) && verify(inst, ex).feasible;
        }
      }
  const double secs = seconds_since(t0);
  return {agree == n && n >= 500 && secs < 60.0,
          fmt("%zu/%zu instances agree (%zu infeasible), %.1f s", agree, n, infeasible, secs)};
}

// ---- 2 ----
Verdict heuristic_quality() {
  const auto t0 = Clock::now();
  std::size_t n = 0, within = 0, feasible = 0, never_better = 0;
  double worst = 1.0;
  const double lambdas[] = {1.0, 5.0, 20.0};
  for (std::uint64_t s = 0; n < 200; ++s) {
    Rng rng(split_seed(0xC2, s));
    const std::size_t F = 2 + s % 7, D = 3 + s % 10;
    auto inst = random_instance(rng, F, D, 30, 1 + static_cast<int>(s % 2), 25.0);
    for (auto& f : inst.facilities) f.capacity = 5.0 + f.capacity;
    inst.facility_weight = lambdas[s % 3];
    if (inst.capacity_infeasible()) continue;
    const auto ex = solve_exact(inst);
    if (ex.status != SolveStatus::optimal) continue;
    const auto he = solve_heuristic(inst, split_seed(0xC2, s + 1));
    ++n;
    feasible += he.status != SolveStatus::infeasible && verify(inst, he).feasible;
    never_better += he.objective >= ex.objective - 1e-9 * std::max(1.0, ex.objective);
    const double gap = he.objective / ex.objective;
    worst = std::max(worst, gap);
    within += gap <= 1.10;
  }
  const double secs = seconds_since(t0);
  return {within * 100 >= 95 * n && feasible == n && never_better == n && secs < 60.0,
          fmt("%zu/%zu within 1.10x (worst %.4f), %zu feasible, %.1f s", within, n, worst, feasible, secs)};
}

// ---- 3 ----
Verdict hierarchy_invariants() {
  const auto t0 = Clock::now();
  std::size_t violations = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng rng(split_seed(0xC3, s));
    const auto count = static_cast<std::size_t>(std::uniform_int_distribution<int>(20, 200)(rng));
    const auto st = random_stations(count, 15000.0, 15000.0, 1500.0, split_seed(0xC3, 100 + s));
    HierarchyOptions h;
    h.mu = 1 + static_cast<int>(s % 3);
    h.seed = split_seed(0xC3, 200 + s);
    const auto topo = build_hierarchy(st, h);
    violations += check_invariants(topo).size();
    violations += topo.base_stations().size() != count;
  }
  std::string detail = fmt("%zu violations over 50 layouts", violations);
  bool pass = violations == 0;
  if (const char* path = std::getenv("FOGPLACE_PAPER_STATIONS")) {
    const auto st = parse_stations_csv(read_file(path), false);
    const auto topo = build_hierarchy(st, HierarchyOptions{});
    const auto sizes = topo.tier_sizes();
    const bool match = sizes == std::vector<std::size_t>{1150, 7, 2, 1};
    pass = pass && match;
    std::string s;
    for (auto k : sizes) s += (s.empty() ? "" : "/") + std::to_string(k);
    detail += "; reference layout tiers " + s + (match ? " (match)" : " (expected 1150/7/2/1)");
  } else {
    detail += "; reference layout not provided";
  }
  return {pass, detail + fmt(", %.1f s", seconds_since(t0))};
}

// w_t = phi w_{t-1} - theta e_{t-1} + e_t, integrated once.
std::vector<double> arima111(std::size_t n, double phi, double theta, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> y(n);
  double w = 0.0, e_prev = 0.0, level = 0.0;
  for (std::size_t t = 0; t < n + 100; ++t) {
    const double e = noise(rng);
    w = phi * w - theta * e_prev + e;
    e_prev = e;
    level += w;
    if (t >= 100) y[t - 100] = level;
  }
  return y;
}

// ---- 4 ----
Verdict arima_recovery() {
  const auto t0 = Clock::now();
  int phi_ok = 0, selected = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto y = arima111(2000, 0.6, 0.3, split_seed(0xC4, s));
    fc::ArimaFitOptions fo;
    fo.seed = split_seed(0xC4, 100 + s);
    const auto m = fc::fit_arima(y, 1, 1, 1, fo);
    phi_ok += std::abs(m.phi[0] - 0.6) <= 0.15;
    fc::AutoArimaOptions ao;
    ao.max_p = ao.max_q = ao.max_d = 1;
    ao.holdout_fraction = 0.5;
    ao.fit = fo;
    const auto a = fc::auto_arima(y, ao);
    selected += a.model.p == 1 && a.model.d == 1 && a.model.q == 1;
  }
  const double secs = seconds_since(t0);
  return {phi_ok >= 45 && selected >= 40 && secs < 120.0,
          fmt("phi within 0.15 on %d/50, auto selects (1,1,1) on %d/50, %.1f s", phi_ok, selected, secs)};
}

// ---- 5 ----
Verdict lstm_gradients() {
  const auto t0 = Clock::now();
  double worst = 0.0, weakest_mutation = std::numeric_limits<double>::infinity();
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(split_seed(0xC5, s));
    const std::size_t hidden = 1 + s % 8, window = 2 + (s * 3) % 9, layers = 1 + s % 2;
    const auto m = fc::lstm_init(window, hidden, layers, split_seed(0xC5, 100 + s));
    std::vector<double> xs(window);
    for (auto& x : xs) x = uniform(rng, 0.0, 1.0);
    const double target = uniform(rng, 0.0, 1.0);
    worst = std::max(worst, fc::lstm_gradient_check(m, xs, target));
    weakest_mutation =
        std::min(weakest_mutation, fc::lstm_gradient_check(m, xs, target, fc::GradFault::negate_forget_gate));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-4 && weakest_mutation > 1e-2 && secs < 60.0,
          fmt("max rel error %.2e, mutated min %.3f, %.1f s", worst, weakest_mutation, secs)};
}

// ---- 6 ----
Verdict forecast_ordering() {
  const auto t0 = Clock::now();
  int lstm_wins = 0, arima_beats_naive = 0, lstm_beats_naive = 0;
  double sum_a = 0.0, sum_l = 0.0, sum_n = 0.0;
  constexpr int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    SynthConfig sc;
    sc.regions = 1;
    sc.days = 28;
    sc.interval_s = 3600;
    const auto series = synth_workload(sc, split_seed(0xC6, static_cast<std::uint64_t>(s)));
    const std::span<const double> v(series[0].values);
    const std::size_t nt = v.size() * 7 / 10;
    const auto train = v.first(nt), test = v.subspan(nt);
    const auto a = fc::evaluate(fc::rolling_forecast(fc::fit_arima(train, 1, 1, 1), test), test);
    const auto lm = fc::lstm_train(train, fc::LstmConfig{}, split_seed(0xC6, 100 + static_cast<std::uint64_t>(s)));
    const auto l = fc::evaluate(fc::lstm_rolling_forecast(lm, train, test), test);
    const auto n = fc::evaluate(fc::naive_forecast(train.back(), test), test);
    lstm_wins += l.mae <= a.mae;
    arima_beats_naive += a.mae < n.mae;
    lstm_beats_naive += l.mae < n.mae;
    sum_a += a.mae;
    sum_l += l.mae;
    sum_n += n.mae;
  }
  bool pass = lstm_wins * 10 >= 7 * seeds && arima_beats_naive == seeds && lstm_beats_naive == seeds;
  std::string detail = fmt("LSTM <= ARIMA on %d/%d; beat naive ARIMA %d, LSTM %d; mean MAE %.3f/%.3f/%.3f", lstm_wins,
                           seeds, arima_beats_naive, lstm_beats_naive, sum_l / seeds, sum_a / seeds, sum_n / seeds);
  if (const char* path = std::getenv("FOGPLACE_MILAN_SERIES")) {
    const auto series = parse_series_csv(read_file(path));
    const std::size_t per_day = static_cast<std::size_t>(86400 / series.front().interval_s);
    double mae = 0.0;
    for (const auto& s : series) {
      const std::span<const double> v(s.values);
      const auto train = v.first(std::min(v.size(), 40 * per_day));
      const auto test = v.subspan(train.size(), std::min(v.size() - train.size(), 22 * per_day));
      mae += fc::evaluate(fc::rolling_forecast(fc::fit_arima(train, 1, 1, 1), test), test).mae;
    }
    mae /= static_cast<double>(series.size());
    const bool ok = std::abs(mae - 1.092) <= 0.25 * 1.092;
    pass = pass && ok;
    detail += fmt("; Milan ARIMA MAE %.3f", mae);
  } else {
    detail += "; Milan data not provided";
  }
  const double secs = seconds_since(t0);
  return {pass && secs < 600.0, detail + fmt(", %.1f s", secs)};
}

// ---- 7 ----
Verdict reservation_algebra() {
  constexpr NodeId C = 3, D = 4, E = 5;
  const auto r = reserve({E, C}, {E, C, D});
  bool pass = r.Y == NodeSet{E, C} && r.Gamma == NodeSet{E, C, D};
  std::size_t bad = 0;
  Rng rng(0xC7);
  for (int i = 0; i < 1000; ++i) {
    NodeSet a, p;
    const int universe = 1 + i % 12;
    for (NodeId k = 0; k < universe; ++k) {
      if (rng() % 2) a.insert(k);
      if (rng() % 2) p.insert(k);
    }
    const auto s = reserve(a, p);
    const bool y_in_gamma = std::includes(s.Gamma.begin(), s.Gamma.end(), s.Y.begin(), s.Y.end());
    const bool p_in_gamma = std::includes(s.Gamma.begin(), s.Gamma.end(), p.begin(), p.end());
    NodeSet y, g = p;
    for (auto n : a)
      if (p.count(n)) y.insert(n);
    g.insert(y.begin(), y.end());
    bad += !(y_in_gamma && p_in_gamma && s.Y == y && s.Gamma == g);
  }
  pass = pass && bad == 0;
  return {pass, fmt("worked example %s, %zu/1000 fuzzed pairs violate", pass ? "exact" : "wrong", bad)};
}

struct Scenario {
  Topology topo;
  std::vector<TrafficSeries> series;
  std::vector<DemandSnapshot> snaps;
  std::vector<DemandSnapshot> forecasts;
};

Scenario make_scenario(std::uint64_t seed, std::size_t days) {
  Scenario sc;
  const auto st = random_stations(20, 10000.0, 10000.0, 1500.0, split_seed(seed, 1));
  HierarchyOptions h;
  h.seed = split_seed(seed, 2);
  sc.topo = build_hierarchy(st, h);
  assign_resources(sc.topo, default_tier_ranges(sc.topo.tier_count()), split_seed(seed, 3));
  SynthConfig cfg;
  cfg.days = days;
  sc.series = synth_workload(cfg, split_seed(seed, 4));
  sc.snaps = demand_snapshots(sc.series, ServiceSpec{});
  fc::RollingOptions ro;
  ro.seed = split_seed(seed, 5);
  sc.forecasts = demand_snapshots(fc::rolling_series_forecast(sc.series, ro), ServiceSpec{});
  return sc;
}

// ---- 8 ----
Verdict strategy_ordering() {
  const auto t0 = Clock::now();
  int passing = 0;
  std::string per_seed;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto sc = make_scenario(seed, 7);
    std::map<Strategy, SimReport> rep;
    for (auto s : {Strategy::DA, Strategy::QoEAP, Strategy::SMART_FL, Strategy::TIPTOP}) {
      SimConfig cfg;
      cfg.strategy = s;
      cfg.seed = seed;
      cfg.concurrent_load_fraction = 0.3;
      rep[s] = run_simulation(sc.topo, sc.snaps, &sc.forecasts, cfg);
    }
    const auto &da = rep[Strategy::DA], &qo = rep[Strategy::QoEAP], &sm = rep[Strategy::SMART_FL],
               &tt = rep[Strategy::TIPTOP];
    const bool ok = tt.avg_latency_ms <= sm.avg_latency_ms && sm.avg_latency_ms <= da.avg_latency_ms &&
                    tt.packet_delivery_rate >= sm.packet_delivery_rate &&
                    sm.packet_delivery_rate >= qo.packet_delivery_rate &&
                    sm.content_delivery_rate >= qo.content_delivery_rate;
    passing += ok;
    per_seed += ok ? '+' : '-';
    std::fprintf(stderr, "  seed %llu: lat %.3f/%.3f/%.3f pdr %.6f/%.6f/%.6f cdr %.7f/%.7f (%+.2e) %s\n",
                 static_cast<unsigned long long>(seed), tt.avg_latency_ms, sm.avg_latency_ms, da.avg_latency_ms,
                 tt.packet_delivery_rate, sm.packet_delivery_rate, qo.packet_delivery_rate, sm.content_delivery_rate,
                 qo.content_delivery_rate, sm.content_delivery_rate - qo.content_delivery_rate, ok ? "ok" : "FAIL");
  }
  const double secs = seconds_since(t0);
  return {passing >= 8 && secs < 600.0, fmt("ordering holds on %d/10 seeds [%s], %.1f s", passing, per_seed.c_str(), secs)};
}

// ---- 9 ----
/// Digest of every stage's serialized output for one pass of a reduced
/// pipeline.
std::vector<std::pair<std::string, std::string>> pipeline_digests() {
  std::vector<std::pair<std::string, std::string>> d;
  auto add = [&](const std::string& stage, const std::string& bytes) { d.emplace_back(stage, sha256_hex(bytes)); };

  const auto st = random_stations(40, 12000.0, 12000.0, 1500.0, 91);
  add("proximity", [&] {
    std::ostringstream os;
    const auto g = build_proximity_graph(st, 3000.0);
    for (std::size_t i = 0; i < g.vertex_count(); ++i)
      for (auto j : g.adj[i]) os << i << '-' << j << ';';
    return os.str();
  }());
  add("communities", [&] {
    std::string s;
    for (auto c : detect_communities(build_proximity_graph(st, 3000.0), 92)) s += std::to_string(c) + ",";
    return s;
  }());
  HierarchyOptions h;
  h.seed = 93;
  auto topo = build_hierarchy(st, h);
  assign_resources(topo, default_tier_ranges(topo.tier_count()), 94);
  add("topology", topology_to_json(topo).dump());

  SynthConfig sc;
  sc.regions = 40;
  sc.days = 2;
  const auto series = synth_workload(sc, 95);
  add("series", series_to_csv(series));
  const auto snaps = demand_snapshots(series, ServiceSpec{});
  add("snapshots", snapshots_to_csv(snaps));
  add("kmeans", [&] {
    std::string s;
    for (auto l : classify_slots(series, 3, 96).labels) s += std::to_string(l);
    return s;
  }());

  const std::span<const double> v(series[0].values);
  add("arima", arima_to_json(fc::fit_arima(v, 1, 1, 1)).dump());
  fc::LstmConfig lc;
  lc.epochs = 5;
  add("lstm", lstm_to_json(fc::lstm_train(v, lc, 97)).dump());
  fc::RollingOptions ro;
  ro.seed = 98;
  const auto fser = fc::rolling_series_forecast(series, ro);
  add("rolling_forecast", series_to_csv(fser));

  const auto state = initial_node_state(topo, 0.01);
  const auto inst = build_instance(topo, snaps[100], state);
  add("instance", instance_to_json(inst).dump());
  auto sol_h = solve_heuristic(inst, 99);
  sol_h.diagnostics.wall_ms = 0.0;
  add("solution_heuristic", solution_to_json(sol_h).dump());

  const auto fsnaps = demand_snapshots(fser, ServiceSpec{});
  std::vector<SimReport> reps;
  for (auto s : {Strategy::DA, Strategy::QoEAP, Strategy::SMART_FL, Strategy::TIPTOP}) {
    SimConfig cfg;
    cfg.strategy = s;
    cfg.seed = 100;
    cfg.slots = 48;
    reps.push_back(run_simulation(topo, snaps, &fsnaps, cfg));
    std::string ev;
    for (const auto& e : reps.back().events) ev += e + "\n";
    add("events_" + to_string(s), ev);
    add("report_" + to_string(s), report_to_json(reps.back()).dump());
  }
  add("trace", trace_csv(reps));
  add("comparison", comparison_csv(reps));
  SimConfig cfg;
  cfg.seed = 101;
  add("snapshot_report", snapshot_report_to_json(snapshot_report(topo, series, {10, 150}, cfg)).dump());

  // parallel kernels against their serial references
  std::vector<Point> pts;
  for (const auto& s : st) pts.push_back(s.position);
  add("kernel_proximity_equal",
      kernels::proximity_graph(pts, 3000.0).adj == kernels::proximity_graph_serial(pts, 3000.0).adj ? "1" : "0");
  return d;
}

Verdict determinism() {
  const auto t0 = Clock::now();
  const auto a = pipeline_digests();
  const auto b = pipeline_digests();
  std::size_t same = 0;
  std::string differing;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) {
      ++same;
    } else {
      differing += " " + a[i].first;
    }
  }
  bool kernels_ok = true;
  for (const auto& [stage, digest] : a)
    if (stage == "kernel_proximity_equal") kernels_ok = digest == sha256_hex("1");
  return {same == a.size() && kernels_ok,
          fmt("%zu/%zu stage digests identical%s%s, %.1f s", same, a.size(), differing.c_str(),
              kernels_ok ? "" : "; parallel kernel differs from serial", seconds_since(t0))};
}

// ---- 10 ----
Verdict kmeans_validity() {
  std::size_t ok = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    SynthConfig sc;
    sc.regions = 10;
    sc.days = 3;
    const auto series = synth_workload(sc, split_seed(0xCA, s));
    std::vector<double> means(series[0].values.size(), 0.0);
    for (const auto& r : series)
      for (std::size_t t = 0; t < means.size(); ++t) means[t] += r.values[t] / static_cast<double>(series.size());
    const auto km = kmeans_1d(means, 3, split_seed(0xCA, 100 + s));
    Rng rng(split_seed(0xCA, 200 + s));
    std::vector<std::size_t> random_labels(means.size());
    for (std::size_t i = 0; i < means.size(); ++i) random_labels[i] = i < 3 ? i : rng() % 3;
    const bool three = km.centroids.size() == 3 && std::set<std::size_t>(km.labels.begin(), km.labels.end()).size() == 3;
    const bool increasing = three && km.centroids[0] < km.centroids[1] && km.centroids[1] < km.centroids[2];
    const double w = oracle::wcss(means, km.labels, 3);
    ok += three && increasing && w <= oracle::wcss(means, random_labels, 3) && close_rel(w, km.wcss, 1e-9);
  }
  return {ok == 20, fmt("%zu/20 seeds valid", ok)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;  // criterion ids given on the command line; all by default
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const std::vector<std::pair<int, std::function<Verdict()>>> criteria = {
      {1, exact_vs_brute_force}, {2, heuristic_quality}, {3, hierarchy_invariants}, {4, arima_recovery},
      {5, lstm_gradients},       {6, forecast_ordering}, {7, reservation_algebra},  {8, strategy_ordering},
      {9, determinism},          {10, kmeans_validity}};
  int failed = 0;
  for (const auto& [id, check] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("criterion %d: %s - %s\n", id, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
