#include <doctest.h>

#include <cmath>
#include <numeric>

#include "fogplace/error.hpp"
#include "fogplace/kmeans.hpp"
#include "fogplace/kv_config.hpp"
#include "fogplace/rng.hpp"
#include "fogplace/workload.hpp"
#include "oracles.hpp"

using namespace fogplace;

TEST_SUITE("workload") {
  TEST_CASE("timestamps parse and format in UTC") {
    CHECK(parse_timestamp_ms("1383264000000") == 1383264000000);
    CHECK(parse_timestamp_ms("2013-11-01 00:00") == 1383264000000);
    CHECK(parse_timestamp_ms("2013-11-01T00:10:00Z") == 1383264600000);
    CHECK(parse_timestamp_ms("2013-11-01 00:00:01.250") == 1383264001250);
    CHECK(format_timestamp(1383264600000) == "2013-11-01 00:10:00");
    CHECK_THROWS_AS(parse_timestamp_ms("01/11/2013"), FormatError);
  }

  TEST_CASE("CDR rows: header lookup, skipped and merged rows") {
    const std::string text =
        "timestamp,grid_id,traffic\n"
        "1383264000000,5,1.5\n"
        "1383264000000,5,2.5\n"
        "1383264000000,,3\n"
        "2013-11-01 00:10,6,4\n";
    const auto r = parse_cdr(text, ColumnMap{});
    REQUIRE(r.records.size() == 2);
    CHECK(r.records[0].grid_id == 5);
    CHECK(r.records[0].traffic == 4.0);
    CHECK(r.merged_rows == 1);
    CHECK(r.skipped_rows == 1);
    CHECK_THROWS_AS(parse_cdr("a,b,c\n1,2,3\n", ColumnMap{}), FormatError);
    CHECK_THROWS_AS(parse_cdr("grid_id,timestamp,traffic\n1,0,-2\n", ColumnMap{}), InvalidInput);
  }

  TEST_CASE("headerless tab-separated rows by column index") {
    ColumnMap cols;
    cols.delimiter = '\t';
    cols.has_header = false;
    cols.grid_index = 0;
    cols.timestamp_index = 1;
    cols.traffic_index = 7;
    const auto r = parse_cdr("1\t1383264000000\t39\t0.1\t\t\t\t11.5\n", cols);
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].traffic == 11.5);
  }

  TEST_CASE("grid cells map to the nearest covering station") {
    GridGeometry grid;
    grid.rows = 12;
    grid.cols = 15;
    grid.cell_m = 300.0;
    const auto st = random_stations(9, 4500, 3600, 700, 3);
    const auto map = map_grids_to_stations(grid, st);
    REQUIRE(map.size() == grid.cell_count());
    for (std::size_t i = 0; i < grid.cell_count(); ++i) {
      const auto c = grid.center(i);
      // oracle: covering stations first, nearest among them, lower index on ties
      std::size_t best = st.size();
      bool best_covers = false;
      double best_d = 0.0;
      for (std::size_t s = 0; s < st.size(); ++s) {
        const double d = distance(c, st[s].position);
        const bool covers = d <= st[s].coverage_radius_m;
        if (best == st.size() || (covers && !best_covers) || (covers == best_covers && d < best_d)) {
          best = s;
          best_d = d;
          best_covers = covers;
        }
      }
      CHECK(map.at(grid.id_of(i)) == st[best].id);
    }
  }

  TEST_CASE("aggregation conserves traffic") {
    Rng rng(5);
    GridGeometry grid;
    grid.rows = 10;
    grid.cols = 10;
    const auto st = random_stations(6, 2350, 2350, 600, 1);
    const auto map = map_grids_to_stations(grid, st);
    std::vector<CdrRecord> rec;
    double total = 0.0;
    for (int i = 0; i < 500; ++i) {
      CdrRecord r{grid.id_of(rng() % 100), 1383264000000 + static_cast<std::int64_t>(rng() % 144) * 600000,
                  uniform(rng, 0.0, 10.0)};
      total += r.traffic;
      rec.push_back(r);
    }
    const auto agg = aggregate_to_regions(rec, map, 600);
    double sum = 0.0;
    for (const auto& s : agg.series) sum = std::accumulate(s.values.begin(), s.values.end(), sum);
    CHECK(sum == doctest::Approx(total).epsilon(1e-12));
    CHECK(agg.series.size() == st.size());
    require_aligned(agg.series);
    rec.push_back({999999, 1383264000000, 1.0});
    CHECK_THROWS_AS(aggregate_to_regions(rec, map, 600), InvalidInput);
  }

  TEST_CASE("demand exists exactly where traffic exceeds the slot mean") {
    const auto series = synth_workload(SynthConfig{}, 4);
    const auto snaps = demand_snapshots(series, ServiceSpec{});
    REQUIRE(snaps.size() == series[0].values.size());
    for (std::size_t t = 0; t < snaps.size(); t += 37) {
      double mean = 0.0;
      for (const auto& s : series) mean += s.values[t];
      mean /= static_cast<double>(series.size());
      std::size_t expect = 0;
      for (const auto& s : series) expect += s.values[t] > mean;
      CHECK(snaps[t].demands.size() == expect);
      for (const auto& d : snaps[t].demands) CHECK(d.volume > mean);
    }
    TrafficSeries flat{1, 0, 600, {5, 5}};
    TrafficSeries flat2{2, 0, 600, {5, 5}};
    CHECK(demand_snapshots(std::vector{flat, flat2}, ServiceSpec{})[0].demands.empty());
  }

  TEST_CASE("noise-free synthetic traffic is periodic") {
    SynthConfig cfg;
    cfg.noise_sd = 0.0;
    cfg.days = 14;
    const auto series = synth_workload(cfg, 9);
    const std::size_t day = 144, week = 7 * day;
    for (const auto& s : series)
      for (std::size_t t = 0; t + week < s.values.size(); ++t) REQUIRE(s.values[t] == doctest::Approx(s.values[t + week]));
    // non-urban regions repeat daily
    const auto& rural = series.back();
    for (std::size_t t = 0; t + day < rural.values.size(); ++t)
      REQUIRE(rural.values[t] == doctest::Approx(rural.values[t + day]));
    CHECK(synth_workload(cfg, 9)[3].values == series[3].values);
  }

  TEST_CASE("synth config from key-value text and validation") {
    const auto kv = KeyValueConfig::parse("# comment\nregions = 4\ndays=2\ninterval_s = 3600\n");
    const auto cfg = SynthConfig::from(kv);
    CHECK(cfg.regions == 4);
    CHECK(cfg.interval_s == 3600);
    CHECK(synth_workload(cfg, 1)[0].values.size() == 48);
    CHECK_THROWS_AS(SynthConfig::from(KeyValueConfig::parse("interval_s = 7\n")), ConfigError);
  }

  TEST_CASE("series CSV round trip") {
    SynthConfig cfg;
    cfg.regions = 3;
    cfg.days = 1;
    const auto series = synth_workload(cfg, 2);
    const auto back = parse_series_csv(series_to_csv(series));
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(back[i].region_id == series[i].region_id);
      CHECK(back[i].start_ms == series[i].start_ms);
      CHECK(back[i].interval_s == 600);
      CHECK(back[i].values == series[i].values);
    }
    CHECK_THROWS_AS(parse_series_csv("region_id,slot,timestamp_ms,value\n0,1,0,1\n"), FormatError);
  }

  TEST_CASE("k-means: increasing centroids, oracle WCSS, degenerate input") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      Rng rng(s);
      std::vector<double> v;
      for (int i = 0; i < 90; ++i) v.push_back(uniform(rng, 0.0, 1.0) + 5.0 * static_cast<double>(i % 3));
      const auto km = kmeans_1d(v, 3, s);
      CHECK(km.centroids[0] < km.centroids[1]);
      CHECK(km.centroids[1] < km.centroids[2]);
      CHECK(km.wcss == doctest::Approx(oracle::wcss(v, km.labels, 3)));
      for (std::size_t i = 0; i < v.size(); ++i) CHECK(km.labels[i] == static_cast<std::size_t>(i % 3));
      CHECK(kmeans_1d(v, 3, s).labels == km.labels);
    }
    const std::vector<double> two{1, 1, 2, 2};
    CHECK_THROWS_AS(kmeans_1d(two, 3, 0), DegenerateInput);
    CHECK(intensity_name(0, 3) == "low");
    CHECK(intensity_name(2, 3) == "high");
  }

  TEST_CASE("slot classification labels every slot") {
    const auto series = synth_workload(SynthConfig{}, 1);
    const auto km = classify_slots(series, 3, 2);
    CHECK(km.labels.size() == series[0].values.size());
    const auto im = classify_intensity(series, 3, 2);
    CHECK(im.labels.size() == series.size());
    CHECK(im.centroids.size() == 3);
  }
}
