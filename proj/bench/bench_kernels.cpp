// OpenMP kernels against their serial references.
#include <benchmark/benchmark.h>

#include "fogplace/kernels.hpp"
#include "fogplace/rng.hpp"

using namespace fogplace;

namespace {

std::vector<Point> points(std::size_t n) {
  std::vector<Point> p;
  for (const auto& b : random_stations(n, 30000, 30000, 1500, 1)) p.push_back(b.position);
  return p;
}

template <auto Kernel>
void BM_proximity(benchmark::State& state) {
  const auto p = points(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(p, 3000.0));
}

template <auto Kernel>
void BM_covering(benchmark::State& state) {
  const auto st = random_stations(200, 30000, 30000, 1500, 2);
  Rng rng(3);
  std::vector<Point> cells(static_cast<std::size_t>(state.range(0)));
  for (auto& c : cells) c = {uniform(rng, 0, 30000), uniform(rng, 0, 30000)};
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(cells, st));
}

template <auto Kernel>
void BM_latency(benchmark::State& state) {
  const auto topo = build_hierarchy(random_stations(static_cast<std::size_t>(state.range(0)), 30000, 30000, 1500, 4),
                                    HierarchyOptions{});
  std::vector<NodeId> fac;
  std::vector<double> load;
  for (const auto& n : topo.nodes()) {
    fac.push_back(n.id);
    load.push_back(0.3);
  }
  const auto regions = topo.base_stations();
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(topo, fac, load, regions));
}

template <auto Kernel>
void BM_packets(benchmark::State& state) {
  std::vector<kernels::PacketFlow> flows(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < flows.size(); ++i) flows[i] = {i, 7, 0, 1000, 0.995};
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(flows, 11));
}

}  // namespace

BENCHMARK(BM_proximity<kernels::proximity_graph>)->Arg(500)->Arg(2000);
BENCHMARK(BM_proximity<kernels::proximity_graph_serial>)->Arg(500)->Arg(2000);
BENCHMARK(BM_covering<kernels::nearest_covering>)->Arg(10000);
BENCHMARK(BM_covering<kernels::nearest_covering_serial>)->Arg(10000);
BENCHMARK(BM_latency<kernels::latency_matrix>)->Arg(200);
BENCHMARK(BM_latency<kernels::latency_matrix_serial>)->Arg(200);
BENCHMARK(BM_packets<kernels::delivered_packets>)->Arg(1000);
BENCHMARK(BM_packets<kernels::delivered_packets_serial>)->Arg(1000);

BENCHMARK_MAIN();
