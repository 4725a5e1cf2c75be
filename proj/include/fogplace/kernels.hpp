#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP version and a serial
// reference with identical results; tests compare the two and
// bench/bench_kernels.cpp times them.

#include <cstdint>
#include <span>
#include <vector>

#include "fogplace/community.hpp"
#include "fogplace/topology.hpp"

namespace fogplace::kernels {

UndirectedGraph proximity_graph(std::span<const Point> points, double radius_m);
UndirectedGraph proximity_graph_serial(std::span<const Point> points, double radius_m);

/// For each cell center, the index of the station whose coverage circle
/// contains it (nearest such station), or the nearest station when none
/// covers it. Ties go to the lower station index.
std::vector<std::size_t> nearest_covering(std::span<const Point> cells,
                                          std::span<const BaseStation> stations);
std::vector<std::size_t> nearest_covering_serial(std::span<const Point> cells,
                                                 std::span<const BaseStation> stations);

/// Row-major facilities x regions latency matrix.
std::vector<double> latency_matrix(const Topology& topo, std::span<const NodeId> facilities,
                                   std::span<const double> load_fraction,
                                   std::span<const NodeId> regions);
std::vector<double> latency_matrix_serial(const Topology& topo, std::span<const NodeId> facilities,
                                          std::span<const double> load_fraction,
                                          std::span<const NodeId> regions);

/// A batch of packets sharing one path. Packet i of the flow succeeds iff
/// hash_uniform(seed, key_a, key_b, first_index + i) < success_prob, so
/// outcomes are coupled across runs that differ only in reliabilities.
struct PacketFlow {
  std::uint64_t key_a = 0;
  std::uint64_t key_b = 0;
  std::uint64_t first_index = 0;
  std::uint64_t packets = 0;
  double success_prob = 1.0;
};

std::uint64_t delivered_packets(std::span<const PacketFlow> flows, std::uint64_t seed);
std::uint64_t delivered_packets_serial(std::span<const PacketFlow> flows, std::uint64_t seed);

}  // namespace fogplace::kernels
