#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fogplace/workload.hpp"

namespace fogplace {

struct KMeansResult {
  std::vector<std::size_t> labels;  // 0 = lowest centroid
  std::vector<double> centroids;    // strictly increasing
  double wcss = 0.0;
  int iterations = 0;
};

/// One-dimensional k-means with k-means++ seeding and Lloyd refinement.
/// Throws DegenerateInput when there are fewer than k distinct values.
KMeansResult kmeans_1d(std::span<const double> values, std::size_t k, std::uint64_t seed);

double within_cluster_ss(std::span<const double> values, std::span<const std::size_t> labels, std::size_t k);

struct IntensityMap {
  std::vector<NodeId> regions;
  std::vector<std::vector<std::size_t>> labels;  // [region][slot]
  std::vector<double> centroids;
};

/// Clusters every (region, slot) traffic value.
IntensityMap classify_intensity(std::span<const TrafficSeries> series, std::size_t k, std::uint64_t seed);

/// Clusters the per-slot mean across regions; one label per slot.
KMeansResult classify_slots(std::span<const TrafficSeries> series, std::size_t k, std::uint64_t seed);

/// "low", "medium", "high" for k = 3; "c<i>" otherwise.
std::string intensity_name(std::size_t label, std::size_t k);

}  // namespace fogplace
