#include "fogplace/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>

#include "fogplace/error.hpp"
#include "fogplace/rng.hpp"

namespace fogplace {

double within_cluster_ss(std::span<const double> values, std::span<const std::size_t> labels, std::size_t k) {
  std::vector<double> sum(k, 0.0), cnt(k, 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum[labels[i]] += values[i];
    cnt[labels[i]] += 1.0;
  }
  double ss = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double m = sum[labels[i]] / cnt[labels[i]];
    ss += (values[i] - m) * (values[i] - m);
  }
  return ss;
}

KMeansResult kmeans_1d(std::span<const double> values, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InvalidInput("k must be >= 2");
  std::set<double> distinct(values.begin(), values.end());
  if (distinct.size() < k)
    throw DegenerateInput("k-means needs " + std::to_string(k) + " distinct values, got " +
                          std::to_string(distinct.size()));
  const std::size_t n = values.size();
  Rng rng(seed);

  // k-means++ seeding
  std::vector<double> centers;
  centers.push_back(values[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)]);
  std::vector<double> d2(n);
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double c : centers) best = std::min(best, (values[i] - c) * (values[i] - c));
      d2[i] = best;
      total += best;
    }
    double u = uniform(rng, 0.0, total);
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] > 0.0 && u < d2[i]) {
        pick = i;
        break;
      }
      u -= d2[i];
    }
    if (d2[pick] == 0.0)  // rounding at the tail; take the farthest point
      pick = static_cast<std::size_t>(std::max_element(d2.begin(), d2.end()) - d2.begin());
    centers.push_back(values[pick]);
  }

  KMeansResult r;
  r.labels.assign(n, 0);
  for (int it = 0; it < 1000; ++it) {
    r.iterations = it + 1;
    bool changed = it == 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < k; ++c)
        if (std::abs(values[i] - centers[c]) < std::abs(values[i] - centers[best])) best = c;
      if (best != r.labels[i]) {
        r.labels[i] = best;
        changed = true;
      }
    }
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> cnt(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[r.labels[i]] += values[i];
      ++cnt[r.labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (cnt[c] > 0) {
        centers[c] = sum[c] / static_cast<double>(cnt[c]);
        continue;
      }
      // empty cluster: move it to the point farthest from its center
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = std::abs(values[i] - centers[r.labels[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      centers[c] = values[far];
      changed = true;
    }
    if (!changed) break;
  }

  std::vector<std::size_t> rank(k);
  std::iota(rank.begin(), rank.end(), 0);
  std::sort(rank.begin(), rank.end(), [&](auto a, auto b) { return centers[a] < centers[b]; });
  std::vector<std::size_t> relabel(k);
  for (std::size_t i = 0; i < k; ++i) relabel[rank[i]] = i;
  for (auto& l : r.labels) l = relabel[l];
  r.centroids.resize(k);
  for (std::size_t i = 0; i < k; ++i) r.centroids[i] = centers[rank[i]];
  r.wcss = within_cluster_ss(values, r.labels, k);
  return r;
}

IntensityMap classify_intensity(std::span<const TrafficSeries> series, std::size_t k, std::uint64_t seed) {
  std::vector<double> all;
  for (const auto& s : series) all.insert(all.end(), s.values.begin(), s.values.end());
  const auto km = kmeans_1d(all, k, seed);
  IntensityMap out;
  out.centroids = km.centroids;
  std::size_t at = 0;
  for (const auto& s : series) {
    out.regions.push_back(s.region_id);
    out.labels.emplace_back(km.labels.begin() + static_cast<std::ptrdiff_t>(at),
                            km.labels.begin() + static_cast<std::ptrdiff_t>(at + s.values.size()));
    at += s.values.size();
  }
  return out;
}

KMeansResult classify_slots(std::span<const TrafficSeries> series, std::size_t k, std::uint64_t seed) {
  if (series.empty()) throw InvalidInput("no series to classify");
  require_aligned(series);
  std::vector<double> mean(series[0].values.size(), 0.0);
  for (const auto& s : series)
    for (std::size_t t = 0; t < mean.size(); ++t) mean[t] += s.values[t];
  for (auto& m : mean) m /= static_cast<double>(series.size());
  return kmeans_1d(mean, k, seed);
}

std::string intensity_name(std::size_t label, std::size_t k) {
  if (k == 3) {
    static const char* names[] = {"low", "medium", "high"};
    return names[label];
  }
  return "c" + std::to_string(label);
}

}  // namespace fogplace
