#include "fogplace/forecast/difference.hpp"

#include <string>

#include "fogplace/error.hpp"

namespace fogplace::forecast {

namespace {

void check(std::size_t n, int d) {
  if (d < 0) throw InvalidInput("difference order must be >= 0");
  if (n <= static_cast<std::size_t>(d))
    throw InvalidInput("series of length " + std::to_string(n) + " is too short for d = " + std::to_string(d));
}

}  // namespace

std::vector<double> difference(std::span<const double> series, int d) {
  check(series.size(), d);
  std::vector<double> w(series.begin(), series.end());
  for (int k = 0; k < d; ++k) {
    for (std::size_t i = 0; i + 1 < w.size(); ++i) w[i] = w[i + 1] - w[i];
    w.pop_back();
  }
  return w;
}

std::vector<double> difference_anchors(std::span<const double> series, int d) {
  check(series.size(), d);
  std::vector<double> anchors;
  std::vector<double> w(series.begin(), series.end());
  for (int k = 0; k < d; ++k) {
    anchors.push_back(w.front());
    for (std::size_t i = 0; i + 1 < w.size(); ++i) w[i] = w[i + 1] - w[i];
    w.pop_back();
  }
  return anchors;
}

std::vector<double> undifference(std::span<const double> diffed, int d, std::span<const double> anchors) {
  if (d < 0) throw InvalidInput("difference order must be >= 0");
  if (anchors.size() != static_cast<std::size_t>(d)) throw InvalidInput("need one anchor per differencing level");
  std::vector<double> w(diffed.begin(), diffed.end());
  for (int k = d - 1; k >= 0; --k) {
    std::vector<double> up;
    up.reserve(w.size() + 1);
    up.push_back(anchors[static_cast<std::size_t>(k)]);
    for (double v : w) up.push_back(up.back() + v);
    w = std::move(up);
  }
  return w;
}

}  // namespace fogplace::forecast
