#pragma once

#include <span>
#include <vector>

namespace fogplace::forecast {

/// d-fold first differencing; the result has size() - d elements.
std::vector<double> difference(std::span<const double> series, int d);

/// First value of each differencing level 0..d-1, enough to invert
/// difference() exactly.
std::vector<double> difference_anchors(std::span<const double> series, int d);

std::vector<double> undifference(std::span<const double> diffed, int d, std::span<const double> anchors);

}  // namespace fogplace::forecast
