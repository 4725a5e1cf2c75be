#pragma once

#include <span>

namespace fogplace::forecast {

struct ForecastMetrics {
  double mae = 0.0;
  double rmse = 0.0;
  std::size_t n = 0;
};

ForecastMetrics evaluate(std::span<const double> predictions, std::span<const double> actuals);

}  // namespace fogplace::forecast
