#include "fogplace/forecast/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "fogplace/error.hpp"

namespace fogplace::forecast {

ForecastMetrics evaluate(std::span<const double> predictions, std::span<const double> actuals) {
  if (predictions.size() != actuals.size()) throw InvalidInput("prediction and actual lengths differ");
  if (predictions.empty()) throw InvalidInput("nothing to evaluate");
  const double n = static_cast<double>(predictions.size());
  double abs_sum = 0.0, sq_sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double e = predictions[i] - actuals[i];
    abs_sum += std::abs(e);
    sq_sum += e * e;
  }
  const double mae = abs_sum / n;
  // rmse >= mae holds exactly; guard against the last-ulp rounding case
  const double rmse = std::max(std::sqrt(sq_sum / n), mae);
  return {mae, rmse, predictions.size()};
}

}  // namespace fogplace::forecast
