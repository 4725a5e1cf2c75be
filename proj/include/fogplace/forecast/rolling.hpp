#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fogplace/forecast/lstm.hpp"
#include "fogplace/workload.hpp"

namespace fogplace::forecast {

enum class Method { perfect, naive, arima, lstm };
Method parse_method(const std::string& name);
std::string to_string(Method m);

struct RollingOptions {
  Method method = Method::arima;
  double train_fraction = 0.25;  // leading share of each series used for fitting
  int p = 1, d = 1, q = 1;
  LstmConfig lstm;
  std::uint64_t seed = 0;
  // One model fitted on the cross-region mean of the training window and
  // shared by every region (each keeps its own level and scale).
  bool global = false;
};

/// Per-region one-step-ahead forecasts aligned with the input series. The
/// training prefix is forecast naively (previous value, first value for
/// slot 0); later slots come from the fitted model fed with actual history.
/// Negative predictions are clipped to 0.
std::vector<TrafficSeries> rolling_series_forecast(std::span<const TrafficSeries> series, const RollingOptions& opts);

/// Previous-value forecast of `future` given the value before it.
std::vector<double> naive_forecast(double last, std::span<const double> future);

}  // namespace fogplace::forecast
