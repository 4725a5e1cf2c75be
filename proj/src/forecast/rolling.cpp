#include "fogplace/forecast/rolling.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "fogplace/error.hpp"
#include "fogplace/forecast/arima.hpp"
#include "fogplace/rng.hpp"

namespace fogplace::forecast {

Method parse_method(const std::string& name) {
  if (name == "perfect") return Method::perfect;
  if (name == "naive") return Method::naive;
  if (name == "arima") return Method::arima;
  if (name == "lstm") return Method::lstm;
  throw ConfigError("unknown forecast method '" + name + "' (expected perfect, naive, arima or lstm)");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::perfect: return "perfect";
    case Method::naive: return "naive";
    case Method::arima: return "arima";
    case Method::lstm: return "lstm";
  }
  return "unknown";
}

std::vector<double> naive_forecast(double last, std::span<const double> future) {
  std::vector<double> out;
  out.reserve(future.size());
  for (double y : future) {
    out.push_back(last);
    last = y;
  }
  return out;
}

std::vector<TrafficSeries> rolling_series_forecast(std::span<const TrafficSeries> series, const RollingOptions& opts) {
  if (!(opts.train_fraction > 0.0 && opts.train_fraction < 1.0))
    throw ConfigError("train fraction must lie in (0, 1)");
  std::vector<TrafficSeries> out(series.begin(), series.end());
  if (opts.method == Method::perfect) return out;

  auto train_length = [&](std::size_t n) {
    return std::min(n, static_cast<std::size_t>(std::llround(opts.train_fraction * static_cast<double>(n))));
  };

  std::optional<ArimaModel> shared_arima;
  std::optional<LstmModel> shared_lstm;
  if (opts.global && opts.method != Method::naive && !series.empty()) {
    require_aligned(series);
    const std::size_t n = series.front().values.size(), n_train = train_length(n);
    if (n_train >= 2 && n_train < n) {
      std::vector<double> pooled(n_train, 0.0);
      for (const auto& s : series)
        for (std::size_t t = 0; t < n_train; ++t) pooled[t] += s.values[t] / static_cast<double>(series.size());
      const auto seed = split_seed(opts.seed, series.size());
      if (opts.method == Method::arima) {
        ArimaFitOptions fo;
        fo.seed = seed;
        shared_arima = fit_arima(pooled, opts.p, opts.d, opts.q, fo);
      } else {
        shared_lstm = lstm_train(pooled, opts.lstm, seed);
      }
    }
  }

  for (std::size_t r = 0; r < out.size(); ++r) {
    const auto& v = series[r].values;
    const std::size_t n = v.size();
    const auto n_train = train_length(n);
    std::vector<double> pred;
    if (opts.method == Method::naive || n_train < 2 || n_train == n) {
      pred = naive_forecast(n ? v.front() : 0.0, v);
    } else {
      const std::span<const double> train(v.data(), n_train), rest(v.data() + n_train, n - n_train);
      pred = naive_forecast(v.front(), train);
      std::vector<double> tail;
      if (shared_arima) {
        tail = rolling_forecast(arima_condition(*shared_arima, train), rest);
      } else if (shared_lstm) {
        auto model = *shared_lstm;
        const auto [lo, hi] = std::minmax_element(train.begin(), train.end());
        model.norm_min = *lo;
        model.norm_max = *hi;
        tail = lstm_rolling_forecast(model, train, rest);
      } else if (opts.method == Method::arima) {
        ArimaFitOptions fo;
        fo.seed = split_seed(opts.seed, r);
        tail = rolling_forecast(fit_arima(train, opts.p, opts.d, opts.q, fo), rest);
      } else {
        const auto model = lstm_train(train, opts.lstm, split_seed(opts.seed, r));
        tail = lstm_rolling_forecast(model, train, rest);
      }
      pred.insert(pred.end(), tail.begin(), tail.end());
    }
    for (auto& x : pred) x = std::max(0.0, x);
    out[r].values = std::move(pred);
  }
  return out;
}

}  // namespace fogplace::forecast
