#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fogplace/error.hpp"
#include "fogplace/forecast/metrics.hpp"

namespace fogplace::forecast {

/// ARIMA(p, d, q) on the d-times differenced series w:
///   w_t = alpha + sum_i phi_i w_{t-i} - sum_j theta_j e_{t-j} + e_t
struct ArimaModel {
  int p = 0, d = 0, q = 0;
  double alpha = 0.0;
  std::vector<double> phi;
  std::vector<double> theta;
  double residual_variance = 0.0;  // css / (n_w - p)
  double css = 0.0;
  bool stationary = true;   // AR polynomial roots outside the unit circle
  bool invertible = true;   // same for the MA polynomial
  int iterations = 0;

  // forecasting state
  std::vector<double> last_levels;  // last value of differencing levels 0..d-1
  std::vector<double> tail_w;       // last p differenced values, oldest first
  std::vector<double> tail_eps;     // last q residuals, oldest first
  std::size_t n_obs = 0;

  std::size_t parameter_count() const { return 1 + phi.size() + theta.size(); }
};

struct ArimaFitOptions {
  int max_evaluations = 20000;
  int restarts = 3;
  double tolerance = 1e-10;
  std::uint64_t seed = 0;
};

/// Raised when the simplex search hits its evaluation cap; carries the best
/// parameters seen so far.
class ArimaFitError : public Error {
 public:
  ArimaFitError(const std::string& what, ArimaModel best) : Error(what), best_(std::move(best)) {}
  const ArimaModel& best() const noexcept { return best_; }

 private:
  ArimaModel best_;
};

/// True iff 1 - c_1 z - ... - c_k z^k has every root outside the unit circle.
bool roots_outside_unit_circle(std::span<const double> c);

/// Conditional-sum-of-squares residuals of the differenced series; the first
/// p residuals are defined as zero and excluded from the sum.
std::vector<double> arima_residuals(std::span<const double> differenced, double alpha, std::span<const double> phi,
                                    std::span<const double> theta);

ArimaModel fit_arima(std::span<const double> series, int p, int d, int q, const ArimaFitOptions& opts = {});

/// Recursive multi-step forecast: future shocks are zero and forecasts feed
/// back as lags, then the result is integrated back to the original scale.
/// Keeps the coefficients of `shared`, re-estimates the intercept from the
/// mean of the differenced `series` and rebuilds the forecasting state on it.
ArimaModel arima_condition(const ArimaModel& shared, std::span<const double> series);

std::vector<double> predict_arima(const ArimaModel& model, std::size_t horizon);

/// Appends an observed value to the model state.
void arima_update(ArimaModel& model, double observation);

/// One-step-ahead forecasts over `future`, updating the state with each
/// actual value after predicting it.
std::vector<double> rolling_forecast(ArimaModel model, std::span<const double> future);

struct AutoArimaOptions {
  int max_p = 2;
  int max_q = 2;
  int max_d = 1;
  int max_pq = 2;  // p + q limit
  double holdout_fraction = 0.2;
  ArimaFitOptions fit;
};

struct ArimaCandidate {
  int p = 0, d = 0, q = 0;
  bool ok = false;
  ForecastMetrics holdout;
  std::string error;
};

struct AutoArimaResult {
  ArimaModel model;  // refit on the whole series
  std::vector<ArimaCandidate> candidates;
};

/// Grid search over (p, d, q) scored by one-step MAE on a trailing holdout;
/// ties go to lower RMSE, then to fewer parameters.
AutoArimaResult auto_arima(std::span<const double> series, const AutoArimaOptions& opts = {});

}  // namespace fogplace::forecast
