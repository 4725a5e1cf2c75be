#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fogplace::forecast {

enum class LstmLoss { mae, mse };

struct LstmConfig {
  std::size_t window = 24;
  std::size_t hidden = 16;
  std::size_t layers = 1;
  std::size_t epochs = 300;
  double learning_rate = 0.01;
  std::size_t batch_size = 32;
  LstmLoss loss = LstmLoss::mae;

  void validate() const;
};

/// Stacked LSTM regressor with a linear head. All weights live in one flat
/// vector; per layer l the block is W_l (4H x (in_l + H), row-major, gate
/// rows ordered forget, input, candidate, output) followed by b_l (4H), and
/// the head w_out (H), b_out (1) comes last.
struct LstmModel {
  std::size_t window = 24;
  std::size_t hidden = 16;
  std::size_t layers = 1;
  std::vector<double> params;
  double norm_min = 0.0;
  double norm_max = 1.0;
  std::vector<double> epoch_loss;

  static std::size_t parameter_count(std::size_t hidden, std::size_t layers);
  std::size_t layer_offset(std::size_t layer) const;
  std::size_t head_offset() const;

  double normalize(double v) const;
  double denormalize(double v) const;
};

/// Uniform init in +-1/sqrt(H + in).
LstmModel lstm_init(std::size_t window, std::size_t hidden, std::size_t layers, std::uint64_t seed);

/// Prediction on raw values (normalized internally, result denormalized).
double lstm_forward(const LstmModel& model, std::span<const double> window_values);
/// Same on already normalized input; result in normalized units.
double lstm_forward_normalized(const LstmModel& model, std::span<const double> window_norm);

/// Test hook: corrupts one part of the backward pass.
enum class GradFault { none, negate_forget_gate };

/// Loss of one sample in normalized space and, when `grad` is given, its
/// gradient added into `grad` (sized like model.params).
double lstm_loss_and_grad(const LstmModel& model, std::span<const double> window_norm, double target_norm,
                          LstmLoss loss, std::vector<double>* grad, GradFault fault = GradFault::none);

LstmModel lstm_train(std::span<const double> series, const LstmConfig& cfg, std::uint64_t seed);

/// Max relative error between the analytic MSE gradient and central
/// differences (step 1e-5) over every parameter. Denominator is
/// max(|analytic|, |numeric|, 1e-12).
double lstm_gradient_check(const LstmModel& model, std::span<const double> window_norm, double target_norm,
                           GradFault fault = GradFault::none);

/// One-step forecasts for each value of `future`, each fed the `window`
/// actual values preceding it (`history` supplies the first ones).
std::vector<double> lstm_rolling_forecast(const LstmModel& model, std::span<const double> history,
                                          std::span<const double> future);

LstmLoss parse_loss(const std::string& name);

}  // namespace fogplace::forecast
