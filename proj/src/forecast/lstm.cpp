#include "fogplace/forecast/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fogplace/error.hpp"
#include "fogplace/rng.hpp"

namespace fogplace::forecast {

void LstmConfig::validate() const {
  if (window < 1) throw ConfigError("LSTM window must be >= 1");
  if (hidden < 1) throw ConfigError("LSTM hidden size must be >= 1");
  if (layers < 1) throw ConfigError("LSTM needs at least one layer");
  if (epochs < 1) throw ConfigError("LSTM epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
}

std::size_t LstmModel::parameter_count(std::size_t hidden, std::size_t layers) {
  std::size_t n = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = l == 0 ? 1 : hidden;
    n += 4 * hidden * (in + hidden) + 4 * hidden;
  }
  return n + hidden + 1;
}

std::size_t LstmModel::layer_offset(std::size_t layer) const {
  std::size_t off = 0;
  for (std::size_t l = 0; l < layer; ++l) {
    const std::size_t in = l == 0 ? 1 : hidden;
    off += 4 * hidden * (in + hidden) + 4 * hidden;
  }
  return off;
}

std::size_t LstmModel::head_offset() const { return layer_offset(layers); }

double LstmModel::normalize(double v) const {
  const double range = norm_max - norm_min;
  return range > 0.0 ? (v - norm_min) / range : v - norm_min;
}

double LstmModel::denormalize(double v) const {
  const double range = norm_max - norm_min;
  return range > 0.0 ? norm_min + v * range : norm_min + v;
}

LstmModel lstm_init(std::size_t window, std::size_t hidden, std::size_t layers, std::uint64_t seed) {
  LstmConfig{window, hidden, layers}.validate();
  LstmModel m;
  m.window = window;
  m.hidden = hidden;
  m.layers = layers;
  m.params.resize(LstmModel::parameter_count(hidden, layers));
  Rng rng(seed);
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = l == 0 ? 1 : hidden;
    const double r = 1.0 / std::sqrt(static_cast<double>(hidden + in));
    const auto off = m.layer_offset(l);
    for (std::size_t k = 0; k < 4 * hidden * (in + hidden + 1); ++k) m.params[off + k] = uniform(rng, -r, r);
  }
  const double r = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (std::size_t k = m.head_offset(); k < m.params.size(); ++k) m.params[k] = uniform(rng, -r, r);
  return m;
}

namespace {

template <class T>
T sigmoid(T z) {
  return T(1) / (T(1) + std::exp(-z));
}

// Plain forward pass, generic over the scalar so the gradient check can
// evaluate the loss in extended precision.
template <class T>
T forward_generic(const LstmModel& m, const std::vector<T>& P, std::span<const double> xs) {
  const std::size_t H = m.hidden;
  std::vector<std::vector<T>> h(m.layers, std::vector<T>(H, T(0))), c = h;
  std::vector<T> input, z(4 * H);
  for (double x : xs) {
    input.assign(1, T(x));
    for (std::size_t l = 0; l < m.layers; ++l) {
      const std::size_t in = input.size(), cols = in + H;
      const T* W = P.data() + m.layer_offset(l);
      const T* b = W + 4 * H * cols;
      for (std::size_t r = 0; r < 4 * H; ++r) {
        T s = b[r];
        const T* row = W + r * cols;
        for (std::size_t k = 0; k < in; ++k) s += row[k] * input[k];
        for (std::size_t k = 0; k < H; ++k) s += row[in + k] * h[l][k];
        z[r] = s;
      }
      for (std::size_t k = 0; k < H; ++k) {
        const T f = sigmoid(z[k]), i = sigmoid(z[H + k]), g = std::tanh(z[2 * H + k]), o = sigmoid(z[3 * H + k]);
        c[l][k] = f * c[l][k] + i * g;
        h[l][k] = o * std::tanh(c[l][k]);
      }
      input = h[l];
    }
  }
  const T* head = P.data() + m.head_offset();
  T y = head[H];
  for (std::size_t k = 0; k < H; ++k) y += head[k] * h.back()[k];
  return y;
}

void check_window(const LstmModel& m, std::size_t n) {
  if (n != m.window)
    throw InvalidInput("LSTM expects a window of " + std::to_string(m.window) + " values, got " + std::to_string(n));
}

}  // namespace

double lstm_forward_normalized(const LstmModel& m, std::span<const double> window_norm) {
  check_window(m, window_norm.size());
  return forward_generic<double>(m, m.params, window_norm);
}

double lstm_forward(const LstmModel& m, std::span<const double> window_values) {
  check_window(m, window_values.size());
  std::vector<double> xs(window_values.size());
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = m.normalize(window_values[i]);
  return m.denormalize(forward_generic<double>(m, m.params, xs));
}

double lstm_loss_and_grad(const LstmModel& m, std::span<const double> xs, double target, LstmLoss loss,
                          std::vector<double>* grad, GradFault fault) {
  check_window(m, xs.size());
  const std::size_t H = m.hidden, L = xs.size(), NL = m.layers;
  const auto& P = m.params;

  // caches indexed [layer][step]
  struct Step {
    std::vector<double> input;  // layer input at this step
    std::vector<double> gates;  // f, i, g, o activations
    std::vector<double> c, tc, h;
  };
  std::vector<std::vector<Step>> cache(NL, std::vector<Step>(L));
  std::vector<double> z(4 * H);
  const std::vector<double> zero(H, 0.0);
  for (std::size_t t = 0; t < L; ++t) {
    for (std::size_t l = 0; l < NL; ++l) {
      Step& s = cache[l][t];
      s.input = l == 0 ? std::vector<double>{xs[t]} : cache[l - 1][t].h;
      const std::size_t in = s.input.size(), cols = in + H;
      const double* W = P.data() + m.layer_offset(l);
      const double* b = W + 4 * H * cols;
      const auto& hp = t > 0 ? cache[l][t - 1].h : zero;
      const auto& cp = t > 0 ? cache[l][t - 1].c : zero;
      for (std::size_t r = 0; r < 4 * H; ++r) {
        double acc = b[r];
        const double* row = W + r * cols;
        for (std::size_t k = 0; k < in; ++k) acc += row[k] * s.input[k];
        for (std::size_t k = 0; k < H; ++k) acc += row[in + k] * hp[k];
        z[r] = acc;
      }
      s.gates.resize(4 * H);
      s.c.resize(H);
      s.tc.resize(H);
      s.h.resize(H);
      for (std::size_t k = 0; k < H; ++k) {
        s.gates[k] = sigmoid(z[k]);
        s.gates[H + k] = sigmoid(z[H + k]);
        s.gates[2 * H + k] = std::tanh(z[2 * H + k]);
        s.gates[3 * H + k] = sigmoid(z[3 * H + k]);
        s.c[k] = s.gates[k] * cp[k] + s.gates[H + k] * s.gates[2 * H + k];
        s.tc[k] = std::tanh(s.c[k]);
        s.h[k] = s.gates[3 * H + k] * s.tc[k];
      }
    }
  }
  const std::size_t ho = m.head_offset();
  double y = P[ho + H];
  const auto& htop = cache[NL - 1][L - 1].h;
  for (std::size_t k = 0; k < H; ++k) y += P[ho + k] * htop[k];

  const double err = y - target;
  const double value = loss == LstmLoss::mse ? err * err : std::abs(err);
  if (!grad) return value;

  auto& G = *grad;
  const double dy = loss == LstmLoss::mse ? 2.0 * err : (err > 0.0 ? 1.0 : (err < 0.0 ? -1.0 : 0.0));
  for (std::size_t k = 0; k < H; ++k) G[ho + k] += dy * htop[k];
  G[ho + H] += dy;

  // gradient w.r.t. each layer's outputs h_t, fed from the layer above
  std::vector<std::vector<double>> dh_out(L, std::vector<double>(H, 0.0));
  for (std::size_t k = 0; k < H; ++k) dh_out[L - 1][k] = dy * P[ho + k];

  std::vector<double> dz(4 * H);
  for (std::size_t l = NL; l-- > 0;) {
    const std::size_t in = cache[l][0].input.size(), cols = in + H;
    const std::size_t off = m.layer_offset(l);
    const double* W = P.data() + off;
    std::vector<std::vector<double>> dh_in(L, std::vector<double>(in, 0.0));
    std::vector<double> dh_next(H, 0.0), dc_next(H, 0.0);
    for (std::size_t t = L; t-- > 0;) {
      const Step& s = cache[l][t];
      for (std::size_t k = 0; k < H; ++k) {
        const double f = s.gates[k], i = s.gates[H + k], g = s.gates[2 * H + k], o = s.gates[3 * H + k];
        const double cprev = t > 0 ? cache[l][t - 1].c[k] : 0.0;
        const double dh = dh_out[t][k] + dh_next[k];
        const double dc = dc_next[k] + dh * o * (1.0 - s.tc[k] * s.tc[k]);
        dz[k] = dc * cprev * f * (1.0 - f);
        dz[H + k] = dc * g * i * (1.0 - i);
        dz[2 * H + k] = dc * i * (1.0 - g * g);
        dz[3 * H + k] = dh * s.tc[k] * o * (1.0 - o);
        dc_next[k] = dc * f;
        if (fault == GradFault::negate_forget_gate) dz[k] = -dz[k];
      }
      std::fill(dh_next.begin(), dh_next.end(), 0.0);
      const auto& hp = t > 0 ? cache[l][t - 1].h : zero;
      for (std::size_t r = 0; r < 4 * H; ++r) {
        const double d = dz[r];
        if (d == 0.0) continue;
        double* gw = G.data() + off + r * cols;
        const double* row = W + r * cols;
        for (std::size_t k = 0; k < in; ++k) {
          gw[k] += d * s.input[k];
          dh_in[t][k] += d * row[k];
        }
        for (std::size_t k = 0; k < H; ++k) {
          gw[in + k] += d * hp[k];
          dh_next[k] += d * row[in + k];
        }
        G[off + 4 * H * cols + r] += d;
      }
    }
    if (l > 0) dh_out = std::move(dh_in);
  }
  return value;
}

LstmModel lstm_train(std::span<const double> series, const LstmConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (series.size() <= cfg.window + 1)
    throw InvalidInput("LSTM training needs more than window + 1 = " + std::to_string(cfg.window + 1) + " points");
  for (double v : series)
    if (!std::isfinite(v)) throw InvalidInput("series contains a non-finite value");

  LstmModel m = lstm_init(cfg.window, cfg.hidden, cfg.layers, split_seed(seed, 1));
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  m.norm_min = *lo;
  m.norm_max = *hi;
  std::vector<double> norm(series.size());
  for (std::size_t i = 0; i < norm.size(); ++i) norm[i] = m.normalize(series[i]);

  const std::size_t samples = series.size() - cfg.window;
  std::vector<std::size_t> order(samples);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(split_seed(seed, 2));

  const std::size_t np = m.params.size();
  std::vector<double> grad(np), mom(np, 0.0), vel(np, 0.0);
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_sum = 0.0;
    for (std::size_t start = 0; start < samples; start += cfg.batch_size) {
      const std::size_t end = std::min(samples, start + cfg.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t s = start; s < end; ++s) {
        const auto i = order[s];
        epoch_sum += lstm_loss_and_grad(m, std::span<const double>(norm).subspan(i, cfg.window),
                                        norm[i + cfg.window], cfg.loss, &grad);
      }
      const double scale = 1.0 / static_cast<double>(end - start);
      ++step;
      const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
      for (std::size_t k = 0; k < np; ++k) {
        const double g = grad[k] * scale;
        mom[k] = b1 * mom[k] + (1.0 - b1) * g;
        vel[k] = b2 * vel[k] + (1.0 - b2) * g * g;
        m.params[k] -= cfg.learning_rate * (mom[k] / c1) / (std::sqrt(vel[k] / c2) + eps);
      }
    }
    const double epoch_loss = epoch_sum / static_cast<double>(samples);
    if (!std::isfinite(epoch_loss)) throw TrainingError("LSTM training diverged", epoch + 1);
    m.epoch_loss.push_back(epoch_loss);
  }
  return m;
}

double lstm_gradient_check(const LstmModel& m, std::span<const double> xs, double target, GradFault fault) {
  check_window(m, xs.size());
  std::vector<double> analytic(m.params.size(), 0.0);
  lstm_loss_and_grad(m, xs, target, LstmLoss::mse, &analytic, fault);

  constexpr double h = 1e-5;
  std::vector<long double> P(m.params.begin(), m.params.end());
  auto loss_at = [&]() {
    const long double e = forward_generic<long double>(m, P, xs) - static_cast<long double>(target);
    return e * e;
  };
  double worst = 0.0;
  for (std::size_t k = 0; k < P.size(); ++k) {
    const long double saved = P[k];
    P[k] = saved + h;
    const long double up = loss_at();
    P[k] = saved - h;
    const long double down = loss_at();
    P[k] = saved;
    const double numeric = static_cast<double>((up - down) / (2.0L * h));
    const double denom = std::max({std::abs(analytic[k]), std::abs(numeric), 1e-12});
    worst = std::max(worst, std::abs(analytic[k] - numeric) / denom);
  }
  return worst;
}

std::vector<double> lstm_rolling_forecast(const LstmModel& m, std::span<const double> history,
                                          std::span<const double> future) {
  if (history.size() < m.window) throw InvalidInput("history shorter than the LSTM window");
  std::vector<double> all(history.end() - static_cast<std::ptrdiff_t>(m.window), history.end());
  all.insert(all.end(), future.begin(), future.end());
  std::vector<double> out;
  out.reserve(future.size());
  for (std::size_t i = 0; i < future.size(); ++i)
    out.push_back(lstm_forward(m, std::span<const double>(all).subspan(i, m.window)));
  return out;
}

LstmLoss parse_loss(const std::string& name) {
  if (name == "mae") return LstmLoss::mae;
  if (name == "mse") return LstmLoss::mse;
  throw ConfigError("unknown loss '" + name + "' (expected mae or mse)");
}

}  // namespace fogplace::forecast
