#include "fogplace/forecast/arima.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "fogplace/forecast/difference.hpp"
#include "fogplace/rng.hpp"

namespace fogplace::forecast {

bool roots_outside_unit_circle(std::span<const double> c) {
  // Step-down (Schur-Cohn) recursion on the reflection coefficients.
  std::vector<double> a(c.begin(), c.end());
  for (std::size_t k = a.size(); k > 0; --k) {
    const double r = a[k - 1];
    if (!(std::abs(r) < 1.0)) return false;
    std::vector<double> next(k - 1);
    for (std::size_t i = 0; i + 1 < k; ++i) next[i] = (a[i] + r * a[k - 2 - i]) / (1.0 - r * r);
    a = std::move(next);
  }
  return true;
}

std::vector<double> arima_residuals(std::span<const double> w, double alpha, std::span<const double> phi,
                                    std::span<const double> theta) {
  const std::size_t p = phi.size(), q = theta.size();
  std::vector<double> e(w.size(), 0.0);
  for (std::size_t t = p; t < w.size(); ++t) {
    double pred = alpha;
    for (std::size_t i = 0; i < p; ++i) pred += phi[i] * w[t - 1 - i];
    for (std::size_t j = 0; j < q && j < t; ++j) pred -= theta[j] * e[t - 1 - j];
    e[t] = w[t] - pred;
  }
  return e;
}

namespace {

struct SimplexResult {
  std::vector<double> x;
  double fx = 0.0;
  int evaluations = 0;
  bool converged = false;
};

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                          const std::vector<double>& steps, int max_evals, double tol) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> pts(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += steps[i];
  std::vector<double> fv(n + 1);
  SimplexResult r;
  auto eval = [&](const std::vector<double>& x) {
    ++r.evaluations;
    return f(x);
  };
  for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(pts[i]);

  std::vector<std::size_t> idx(n + 1);
  while (true) {
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
    const auto best = idx.front(), worst = idx.back(), second = idx[n - 1];

    double spread = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        spread = std::max(spread, std::abs(pts[i][k] - pts[best][k]) / (1.0 + std::abs(pts[best][k])));
    if (fv[worst] - fv[best] <= tol * std::abs(fv[best]) || spread <= 1e-12) {
      r.converged = true;
      break;
    }
    if (r.evaluations >= max_evals) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k] / static_cast<double>(n);
    auto along = [&](double t) {
      std::vector<double> x(n);
      for (std::size_t k = 0; k < n; ++k) x[k] = centroid[k] + t * (pts[worst][k] - centroid[k]);
      return x;
    };
    auto xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < fv[best]) {
      auto xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = std::move(xe);
        fv[worst] = fe;
      } else {
        pts[worst] = std::move(xr);
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      pts[worst] = std::move(xr);
      fv[worst] = fr;
    } else {
      auto xc = fr < fv[worst] ? along(-0.5) : along(0.5);
      const double fc = eval(xc);
      if (fc < std::min(fr, fv[worst])) {
        pts[worst] = std::move(xc);
        fv[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t k = 0; k < n; ++k) pts[i][k] = pts[best][k] + 0.5 * (pts[i][k] - pts[best][k]);
          fv[i] = eval(pts[i]);
        }
      }
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  r.x = pts[best];
  r.fx = fv[best];
  return r;
}

void fill_state(ArimaModel& m, std::span<const double> series, const std::vector<double>& w) {
  m.last_levels.clear();
  std::vector<double> level(series.begin(), series.end());
  for (int k = 0; k < m.d; ++k) {
    m.last_levels.push_back(level.back());
    level = difference(level, 1);
  }
  const auto e = arima_residuals(w, m.alpha, m.phi, m.theta);
  m.tail_w.assign(w.end() - m.p, w.end());
  m.tail_eps.assign(e.end() - m.q, e.end());
  m.n_obs = series.size();
  double css = 0.0;
  for (std::size_t t = static_cast<std::size_t>(m.p); t < e.size(); ++t) css += e[t] * e[t];
  m.css = css;
  m.residual_variance = css / static_cast<double>(w.size() - static_cast<std::size_t>(m.p));
  m.stationary = roots_outside_unit_circle(m.phi);
  m.invertible = roots_outside_unit_circle(m.theta);
}

}  // namespace

ArimaModel fit_arima(std::span<const double> series, int p, int d, int q, const ArimaFitOptions& opts) {
  if (p < 0 || d < 0 || q < 0) throw InvalidInput("ARIMA orders must be >= 0");
  const std::size_t need = 10 * static_cast<std::size_t>(p + q + 1) + static_cast<std::size_t>(d);
  if (series.size() < need)
    throw InvalidInput("ARIMA(" + std::to_string(p) + "," + std::to_string(d) + "," + std::to_string(q) +
                       ") needs at least " + std::to_string(need) + " points, got " + std::to_string(series.size()));
  for (double v : series)
    if (!std::isfinite(v)) throw InvalidInput("series contains a non-finite value");

  const auto w = difference(series, d);
  ArimaModel m;
  m.p = p;
  m.d = d;
  m.q = q;
  long double sum = 0.0L;
  for (double v : w) sum += v;
  const double mean = static_cast<double>(sum / static_cast<long double>(w.size()));

  if (p == 0 && q == 0) {
    m.alpha = mean;
    fill_state(m, series, w);
    return m;
  }

  const auto up = static_cast<std::size_t>(p), uq = static_cast<std::size_t>(q);
  auto unpack = [&](const std::vector<double>& x, ArimaModel& out) {
    out.alpha = x[0];
    out.phi.assign(x.begin() + 1, x.begin() + 1 + static_cast<std::ptrdiff_t>(up));
    out.theta.assign(x.begin() + 1 + static_cast<std::ptrdiff_t>(up), x.end());
  };
  std::vector<double> phi(up), theta(uq);
  auto css = [&](const std::vector<double>& x) {
    std::copy(x.begin() + 1, x.begin() + 1 + static_cast<std::ptrdiff_t>(up), phi.begin());
    std::copy(x.begin() + 1 + static_cast<std::ptrdiff_t>(up), x.end(), theta.begin());
    if (!roots_outside_unit_circle(theta)) return std::numeric_limits<double>::max();
    const auto e = arima_residuals(w, x[0], phi, theta);
    double s = 0.0;
    for (std::size_t t = up; t < e.size(); ++t) s += e[t] * e[t];
    return std::isfinite(s) ? s : std::numeric_limits<double>::max();
  };

  double sd = 0.0;
  for (double v : w) sd += (v - mean) * (v - mean);
  sd = std::sqrt(sd / static_cast<double>(w.size()));
  const double alpha_step = 0.1 * (sd > 0.0 ? sd : std::max(std::abs(mean), 1.0));

  std::vector<double> x(1 + up + uq, 0.0);
  x[0] = mean;
  Rng rng(opts.seed);
  int evals = 0;
  double fx = css(x);
  for (int round = 0; round <= opts.restarts; ++round) {
    std::vector<double> steps(x.size(), 0.1);
    steps[0] = alpha_step;
    if (round > 0)
      for (auto& s : steps) s *= uniform(rng, 0.5, 1.5);
    const auto r = nelder_mead(css, x, steps, opts.max_evaluations - evals, opts.tolerance);
    evals += r.evaluations;
    const bool improved = r.fx < fx - opts.tolerance * std::abs(fx);
    if (r.fx <= fx) {
      x = r.x;
      fx = r.fx;
    }
    if (!r.converged) {
      unpack(x, m);
      m.iterations = evals;
      fill_state(m, series, w);
      throw ArimaFitError("ARIMA simplex search did not converge within " + std::to_string(opts.max_evaluations) +
                              " evaluations (best css " + std::to_string(fx) + ")",
                          m);
    }
    if (round > 0 && !improved) break;
  }
  unpack(x, m);
  m.iterations = evals;
  fill_state(m, series, w);
  return m;
}

ArimaModel arima_condition(const ArimaModel& shared, std::span<const double> series) {
  const std::size_t need = static_cast<std::size_t>(shared.d + shared.p + shared.q + 1);
  if (series.size() < need) throw InvalidInput("series too short to condition the shared ARIMA model");
  ArimaModel m = shared;
  const auto w = difference(series, m.d);
  long double sum = 0.0L;
  for (double v : w) sum += v;
  double phi_sum = 0.0;
  for (double f : m.phi) phi_sum += f;
  m.alpha = static_cast<double>(sum / static_cast<long double>(w.size())) * (1.0 - phi_sum);
  fill_state(m, series, w);
  return m;
}

std::vector<double> predict_arima(const ArimaModel& m, std::size_t horizon) {
  if (horizon < 1) throw InvalidInput("horizon must be >= 1");
  std::vector<double> w_hist = m.tail_w;
  std::vector<double> e_hist = m.tail_eps;
  std::vector<double> out;
  std::vector<double> levels = m.last_levels;
  for (std::size_t h = 0; h < horizon; ++h) {
    double w = m.alpha;
    for (std::size_t i = 0; i < m.phi.size(); ++i) w += m.phi[i] * w_hist[w_hist.size() - 1 - i];
    for (std::size_t j = 0; j < m.theta.size(); ++j) w -= m.theta[j] * e_hist[e_hist.size() - 1 - j];
    if (!w_hist.empty()) {
      w_hist.erase(w_hist.begin());
      w_hist.push_back(w);
    }
    if (!e_hist.empty()) {
      e_hist.erase(e_hist.begin());
      e_hist.push_back(0.0);
    }
    // integrate back through the differencing levels
    double v = w;
    for (std::size_t k = levels.size(); k > 0; --k) {
      levels[k - 1] += v;
      v = levels[k - 1];
    }
    out.push_back(v);
  }
  return out;
}

void arima_update(ArimaModel& m, double observation) {
  // differenced value of the new observation at each level
  double v = observation;
  std::vector<double> next_levels(m.last_levels.size());
  for (std::size_t k = 0; k < m.last_levels.size(); ++k) {
    next_levels[k] = v;
    v -= m.last_levels[k];
  }
  const double w = v;
  double pred = m.alpha;
  for (std::size_t i = 0; i < m.phi.size(); ++i) pred += m.phi[i] * m.tail_w[m.tail_w.size() - 1 - i];
  for (std::size_t j = 0; j < m.theta.size(); ++j) pred -= m.theta[j] * m.tail_eps[m.tail_eps.size() - 1 - j];
  if (!m.tail_w.empty()) {
    m.tail_w.erase(m.tail_w.begin());
    m.tail_w.push_back(w);
  }
  if (!m.tail_eps.empty()) {
    m.tail_eps.erase(m.tail_eps.begin());
    m.tail_eps.push_back(w - pred);
  }
  m.last_levels = std::move(next_levels);
  ++m.n_obs;
}

std::vector<double> rolling_forecast(ArimaModel model, std::span<const double> future) {
  std::vector<double> out;
  out.reserve(future.size());
  for (double y : future) {
    out.push_back(predict_arima(model, 1).front());
    arima_update(model, y);
  }
  return out;
}

AutoArimaResult auto_arima(std::span<const double> series, const AutoArimaOptions& opts) {
  if (opts.max_p < 0 || opts.max_q < 0 || opts.max_d < 0 || opts.max_pq < 0)
    throw InvalidInput("auto_arima grid bounds must be >= 0");
  if (!(opts.holdout_fraction > 0.0 && opts.holdout_fraction < 1.0))
    throw InvalidInput("holdout fraction must lie in (0, 1)");
  const auto n_hold = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(opts.holdout_fraction * static_cast<double>(series.size()))));
  if (n_hold >= series.size()) throw InvalidInput("series too short for a holdout");
  const auto train = series.first(series.size() - n_hold);
  const auto hold = series.last(n_hold);

  AutoArimaResult res;
  const ArimaCandidate* best = nullptr;
  std::size_t best_params = 0;
  for (int d = 0; d <= opts.max_d; ++d)
    for (int p = 0; p <= opts.max_p; ++p)
      for (int q = 0; q <= opts.max_q; ++q) {
        if (p + q > opts.max_pq) continue;
        ArimaCandidate c{p, d, q, false, {}, {}};
        try {
          const auto m = fit_arima(train, p, d, q, opts.fit);
          c.holdout = evaluate(rolling_forecast(m, hold), hold);
          c.ok = std::isfinite(c.holdout.mae) && std::isfinite(c.holdout.rmse);
          if (!c.ok) c.error = "non-finite holdout error";
        } catch (const Error& e) {
          c.error = e.what();
        }
        res.candidates.push_back(c);
      }
  for (const auto& c : res.candidates) {
    if (!c.ok) continue;
    const std::size_t params = 1 + static_cast<std::size_t>(c.p + c.q);
    const bool better = !best || c.holdout.mae < best->holdout.mae ||
                        (c.holdout.mae == best->holdout.mae &&
                         (c.holdout.rmse < best->holdout.rmse ||
                          (c.holdout.rmse == best->holdout.rmse && params < best_params)));
    if (better) {
      best = &c;
      best_params = params;
    }
  }
  if (!best) {
    std::string why = "every ARIMA candidate failed:";
    for (const auto& c : res.candidates)
      why += " (" + std::to_string(c.p) + "," + std::to_string(c.d) + "," + std::to_string(c.q) + "): " + c.error + ";";
    throw DegenerateInput(why);
  }
  res.model = fit_arima(series, best->p, best->d, best->q, opts.fit);
  return res;
}

}  // namespace fogplace::forecast
