#include "mrraps/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/LU>
#include <Eigen/Core>

#include "mrraps/error.hpp"
#include "mrraps/rng.hpp"
#include "mrraps/text_io.hpp"

namespace mrraps {

namespace {

void require_nonzero_gamma(const SummarySet& data, const char* who) {
  for (double g : data.gamma_hat) {
    if (g == 0.0) throw std::invalid_argument(std::string(who) + ": a gamma_hat is exactly zero");
  }
}

// Sample standard deviation.
double sd(const std::vector<double>& x) {
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size() - 1));
}

}  // namespace

const char* to_string(BaselineMethod m) noexcept {
  switch (m) {
    case BaselineMethod::ivw: return "ivw";
    case BaselineMethod::egger: return "egger";
    case BaselineMethod::weighted_median: return "weighted_median";
  }
  return "?";
}

BaselineFit ivw(const SummarySet& data) {
  if (data.empty()) throw std::invalid_argument("ivw: empty data");
  require_nonzero_gamma(data, "ivw");
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < data.size(); ++j) {
    const double vy = data.sigma_y[j] * data.sigma_y[j];
    num += data.gamma_hat[j] * data.Gamma_hat[j] / vy;
    den += data.gamma_hat[j] * data.gamma_hat[j] / vy;
  }
  return {BaselineMethod::ivw, num / den, 1.0 / std::sqrt(den), std::nullopt};
}

BaselineFit mr_egger(const SummarySet& data) {
  const std::size_t p = data.size();
  if (p < 3) throw std::invalid_argument("mr_egger: at least 3 SNPs are required");
  Eigen::Matrix2d xtwx = Eigen::Matrix2d::Zero();
  Eigen::Vector2d xtwy = Eigen::Vector2d::Zero();
  std::vector<double> x(p), y(p), w(p);
  for (std::size_t j = 0; j < p; ++j) {
    const double sign = data.gamma_hat[j] < 0 ? -1.0 : 1.0;
    x[j] = sign * data.gamma_hat[j];
    y[j] = sign * data.Gamma_hat[j];
    w[j] = 1.0 / (data.sigma_y[j] * data.sigma_y[j]);
    xtwx(0, 0) += w[j];
    xtwx(0, 1) += w[j] * x[j];
    xtwx(1, 1) += w[j] * x[j] * x[j];
    xtwy(0) += w[j] * y[j];
    xtwy(1) += w[j] * x[j] * y[j];
  }
  xtwx(1, 0) = xtwx(0, 1);
  const double det = xtwx.determinant();
  if (!(det > 1e-12 * xtwx(0, 0) * xtwx(1, 1))) throw NumericalError("mr_egger: design is rank deficient");
  const Eigen::Matrix2d inv = xtwx.inverse();
  const Eigen::Vector2d coef = inv * xtwy;
  double rss = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    const double r = y[j] - coef(0) - coef(1) * x[j];
    rss += w[j] * r * r;
  }
  const double dispersion = rss / static_cast<double>(p - 2);
  const double se = std::sqrt(inv(1, 1)) * std::max(1.0, std::sqrt(dispersion));
  return {BaselineMethod::egger, coef(1), se, coef(0)};
}

double weighted_median_value(std::span<const double> values, std::span<const double> weights) {
  const std::size_t n = values.size();
  if (n == 0 || weights.size() != n) throw std::invalid_argument("weighted_median_value: bad input sizes");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0)) throw std::invalid_argument("weighted_median_value: weights must sum to > 0");
  std::vector<double> mid(n);
  double cum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = weights[order[i]] / total;
    mid[i] = cum + 0.5 * wi;
    cum += wi;
  }
  if (mid[0] >= 0.5) return values[order[0]];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (mid[i + 1] >= 0.5) {
      const double a = values[order[i]], b = values[order[i + 1]];
      return a + (b - a) * (0.5 - mid[i]) / (mid[i + 1] - mid[i]);
    }
  }
  return values[order[n - 1]];
}

BaselineFit weighted_median(const SummarySet& data, int bootstrap_reps, std::uint64_t seed) {
  const std::size_t p = data.size();
  if (p < 3) throw std::invalid_argument("weighted_median: at least 3 SNPs are required");
  if (bootstrap_reps < 2) throw std::invalid_argument("weighted_median: bootstrap_reps must be >= 2");
  require_nonzero_gamma(data, "weighted_median");
  std::vector<double> ratio(p), w(p);
  for (std::size_t j = 0; j < p; ++j) {
    ratio[j] = data.Gamma_hat[j] / data.gamma_hat[j];
    w[j] = data.gamma_hat[j] * data.gamma_hat[j] / (data.sigma_y[j] * data.sigma_y[j]);
  }
  BaselineFit fit{BaselineMethod::weighted_median, weighted_median_value(ratio, w), 0.0, std::nullopt};

  // Weights stay at their observed values across resamples.
  rng::Engine engine(rng::stream_seed(seed, 0));
  std::normal_distribution<double> std_normal;
  std::vector<double> boot(static_cast<std::size_t>(bootstrap_reps));
  std::vector<double> rb(p);
  for (auto& b : boot) {
    for (std::size_t j = 0; j < p; ++j) {
      const double g = data.gamma_hat[j] + data.sigma_x[j] * std_normal(engine);
      const double G = data.Gamma_hat[j] + data.sigma_y[j] * std_normal(engine);
      rb[j] = G / g;
    }
    b = weighted_median_value(rb, w);
  }
  fit.se_beta = sd(boot);
  return fit;
}

std::string baseline_row(const BaselineFit& fit) {
  return std::string(to_string(fit.method)) + '\t' + text::format_double(fit.beta_hat) + '\t' +
         text::format_double(fit.se_beta) + '\t' +
         (fit.intercept ? text::format_double(*fit.intercept) : std::string("NA"));
}

}  // namespace mrraps
