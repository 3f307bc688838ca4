#include "mrraps/prior_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "mrraps/error.hpp"
#include "mrraps/rng.hpp"
#include "mrraps/text_io.hpp"

namespace mrraps {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

struct EmRun {
  SpikeSlabPrior prior;
  double loglik = -std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
  std::vector<double> trace;
};

// Works on marginal variances v_k = sigma_k^2 + 1 (each >= 1).
EmRun run_em(std::span<const double> z2, double p1, double v1, double v2, const PriorFitOptions& opt) {
  const double n = static_cast<double>(z2.size());
  EmRun run;
  double prev = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    const double a1 = std::log(p1) - 0.5 * std::log(v1);
    const double a2 = std::log1p(-p1) - 0.5 * std::log(v2);
    const double b1 = 0.5 / v1, b2 = 0.5 / v2;
    double ll = 0.0, sr = 0.0, srz = 0.0, sz = 0.0;
    for (double q : z2) {
      const double l1 = a1 - b1 * q;
      const double l2 = a2 - b2 * q;
      const double d = l2 - l1;
      double r;
      if (d < 0) {
        const double e = std::exp(d);
        r = 1.0 / (1.0 + e);
        ll += l1 + std::log1p(e);
      } else {
        const double e = std::exp(-d);
        r = e / (1.0 + e);
        ll += l2 + std::log1p(e);
      }
      sr += r;
      srz += r * q;
      sz += q;
    }
    ll -= 0.5 * kLogTwoPi * n;
    if (opt.record_trace) run.trace.push_back(ll);
    run.iterations = iter + 1;
    if (std::abs(ll - prev) < opt.tol) {
      run.converged = true;
      prev = ll;
      break;
    }
    prev = ll;

    p1 = sr / n;
    if (sr > 0) v1 = std::max(1.0, srz / sr);
    if (n - sr > 0) v2 = std::max(1.0, (sz - srz) / (n - sr));
  }
  run.prior = {p1, v1 - 1.0, v2 - 1.0};
  run.loglik = prev;
  return run;
}

double median(std::vector<double> x) {
  const std::size_t m = x.size() / 2;
  std::nth_element(x.begin(), x.begin() + m, x.end());
  double hi = x[m];
  if (x.size() % 2 == 1) return hi;
  double lo = *std::max_element(x.begin(), x.begin() + m);
  return 0.5 * (lo + hi);
}

}  // namespace

bool SpikeSlabPrior::valid() const noexcept {
  return p1 >= 0.0 && p1 <= 1.0 && sigma1_sq >= 0.0 && sigma2_sq >= sigma1_sq && std::isfinite(sigma2_sq);
}

PosteriorMoments posterior_moments(double z, double obs_var, const SpikeSlabPrior& prior, double mu1,
                                   double mu2) {
  auto component = [&](double mu, double var, double& mean, double& post_var) {
    if (var <= 0.0) {
      mean = mu;
      post_var = 0.0;
    } else {
      mean = (z * var + mu * obs_var) / (obs_var + var);
      post_var = obs_var * var / (obs_var + var);
    }
  };
  double m1, v1, m2, v2;
  component(mu1, prior.sigma1_sq, m1, v1);
  component(mu2, prior.sigma2_sq, m2, v2);

  double resp;
  if (prior.p1 <= 0.0) {
    resp = 0.0;
  } else if (prior.p1 >= 1.0) {
    resp = 1.0;
  } else {
    const double s1 = obs_var + prior.sigma1_sq, s2 = obs_var + prior.sigma2_sq;
    const double l1 = std::log(prior.p1) - 0.5 * std::log(s1) - 0.5 * (z - mu1) * (z - mu1) / s1;
    const double l2 = std::log1p(-prior.p1) - 0.5 * std::log(s2) - 0.5 * (z - mu2) * (z - mu2) / s2;
    const double d = l2 - l1;
    resp = d < 0 ? 1.0 / (1.0 + std::exp(d)) : std::exp(-d) / (1.0 + std::exp(-d));
  }
  PosteriorMoments out;
  out.spike_resp = resp;
  out.mean = resp * m1 + (1.0 - resp) * m2;
  out.variance = resp * v1 + (1.0 - resp) * v2 + resp * (1.0 - resp) * (m1 - m2) * (m1 - m2);
  return out;
}

double marginal_loglik(std::span<const double> z, const SpikeSlabPrior& prior) {
  const double v1 = prior.sigma1_sq + 1.0, v2 = prior.sigma2_sq + 1.0;
  double ll = 0.0;
  for (double x : z) {
    const double d1 = prior.p1 > 0 ? prior.p1 * std::exp(-0.5 * x * x / v1) / std::sqrt(v1) : 0.0;
    const double d2 = prior.p1 < 1 ? (1 - prior.p1) * std::exp(-0.5 * x * x / v2) / std::sqrt(v2) : 0.0;
    ll += std::log(d1 + d2) - 0.5 * kLogTwoPi;
  }
  return ll;
}

PriorFit fit_prior(std::span<const double> z, const PriorFitOptions& options) {
  if (z.size() < 3) throw std::invalid_argument("fit_prior needs at least 3 z-scores");
  if (!(options.tol > 0)) throw std::invalid_argument("fit_prior: tol must be > 0");
  if (options.max_iter < 1) throw std::invalid_argument("fit_prior: max_iter must be >= 1");
  if (std::all_of(z.begin(), z.end(), [&](double x) { return x == z.front(); })) {
    throw NumericalError("fit_prior: degenerate input (all z-scores equal)");
  }

  std::vector<double> z2(z.size());
  double mean = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    z2[j] = z[j] * z[j];
    mean += z[j];
  }
  mean /= static_cast<double>(z.size());
  double var = 0.0;
  for (double x : z) var += (x - mean) * (x - mean);
  var /= static_cast<double>(z.size() - 1);

  const double s1_init = std::max(0.0, 0.25 * median(z2));
  const double s2_init = std::max(1.0, 2.0 * (var - 1.0));

  EmRun best = run_em(z2, 0.9, s1_init + 1.0, s2_init + 1.0, options);
  rng::Engine engine(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int r = 0; r < options.restarts; ++r) {
    const double p1 = 0.5 + 0.49 * unit(engine);
    const double s1 = unit(engine) * (2.0 * s1_init + 0.5);
    const double s2 = 1.0 + unit(engine) * 4.0 * std::max(1.0, var - 1.0);
    EmRun run = run_em(z2, p1, s1 + 1.0, s2 + 1.0, options);
    if (run.loglik > best.loglik) best = std::move(run);
  }

  PriorFit fit;
  fit.prior = best.prior;
  if (fit.prior.sigma1_sq > fit.prior.sigma2_sq) {
    std::swap(fit.prior.sigma1_sq, fit.prior.sigma2_sq);
    fit.prior.p1 = 1.0 - fit.prior.p1;
  }
  fit.loglik = marginal_loglik(z, fit.prior);
  fit.converged = best.converged;
  fit.iterations = best.iterations;
  fit.trace = std::move(best.trace);
  return fit;
}

std::vector<double> exposure_z_scores(const SummarySet& data) {
  std::vector<double> z(data.size());
  for (std::size_t j = 0; j < data.size(); ++j) z[j] = data.gamma_hat[j] / data.sigma_x[j];
  return z;
}

GammaMle gamma_mle(double beta, double tau_sq, const SnpStats& snp) noexcept {
  const double vy = snp.sigma_y * snp.sigma_y + tau_sq;
  const double vx = snp.sigma_x * snp.sigma_x;
  const double info = 1.0 / vx + beta * beta / vy;
  const double w = snp.gamma_hat / vx + beta * snp.Gamma_hat / vy;
  return {w / info, 1.0 / info};
}

PosteriorMoments eb_posterior(double beta, double tau_sq, const SnpStats& snp,
                              const SpikeSlabPrior& prior) noexcept {
  const GammaMle mle = gamma_mle(beta, tau_sq, snp);
  const double vx = snp.sigma_x * snp.sigma_x;
  return posterior_moments(mle.estimate / snp.sigma_x, mle.variance / vx, prior);
}

double eb_weight(double beta, double tau_sq, const SnpStats& snp, const SpikeSlabPrior& prior) noexcept {
  return snp.sigma_x * eb_posterior(beta, tau_sq, snp, prior).mean;
}

std::string prior_fit_text(const PriorFit& fit) {
  text::KeyValueBlock kv;
  kv.set("p1", fit.prior.p1);
  kv.set("sigma1", std::sqrt(fit.prior.sigma1_sq));
  kv.set("sigma2", std::sqrt(fit.prior.sigma2_sq));
  kv.set("loglik", fit.loglik);
  kv.set("converged", fit.converged);
  return kv.str();
}

PriorFit parse_prior_fit(const std::string& text) {
  const auto kv = text::KeyValueBlock::parse(text);
  PriorFit fit;
  const double s1 = kv.get_double("sigma1"), s2 = kv.get_double("sigma2");
  fit.prior = {kv.get_double("p1"), s1 * s1, s2 * s2};
  fit.loglik = kv.get_double("loglik");
  fit.converged = kv.get("converged").value_or("false") == "true";
  if (!fit.prior.valid()) throw InputError("prior block describes an invalid prior");
  return fit;
}

}  // namespace mrraps
