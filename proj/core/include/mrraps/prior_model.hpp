#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mrraps/summary_set.hpp"

namespace mrraps {

/// Zero-mean two-component Gaussian mixture on the gamma/sigma_x scale:
/// p1 * N(0, sigma1_sq) + (1 - p1) * N(0, sigma2_sq), with sigma1_sq <= sigma2_sq.
struct SpikeSlabPrior {
  double p1 = 0.9;
  double sigma1_sq = 0.0;
  double sigma2_sq = 1.0;

  /// Single diffuse component; the posterior mean is then (almost) the observation.
  static SpikeSlabPrior flat(double slab_variance = 1e8) { return {0.0, 0.0, slab_variance}; }

  bool valid() const noexcept;
};

/// Posterior of gamma given Z ~ N(gamma, obs_var) under a two-component prior.
struct PosteriorMoments {
  double mean = 0.0;
  double variance = 0.0;
  double spike_resp = 0.0;  // posterior probability of the first component
};

PosteriorMoments posterior_moments(double z, double obs_var, const SpikeSlabPrior& prior,
                                   double mu1 = 0.0, double mu2 = 0.0);

struct PriorFitOptions {
  int max_iter = 1000;
  double tol = 1e-8;
  int restarts = 10;
  std::uint64_t seed = 0x5eed5eedULL;
  bool record_trace = false;  // keep the log-likelihood path of the winning run
};

struct PriorFit {
  SpikeSlabPrior prior;
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> trace;  // log-likelihood after each EM update (winning run)
};

/// Marginal log-likelihood of z under p1 N(0, sigma1_sq + 1) + (1 - p1) N(0, sigma2_sq + 1).
double marginal_loglik(std::span<const double> z, const SpikeSlabPrior& prior);

/// Maximum-likelihood fit of the marginal mixture by EM with random restarts.
///
/// Requires at least three z-scores and tol > 0. Throws NumericalError when
/// every z-score is equal. A run that exhausts max_iter is still returned
/// (best log-likelihood) with converged = false.
PriorFit fit_prior(std::span<const double> z, const PriorFitOptions& options = {});

/// gamma_hat / sigma_x for every SNP.
std::vector<double> exposure_z_scores(const SummarySet& data);

/// Maximum-likelihood estimate of gamma_j given beta and tau^2, and its sampling variance.
struct GammaMle {
  double estimate;
  double variance;
};
GammaMle gamma_mle(double beta, double tau_sq, const SnpStats& snp) noexcept;

/// Empirical-Bayes shrinkage weight: sigma_x * E[gamma/sigma_x | gamma_mle(beta, tau^2)].
double eb_weight(double beta, double tau_sq, const SnpStats& snp, const SpikeSlabPrior& prior) noexcept;

/// Posterior of gamma/sigma_x given gamma_mle(beta, tau^2); used by diagnostics.
PosteriorMoments eb_posterior(double beta, double tau_sq, const SnpStats& snp,
                              const SpikeSlabPrior& prior) noexcept;

/// Key-value text block: p1, sigma1, sigma2, loglik, converged.
std::string prior_fit_text(const PriorFit& fit);
PriorFit parse_prior_fit(const std::string& text);

}  // namespace mrraps
