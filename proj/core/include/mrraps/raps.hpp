#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mrraps/prior_model.hpp"
#include "mrraps/psi.hpp"
#include "mrraps/summary_set.hpp"

namespace mrraps {

/// How each SNP's score is weighted: by the profile MLE of gamma_j (a flat
/// prior) or by its empirical-Bayes posterior mean under a fitted prior.
enum class WeightMode { mle, shrinkage };

enum class FitStatus { ok, multiple_ambiguous_roots, no_root };

const char* to_string(WeightMode m) noexcept;
const char* to_string(FitStatus s) noexcept;

/// s_j(beta, tau^2) = sqrt(beta^2 sigma_x^2 + sigma_y^2 + tau^2)
double residual_scale(double beta, double tau_sq, const SnpStats& snp) noexcept;

/// t_j(beta, tau^2) = (Gamma_hat - beta gamma_hat) / s_j
double standardized_residual(double beta, double tau_sq, const SnpStats& snp) noexcept;

/// Weight of one SNP: gamma_mle when `prior` is empty, else the EB posterior mean.
double snp_weight(double beta, double tau_sq, const SnpStats& snp,
                  const std::optional<SpikeSlabPrior>& prior) noexcept;

struct EstimatingValues {
  double c1;  // beta equation
  double c2;  // tau^2 equation
};

/// The pair of robust estimating functions at (beta, tau^2).
/// An empty `prior` selects the profile-score (MLE) weights.
EstimatingValues estimating_functions(double beta, double tau_sq, const SummarySet& data,
                                      const std::optional<SpikeSlabPrior>& prior, const PsiFunction& psi);

/// -1/2 sum (Gamma_hat - beta gamma_hat)^2 / (beta^2 sigma_x^2 + sigma_y^2)
double profile_loglik(double beta, const SummarySet& data);

struct ProfileAnchor {
  double beta;   // maximizer of the profile log-likelihood
  double scale;  // 1/sqrt(observed information); sizes the root search
};

/// Global maximizer of profile_loglik over the real line.
ProfileAnchor profile_likelihood_anchor(const SummarySet& data);

struct RapsOptions {
  PsiFunction psi = PsiFunction::huber();
  bool overdispersion = true;
  WeightMode weight_mode = WeightMode::shrinkage;
  int grid_points = 32;
  double search_width = 6.0;     // anchor scales on each side of the anchor
  double dedup_tol = 1e-6;       // absolute, in beta
  double ambiguity_ratio = 5.0;  // competing root within this multiple of the closest distance
};

struct Root {
  double beta;
  double tau_sq;
};

struct RapsFit {
  std::optional<double> beta_hat;
  std::optional<double> tau_sq_hat;
  std::optional<double> se_beta;
  std::optional<double> se_tau_sq;
  WeightMode weight_mode = WeightMode::shrinkage;
  bool overdispersed = true;
  PsiFunction psi = PsiFunction::huber();
  std::vector<Root> roots_found;
  double anchor_beta = 0.0;
  double anchor_scale = 0.0;
  FitStatus status = FitStatus::no_root;
  std::string se_error;  // non-empty when the point estimate exists but its SE failed

  // Per-SNP quantities at the reported root; empty unless status == ok.
  std::vector<double> residual;
  std::vector<double> weight;
  std::vector<double> scale;

  bool ok() const noexcept { return status == FitStatus::ok; }
};

struct RootChoice {
  std::size_t index;
  FitStatus status;
};

/// Picks the root closest to the profile-likelihood anchor. The choice is
/// ambiguous when another root lies within `ambiguity_ratio` times that
/// distance; no_root when `roots` is empty.
RootChoice select_root(std::span<const double> roots, double anchor, double ambiguity_ratio = 5.0);

/// Solves the estimating equations and applies the root-selection protocol.
///
/// `prior` is used only in shrinkage mode, where it is required. Throws
/// std::invalid_argument when p < 2, or p < 3 with overdispersion.
RapsFit solve(const SummarySet& data, const std::optional<SpikeSlabPrior>& prior,
              const RapsOptions& options = {});

/// Sandwich covariance of (beta_hat, tau_sq_hat). With overdispersion off
/// the tau^2 row and column are zero. Throws NumericalError when the
/// Jacobian is singular.
Eigen::Matrix2d variance_estimate(double beta_hat, double tau_sq_hat, const SummarySet& data,
                                  const std::optional<SpikeSlabPrior>& prior, const PsiFunction& psi,
                                  bool overdispersion = true);

/// Flat key-value summary of a fit.
std::string raps_fit_text(const RapsFit& fit);

/// Per-SNP TSV: rsid, t_j, eb_weight, s_j.
std::string raps_snp_tsv(const RapsFit& fit, const SummarySet& data);

}  // namespace mrraps
