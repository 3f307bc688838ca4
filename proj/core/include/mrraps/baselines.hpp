#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "mrraps/summary_set.hpp"

namespace mrraps {

enum class BaselineMethod { ivw, egger, weighted_median };

const char* to_string(BaselineMethod m) noexcept;

struct BaselineFit {
  BaselineMethod method = BaselineMethod::ivw;
  double beta_hat = 0.0;
  double se_beta = 0.0;
  std::optional<double> intercept;  // Egger only
};

/// Inverse-variance weighted ratio estimate with first-order weights
/// gamma_hat^2 / sigma_y^2. Throws std::invalid_argument if a gamma_hat is 0.
BaselineFit ivw(const SummarySet& data);

/// Weighted regression of Gamma_hat on gamma_hat with an intercept, after
/// orienting every SNP so gamma_hat >= 0. The slope SE is inflated by the
/// residual dispersion when that exceeds 1. Requires p >= 3.
BaselineFit mr_egger(const SummarySet& data);

/// Weighted median of the ratio estimates, interpolating between the
/// cumulative-weight midpoints of the sorted ratios.
double weighted_median_value(std::span<const double> values, std::span<const double> weights);

/// Weighted median estimator; SE from a parametric bootstrap that redraws
/// (gamma_hat, Gamma_hat) from their sampling normals. Requires p >= 3.
BaselineFit weighted_median(const SummarySet& data, int bootstrap_reps = 200,
                            std::uint64_t seed = 0xb007ULL);

/// Row for the fit summary table: method, beta_hat, se_beta, intercept.
std::string baseline_row(const BaselineFit& fit);

}  // namespace mrraps
