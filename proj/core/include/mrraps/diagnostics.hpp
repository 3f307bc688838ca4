#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mrraps/prior_model.hpp"
#include "mrraps/raps.hpp"
#include "mrraps/summary_set.hpp"

namespace mrraps {

struct DiagnosticRecord {
  std::string rsid;
  double strength = 0.0;    // posterior mean / posterior sd, coded non-negative
  double residual = 0.0;    // t_j at the fitted (beta, tau^2), same coding
  double spike_resp = 0.0;  // posterior spike probability (0 for MLE weights)
};

/// Residual-versus-strength table at the fitted root. Each SNP is recoded so
/// that its weight is non-negative. An empty `prior` uses the MLE of gamma_j
/// and its sampling standard deviation. Requires fit.ok().
std::vector<DiagnosticRecord> diagnostic_table(const RapsFit& fit, const SummarySet& data,
                                               const std::optional<SpikeSlabPrior>& prior);

/// floor(p / 20) clamped to [3, 100], then capped so that p >= df + 2.
int default_het_df(std::size_t p);

/// Cubic B-spline basis without the intercept column: `df` columns, interior
/// knots at quantiles of x, boundary knots at its range. For df < 3 the
/// degree drops to df.
Eigen::MatrixXd bspline_basis(const std::vector<double>& x, int df);

struct HeterogeneityResult {
  double p_value = 1.0;
  double f_statistic = 0.0;
  int df_used = 0;  // spline columns after any collapse
  int df_resid = 0;
};

/// F-test of residual ~ intercept + bspline(strength, df) against the
/// intercept-only model. A rank-deficient design is retried once with df
/// reduced to its numerical rank; failing that, throws NumericalError.
HeterogeneityResult heterogeneity_test(const std::vector<DiagnosticRecord>& records, int df);

/// (Phi^-1((i - 0.5) / p), i-th smallest residual) for i = 1..p.
std::vector<std::pair<double, double>> qq_data(const std::vector<DiagnosticRecord>& records);

std::string diagnostic_tsv(const std::vector<DiagnosticRecord>& records);
std::string qq_tsv(const std::vector<std::pair<double, double>>& qq);

}  // namespace mrraps
