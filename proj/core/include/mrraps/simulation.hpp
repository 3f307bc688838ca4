#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mrraps/prior_model.hpp"
#include "mrraps/raps.hpp"
#include "mrraps/summary_set.hpp"

namespace mrraps::sim {

enum class EffectDist { mixture, laplace };

/// One generative configuration. Effect sizes are drawn on the
/// gamma_j / sigma_xj scale; sigma vectors supply the sampling noise.
struct SimSetting {
  std::string name;
  std::size_t p = 0;
  double beta_true = 0.2;
  double tau = 0.0;  // SD of the direct effects alpha_j
  EffectDist dist = EffectDist::mixture;
  double p1 = 0.0;
  double sigma1 = 0.0;
  double sigma2 = 1.0;
  double laplace_rate = 1.5;
  bool outlier = false;
  double outlier_shift = 5.0;  // in units of tau, subtracted from the strongest SNP's alpha
  std::vector<double> sigma_x;
  std::vector<double> sigma_y;

  /// NOO, ALL, STR, WKS, NUL, EXP, or CAD (beta = 1, tau = 0, 1650 SNPs).
  /// Throws std::invalid_argument for any other name.
  static SimSetting preset(const std::string& name);
};

/// Names accepted by SimSetting::preset.
const std::vector<std::string>& preset_names();

/// Deterministic surrogate standard errors (sigma_x, sigma_y), log-normal and
/// positively correlated through a shared allele-frequency factor.
struct SigmaPairs {
  std::vector<double> sigma_x;
  std::vector<double> sigma_y;
};
SigmaPairs surrogate_sigmas(std::size_t n);

/// Reads a two-column (sigma_x, sigma_y) TSV with a header row.
SigmaPairs read_sigma_file(const std::string& path);
std::string sigma_tsv(const SigmaPairs& s);

struct SimData {
  SummarySet data;
  std::vector<double> gamma_true;
  std::vector<double> alpha;
  std::optional<std::size_t> outlier_index;
};

/// Draws one dataset. Fully determined by (setting, seed).
SimData generate(const SimSetting& setting, std::uint64_t seed);

enum class EstimatorKind { raps, ivw, egger, weighted_median };

struct EstimatorSpec {
  std::string name;
  EstimatorKind kind = EstimatorKind::raps;
  RapsOptions raps;  // used when kind == raps

  static EstimatorSpec raps_default(WeightMode mode, bool huber = true, bool overdispersion = true);
  static EstimatorSpec baseline(EstimatorKind kind);
};

/// Egger, weighted median, RAPS (MLE) and RAPS (shrinkage), in that order.
std::vector<EstimatorSpec> standard_estimators();

struct RepRecord {
  bool ok = false;
  double beta = 0.0;
  double se = 0.0;
  double het_p = -1.0;  // heterogeneity p-value, RAPS only; -1 when not computed
  std::string status;
};

struct SimMetrics {
  std::string estimator;
  double mean_beta = 0.0;
  double rmse = 0.0;
  double coverage = 0.0;
  double power = 0.0;
  std::size_t n_used = 0;
  std::size_t n_failed = 0;
  double mc_se_mean = 0.0;  // sd(beta_hat) / sqrt(n_used)
  double mean_se = 0.0;     // average reported SE
  double sd_beta = 0.0;     // empirical SD of beta_hat
};

struct StudyOptions {
  int n_reps = 1000;
  std::uint64_t seed = 1;
  int threads = 0;               // 0: RAPS_THREADS or hardware concurrency
  bool heterogeneity = false;    // compute the spline test for RAPS fits
  PriorFitOptions prior_fit{};
};

struct StudyResult {
  std::string setting;
  std::vector<SimMetrics> metrics;            // one per estimator
  std::vector<std::vector<RepRecord>> reps;   // [estimator][replication]
};

/// Replication r uses seed stream_seed(seed, r), so results do not depend on
/// the worker count. Throws when every replication of an estimator fails.
StudyResult run_study(const SimSetting& setting, const std::vector<EstimatorSpec>& estimators,
                      const StudyOptions& options);

SimMetrics summarize(const std::string& estimator, const std::vector<RepRecord>& reps, double beta_true);

/// Worker count: RAPS_THREADS when set and positive, else hardware concurrency, at least 1.
int resolve_threads(int requested);

/// Header: setting, estimator, mean, rmse, coverage, power, n_used.
std::string metrics_tsv(const std::vector<StudyResult>& results);

/// One row per replication and estimator.
std::string reps_tsv(const StudyResult& result, const std::vector<EstimatorSpec>& estimators);

}  // namespace mrraps::sim
