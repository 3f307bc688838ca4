#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mrraps/gwas_io.hpp"
#include "mrraps/raps.hpp"

namespace mrraps::cli {

/// Every knob of a run. Defaults are the standard choices
/// (Huber k = 1.345, 5e-8 significance, 10 Mb clumping distance).
struct RunConfig {
  std::string command = "fit";  // fit | simulate | diagnose | select

  // inputs
  std::string exposure;
  std::string outcome;
  std::string selection;
  std::string data;  // pre-harmonized summary-set TSV; replaces the three files
  using Columns = std::map<std::string, std::string>;  // role name -> header
  Columns columns;            // applies to all three files; unset roles keep their defaults
  Columns exposure_columns;   // per-file overrides layered over `columns`
  Columns outcome_columns;
  Columns selection_columns;

  // instrument selection
  double p_min = 0.0;
  double p_max = 1.0;
  std::int64_t distance_bp = 10'000'000;
  bool drop_palindromic = true;
  bool strata = false;  // fit all / significant / non-significant SNPs
  double sig_threshold = 5e-8;

  // estimator
  std::string weights = "shrinkage";  // mle | shrinkage
  std::string psi = "huber";          // identity | huber
  double huber_k = 1.345;
  bool overdispersion = true;
  int het_df = 0;  // 0: floor(p / 20) clamped to [3, 100]

  // simulation
  std::vector<std::string> settings{"NOO"};
  int reps = 1000;
  std::string sigma_file;  // optional (sigma_x, sigma_y) TSV replacing the surrogate
  bool dump_reps = false;
  bool heterogeneity = false;

  std::uint64_t seed = 1;
  std::string out = "mrraps_out";

  bool operator==(const RunConfig&) const = default;
};

std::string to_json(const RunConfig& config);

/// Inverse of to_json. Missing keys keep their defaults; unknown keys and
/// type mismatches throw InputError.
RunConfig from_json(const std::string& text);

/// Throws InputError describing the first invalid field.
void validate(const RunConfig& config);

RapsOptions raps_options(const RunConfig& config);
/// Default headers, then `columns`, then the per-file overrides.
gwas::ColumnMap column_map(const RunConfig& config, const RunConfig::Columns& per_file = {});

}  // namespace mrraps::cli
