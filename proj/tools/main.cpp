#include <functional>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "mrraps/text_io.hpp"

namespace {

using mrraps::cli::RunConfig;
using Copy = std::function<void(RunConfig&, const RunConfig&)>;

// Remembers which field each option writes, so explicit flags can be layered
// over a config loaded with --config.
struct Registry {
  std::vector<std::pair<CLI::Option*, Copy>> entries;

  template <typename T>
  CLI::Option* add(CLI::App& app, const std::string& name, T RunConfig::*field, RunConfig& cfg,
                   const std::string& help) {
    CLI::Option* opt = app.add_option(name, cfg.*field, help)->capture_default_str();
    entries.emplace_back(opt, [field](RunConfig& dst, const RunConfig& src) { dst.*field = src.*field; });
    return opt;
  }

  CLI::Option* flag(CLI::App& app, const std::string& name, bool RunConfig::*field, RunConfig& cfg,
                    const std::string& help) {
    CLI::Option* opt = app.add_flag(name, cfg.*field, help);
    entries.emplace_back(opt, [field](RunConfig& dst, const RunConfig& src) { dst.*field = src.*field; });
    return opt;
  }

  void overlay(RunConfig& dst, const RunConfig& src) const {
    for (const auto& [opt, copy] : entries) {
      if (opt->count() > 0) copy(dst, src);
    }
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust adjusted profile score estimation for two-sample summary-data Mendelian randomization"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string overdispersion = "on";
  std::vector<std::string> columns, exposure_columns, outcome_columns, selection_columns;
  std::string config_path;
  Registry reg;
  std::vector<CLI::Option*> od_opts, col_opts, pal_opts;
  bool keep_palindromic = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Load a run_manifest.json; explicit flags override it");
    reg.add(*sub, "--seed", &RunConfig::seed, cfg, "Master random seed");
    reg.add(*sub, "--out", &RunConfig::out, cfg, "Output directory");
  };
  auto add_inputs = [&](CLI::App* sub) {
    reg.add(*sub, "--exposure", &RunConfig::exposure, cfg, "Exposure GWAS summary file");
    reg.add(*sub, "--outcome", &RunConfig::outcome, cfg, "Outcome GWAS summary file");
    reg.add(*sub, "--selection", &RunConfig::selection, cfg, "Selection GWAS summary file");
    reg.add(*sub, "--data", &RunConfig::data, cfg, "Pre-harmonized summary-set TSV instead of the three files");
    col_opts.push_back(sub->add_option("--col", columns, "Column mapping ROLE=HEADER (roles: rsid chrom pos "
                                                         "effect_allele other_allele beta se pval)"));
    col_opts.push_back(sub->add_option("--exposure-col", exposure_columns, "ROLE=HEADER for the exposure file only"));
    col_opts.push_back(sub->add_option("--outcome-col", outcome_columns, "ROLE=HEADER for the outcome file only"));
    col_opts.push_back(sub->add_option("--selection-col", selection_columns, "ROLE=HEADER for the selection file only"));
    reg.add(*sub, "--p-min", &RunConfig::p_min, cfg, "Lower end of the selection p-value window (exclusive)");
    reg.add(*sub, "--p-max", &RunConfig::p_max, cfg, "Upper end of the selection p-value window (inclusive)");
    reg.add(*sub, "--distance-bp", &RunConfig::distance_bp, cfg, "Minimum same-chromosome distance between instruments");
    pal_opts.push_back(sub->add_flag("--keep-palindromic", keep_palindromic, "Keep A/T and C/G SNPs"));
  };
  auto add_estimator = [&](CLI::App* sub) {
    reg.add(*sub, "--weights", &RunConfig::weights, cfg, "SNP weights")->check(CLI::IsMember({"mle", "shrinkage"}));
    reg.add(*sub, "--psi", &RunConfig::psi, cfg, "Score function")->check(CLI::IsMember({"identity", "huber"}));
    reg.add(*sub, "--huber-k", &RunConfig::huber_k, cfg, "Huber tuning constant");
    od_opts.push_back(sub->add_option("--overdispersion", overdispersion, "Estimate tau^2")
                          ->check(CLI::IsMember({"on", "off"}))
                          ->capture_default_str());
    reg.add(*sub, "--het-df", &RunConfig::het_df, cfg, "Spline df of the heterogeneity test (0: floor(p/20) in [3,100])");
  };

  CLI::App* fit = app.add_subcommand("fit", "Harmonize, select instruments, fit RAPS and the baselines");
  add_common(fit);
  add_inputs(fit);
  add_estimator(fit);
  reg.flag(*fit, "--strata", &RunConfig::strata, cfg, "Fit all, significant and non-significant SNPs");
  reg.add(*fit, "--sig-threshold", &RunConfig::sig_threshold, cfg, "Significance threshold for --strata");

  CLI::App* diagnose = app.add_subcommand("diagnose", "Fit RAPS and write residual diagnostics only");
  add_common(diagnose);
  add_inputs(diagnose);
  add_estimator(diagnose);

  CLI::App* select = app.add_subcommand("select", "Harmonize and select instruments");
  add_common(select);
  add_inputs(select);

  CLI::App* simulate = app.add_subcommand("simulate", "Monte-Carlo study of the estimators");
  add_common(simulate);
  reg.add(*simulate, "--setting", &RunConfig::settings, cfg, "Settings: NOO ALL STR WKS NUL EXP CAD")
      ->delimiter(',');
  reg.add(*simulate, "--reps", &RunConfig::reps, cfg, "Replications per setting");
  reg.add(*simulate, "--sigma-file", &RunConfig::sigma_file, cfg, "TSV of (sigma_x, sigma_y) pairs");
  reg.flag(*simulate, "--dump-reps", &RunConfig::dump_reps, cfg, "Also write per-replication rows");
  reg.flag(*simulate, "--heterogeneity", &RunConfig::heterogeneity, cfg, "Run the spline test on every RAPS fit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mrraps::cli::kExitError;
  }

  for (CLI::App* sub : {fit, diagnose, select, simulate}) {
    if (sub->parsed()) cfg.command = sub->get_name();
  }
  cfg.overdispersion = overdispersion == "on";
  cfg.drop_palindromic = !keep_palindromic;
  for (auto [raw, dst] : {std::pair{&columns, &cfg.columns}, std::pair{&exposure_columns, &cfg.exposure_columns},
                           std::pair{&outcome_columns, &cfg.outcome_columns},
                           std::pair{&selection_columns, &cfg.selection_columns}}) {
    for (const auto& c : *raw) {
      const auto eq = c.find('=');
      if (eq == std::string::npos || eq == 0) {
        std::cerr << "error: column mappings are ROLE=HEADER, got '" << c << "'\n";
        return mrraps::cli::kExitError;
      }
      (*dst)[c.substr(0, eq)] = c.substr(eq + 1);
    }
  }

  RunConfig resolved = cfg;
  if (!config_path.empty()) {
    try {
      resolved = mrraps::cli::from_json(mrraps::text::read_file(config_path));
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return mrraps::cli::kExitError;
    }
    resolved.command = cfg.command;
    reg.overlay(resolved, cfg);
    auto given = [](const std::vector<CLI::Option*>& opts) {
      for (auto* o : opts) {
        if (o->count() > 0) return true;
      }
      return false;
    };
    if (given(od_opts)) resolved.overdispersion = cfg.overdispersion;
    if (given(pal_opts)) resolved.drop_palindromic = cfg.drop_palindromic;
    if (given(col_opts)) {
      resolved.columns = cfg.columns;
      resolved.exposure_columns = cfg.exposure_columns;
      resolved.outcome_columns = cfg.outcome_columns;
      resolved.selection_columns = cfg.selection_columns;
    }
  }
  return mrraps::cli::run(resolved, std::cout, std::cerr);
}
