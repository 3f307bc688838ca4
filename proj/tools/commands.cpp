#include "commands.hpp"

#include <cmath>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mrraps/baselines.hpp"
#include "mrraps/diagnostics.hpp"
#include "mrraps/error.hpp"
#include "mrraps/gwas_io.hpp"
#include "mrraps/prior_model.hpp"
#include "mrraps/raps.hpp"
#include "mrraps/simulation.hpp"
#include "mrraps/text_io.hpp"

namespace mrraps::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Loaded {
  SummarySet data;
  std::string provenance;  // counts from parsing and harmonization
};

Loaded load_inputs(const RunConfig& c, std::ostream& log) {
  Loaded out;
  if (!c.data.empty()) {
    out.data = gwas::read_summary_set(c.data);
    out.provenance = "harmonized input: " + std::to_string(out.data.size()) + " SNPs";
  } else {
    const auto sel = gwas::parse_summary_file(c.selection, column_map(c, c.selection_columns));
    const auto exp = gwas::parse_summary_file(c.exposure, column_map(c, c.exposure_columns));
    const auto outc = gwas::parse_summary_file(c.outcome, column_map(c, c.outcome_columns));
    const auto h = gwas::harmonize(sel.records, exp.records, outc.records, c.drop_palindromic);
    out.data = h.data;
    out.provenance = "parsed " + std::to_string(sel.records.size()) + "/" + std::to_string(exp.records.size()) +
                     "/" + std::to_string(outc.records.size()) + " rows (skipped " +
                     std::to_string(sel.skipped) + "/" + std::to_string(exp.skipped) + "/" +
                     std::to_string(outc.skipped) + "); harmonized " + std::to_string(h.data.size()) +
                     " SNPs (dropped unmatched " + std::to_string(h.dropped_unmatched) + ", palindromic " +
                     std::to_string(h.dropped_palindromic) + ", allele mismatch " +
                     std::to_string(h.dropped_allele_mismatch) + ")";
  }
  log << out.provenance << '\n';
  return out;
}

struct Stratum {
  std::string name;
  double lo = 0.0, hi = 1.0;
  SummarySet data;
  std::string note;  // why a stratum has no fit
  std::optional<PriorFit> prior;
  std::optional<RapsFit> fit;
  std::vector<DiagnosticRecord> diagnostics;
  std::optional<HeterogeneityResult> het;
  int het_df = 0;
  std::vector<BaselineFit> baselines;
};

Stratum window(std::string name, double lo, double hi) {
  Stratum s;
  s.name = std::move(name);
  s.lo = lo;
  s.hi = hi;
  return s;
}

std::vector<Stratum> make_strata(const RunConfig& c) {
  if (!c.strata) return {window("selected", c.p_min, c.p_max)};
  return {window("all", 0.0, 1.0), window("significant", 0.0, c.sig_threshold),
          window("nonsignificant", c.sig_threshold, 1.0)};
}

void fit_stratum(Stratum& s, const RunConfig& c, bool with_baselines) {
  const std::size_t p = s.data.size();
  const RapsOptions options = raps_options(c);
  if (p >= 3) {
    try {
      s.prior = fit_prior(exposure_z_scores(s.data));
    } catch (const std::exception& e) {
      s.note = std::string("prior fit failed: ") + e.what();
    }
  }
  std::optional<SpikeSlabPrior> weights_prior;
  if (options.weight_mode == WeightMode::shrinkage) {
    if (!s.prior) {
      if (s.note.empty()) s.note = "shrinkage weights need at least 3 SNPs";
      return;
    }
    weights_prior = s.prior->prior;
  }
  try {
    s.fit = solve(s.data, weights_prior, options);
  } catch (const std::invalid_argument& e) {
    s.note = e.what();
    return;
  }
  if (s.fit->ok()) {
    s.diagnostics = diagnostic_table(*s.fit, s.data, weights_prior);
    s.het_df = c.het_df > 0 ? c.het_df : default_het_df(p);
    if (p >= static_cast<std::size_t>(s.het_df) + 2) {
      try {
        s.het = heterogeneity_test(s.diagnostics, s.het_df);
      } catch (const NumericalError& e) {
        s.note = e.what();
      }
    }
  }
  if (with_baselines) {
    s.baselines.push_back(ivw(s.data));
    if (p >= 3) {
      try {
        s.baselines.push_back(mr_egger(s.data));
      } catch (const NumericalError&) {
        // rank-deficient design: no Egger row
      }
      s.baselines.push_back(weighted_median(s.data, 200, c.seed));
    }
  }
}

std::string fmt(const std::optional<double>& v) { return v ? text::format_double(*v) : std::string("NA"); }

std::string fit_block(const Stratum& s, const RunConfig& c) {
  text::KeyValueBlock kv;
  kv.set("stratum", s.name);
  kv.set("p_window", "(" + text::format_double(s.lo) + "," + text::format_double(s.hi) + "]");
  kv.set("n_snps", static_cast<long long>(s.data.size()));
  if (s.fit) {
    const auto fit = text::KeyValueBlock::parse(raps_fit_text(*s.fit));
    for (const auto& [k, v] : fit.entries()) kv.set(k, v);
  } else {
    kv.set("status", std::string("not_fitted"));
  }
  if (s.het) {
    kv.set("het_p_value", s.het->p_value);
    kv.set("het_df", static_cast<long long>(s.het->df_used));
  }
  if (s.prior) {
    kv.set("prior_p1", s.prior->prior.p1);
    kv.set("prior_sigma1", std::sqrt(s.prior->prior.sigma1_sq));
    kv.set("prior_sigma2", std::sqrt(s.prior->prior.sigma2_sq));
    kv.set("prior_loglik", s.prior->loglik);
    kv.set("prior_converged", s.prior->converged);
  }
  if (!s.note.empty()) kv.set("note", s.note);
  kv.set("seed", static_cast<long long>(c.seed));
  return kv.str();
}

std::string summary_rows(const Stratum& s, const RunConfig& c) {
  const std::string n = std::to_string(s.data.size());
  std::string out;
  const std::string raps_name = "raps_" + c.weights;
  if (s.fit) {
    const RapsFit& f = *s.fit;
    out += s.name + '\t' + n + '\t' + raps_name + '\t' + fmt(f.beta_hat) + '\t' + fmt(f.se_beta) + '\t' +
           fmt(f.tau_sq_hat) + "\tNA\t" + to_string(f.status) + '\t' +
           (s.het ? text::format_double(s.het->p_value) : std::string("NA")) + '\n';
  } else {
    out += s.name + '\t' + n + '\t' + raps_name + "\tNA\tNA\tNA\tNA\tnot_fitted\tNA\n";
  }
  for (const auto& b : s.baselines) {
    out += s.name + '\t' + n + '\t' + to_string(b.method) + '\t' + text::format_double(b.beta_hat) + '\t' +
           text::format_double(b.se_beta) + "\tNA\t" + fmt(b.intercept) + "\tok\tNA\n";
  }
  return out;
}

void write_manifest(const RunConfig& c, const fs::path& dir) {
  std::string json = to_json(c);
  // Record the tool version alongside the config; from_json accepts and ignores it.
  json.insert(json.find('{') + 1, "\n  \"version\": \"" + std::string(kVersion) + "\",");
  text::write_file_atomic(dir / "run_manifest.json", json);
}

int run_fit_like(const RunConfig& c, std::ostream& log, bool with_baselines) {
  const fs::path out(c.out);
  fs::create_directories(out);
  const Loaded loaded = load_inputs(c, log);

  std::vector<Stratum> strata = make_strata(c);
  for (auto& s : strata) {
    try {
      s.data = gwas::select_instruments(loaded.data, s.lo, s.hi, c.distance_bp);
    } catch (const InputError& e) {
      s.note = e.what();
      continue;
    }
    fit_stratum(s, c, with_baselines);
  }

  std::string summary = "stratum\tn_snps\tmethod\tbeta_hat\tse_beta\ttau_sq_hat\tintercept\tstatus\thet_p\n";
  for (const auto& s : strata) {
    summary += summary_rows(s, c);
    const fs::path dir = c.strata ? out / s.name : out;
    fs::create_directories(dir);
    text::write_file_atomic(dir / "fit.txt", fit_block(s, c));
    if (!s.data.empty()) gwas::write_summary_set(dir / "instruments.tsv", s.data);
    if (s.fit && s.fit->ok()) {
      text::write_file_atomic(dir / "diagnostic.tsv", diagnostic_tsv(s.diagnostics));
      text::write_file_atomic(dir / "qq.tsv", qq_tsv(qq_data(s.diagnostics)));
      text::write_file_atomic(dir / "snps.tsv", raps_snp_tsv(*s.fit, s.data));
    }
  }
  text::write_file_atomic(out / "summary.tsv", summary);
  write_manifest(c, out);
  log << summary;

  bool any_ok = false, any_ambiguous = false;
  for (const auto& s : strata) {
    if (!s.fit) continue;
    any_ok = any_ok || s.fit->ok();
    any_ambiguous = any_ambiguous || s.fit->status == FitStatus::multiple_ambiguous_roots;
  }
  if (any_ambiguous) {
    log << "multiple ambiguous roots: estimate withheld\n";
    return kExitAmbiguous;
  }
  if (!any_ok) {
    for (const auto& s : strata) {
      if (!s.note.empty()) throw NumericalError(s.name + ": " + s.note);
      if (s.fit) throw NumericalError(s.name + ": " + to_string(s.fit->status));
    }
    throw NumericalError("no stratum could be fitted");
  }
  return kExitOk;
}

}  // namespace

int cmd_fit(const RunConfig& config, std::ostream& log) { return run_fit_like(config, log, true); }

int cmd_diagnose(const RunConfig& config, std::ostream& log) { return run_fit_like(config, log, false); }

int cmd_select(const RunConfig& c, std::ostream& log) {
  const fs::path out(c.out);
  fs::create_directories(out);
  const Loaded loaded = load_inputs(c, log);
  const SummarySet selected = gwas::select_instruments(loaded.data, c.p_min, c.p_max, c.distance_bp);
  gwas::write_summary_set(out / "instruments.tsv", selected);
  write_manifest(c, out);
  log << "selected " << selected.size() << " instruments\n";
  return kExitOk;
}

int cmd_simulate(const RunConfig& c, std::ostream& log) {
  const fs::path out(c.out);
  fs::create_directories(out);
  std::optional<sim::SigmaPairs> sigmas;
  if (!c.sigma_file.empty()) sigmas = sim::read_sigma_file(c.sigma_file);
  const auto estimators = sim::standard_estimators();
  std::vector<sim::StudyResult> results;
  std::string reps;
  for (const auto& name : c.settings) {
    sim::SimSetting setting = sim::SimSetting::preset(name);
    if (sigmas) {
      if (sigmas->sigma_x.size() < setting.p) {
        throw InputError("sigma file has " + std::to_string(sigmas->sigma_x.size()) + " rows; setting " + name +
                         " needs " + std::to_string(setting.p));
      }
      setting.sigma_x.assign(sigmas->sigma_x.begin(), sigmas->sigma_x.begin() + static_cast<long>(setting.p));
      setting.sigma_y.assign(sigmas->sigma_y.begin(), sigmas->sigma_y.begin() + static_cast<long>(setting.p));
    }
    sim::StudyOptions options;
    options.n_reps = c.reps;
    options.seed = c.seed;
    options.heterogeneity = c.heterogeneity;
    results.push_back(sim::run_study(setting, estimators, options));
    if (c.dump_reps) {
      std::string block = sim::reps_tsv(results.back(), estimators);
      if (!reps.empty()) block.erase(0, block.find('\n') + 1);
      reps += block;
    }
    log << "finished " << name << '\n';
  }
  const std::string metrics = sim::metrics_tsv(results);
  text::write_file_atomic(out / "metrics.tsv", metrics);
  if (c.dump_reps) text::write_file_atomic(out / "reps.tsv", reps);
  write_manifest(c, out);
  log << metrics;
  return kExitOk;
}

int run(const RunConfig& config, std::ostream& log, std::ostream& err) {
  try {
    validate(config);
    if (config.command == "fit") return cmd_fit(config, log);
    if (config.command == "diagnose") return cmd_diagnose(config, log);
    if (config.command == "select") return cmd_select(config, log);
    return cmd_simulate(config, log);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace mrraps::cli
