#include "run_config.hpp"

#include <algorithm>
#include <optional>
#include <set>

#include <nlohmann/json.hpp>

#include "mrraps/error.hpp"
#include "mrraps/simulation.hpp"

namespace mrraps::cli {

using nlohmann::json;

namespace {

const std::set<std::string> kKeys{
    "command", "exposure",  "outcome",   "selection",     "data",       "columns",  "exposure_columns",
    "outcome_columns", "selection_columns", "p_min",
    "p_max",   "distance_bp", "drop_palindromic", "strata", "sig_threshold", "weights", "psi",
    "huber_k", "overdispersion", "het_df", "settings", "reps", "sigma_file", "dump_reps",
    "heterogeneity", "seed", "out", "version"};

template <typename T>
void read(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

std::optional<gwas::Role> role_from_name(const std::string& name) {
  for (gwas::Role r : {gwas::Role::rsid, gwas::Role::chrom, gwas::Role::pos, gwas::Role::effect_allele,
                       gwas::Role::other_allele, gwas::Role::beta, gwas::Role::se, gwas::Role::pval}) {
    if (name == gwas::role_name(r)) return r;
  }
  return std::nullopt;
}

}  // namespace

std::string to_json(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["exposure"] = c.exposure;
  j["outcome"] = c.outcome;
  j["selection"] = c.selection;
  j["data"] = c.data;
  j["columns"] = c.columns;
  j["exposure_columns"] = c.exposure_columns;
  j["outcome_columns"] = c.outcome_columns;
  j["selection_columns"] = c.selection_columns;
  j["p_min"] = c.p_min;
  j["p_max"] = c.p_max;
  j["distance_bp"] = c.distance_bp;
  j["drop_palindromic"] = c.drop_palindromic;
  j["strata"] = c.strata;
  j["sig_threshold"] = c.sig_threshold;
  j["weights"] = c.weights;
  j["psi"] = c.psi;
  j["huber_k"] = c.huber_k;
  j["overdispersion"] = c.overdispersion;
  j["het_df"] = c.het_df;
  j["settings"] = c.settings;
  j["reps"] = c.reps;
  j["sigma_file"] = c.sigma_file;
  j["dump_reps"] = c.dump_reps;
  j["heterogeneity"] = c.heterogeneity;
  j["seed"] = c.seed;
  j["out"] = c.out;
  return j.dump(2) + "\n";
}

RunConfig from_json(const std::string& text) {
  RunConfig c;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw InputError("config: expected a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (!kKeys.contains(key)) throw InputError("config: unknown key '" + key + "'");
    }
    read(j, "command", c.command);
    read(j, "exposure", c.exposure);
    read(j, "outcome", c.outcome);
    read(j, "selection", c.selection);
    read(j, "data", c.data);
    read(j, "columns", c.columns);
    read(j, "exposure_columns", c.exposure_columns);
    read(j, "outcome_columns", c.outcome_columns);
    read(j, "selection_columns", c.selection_columns);
    read(j, "p_min", c.p_min);
    read(j, "p_max", c.p_max);
    read(j, "distance_bp", c.distance_bp);
    read(j, "drop_palindromic", c.drop_palindromic);
    read(j, "strata", c.strata);
    read(j, "sig_threshold", c.sig_threshold);
    read(j, "weights", c.weights);
    read(j, "psi", c.psi);
    read(j, "huber_k", c.huber_k);
    read(j, "overdispersion", c.overdispersion);
    read(j, "het_df", c.het_df);
    read(j, "settings", c.settings);
    read(j, "reps", c.reps);
    read(j, "sigma_file", c.sigma_file);
    read(j, "dump_reps", c.dump_reps);
    read(j, "heterogeneity", c.heterogeneity);
    read(j, "seed", c.seed);
    read(j, "out", c.out);
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  return c;
}

void validate(const RunConfig& c) {
  static const std::set<std::string> commands{"fit", "simulate", "diagnose", "select"};
  if (!commands.contains(c.command)) throw InputError("unknown command '" + c.command + "'");
  if (c.weights != "mle" && c.weights != "shrinkage") {
    throw InputError("--weights must be 'mle' or 'shrinkage', got '" + c.weights + "'");
  }
  if (c.psi != "identity" && c.psi != "huber") {
    throw InputError("--psi must be 'identity' or 'huber', got '" + c.psi + "'");
  }
  if (!(c.huber_k > 0)) throw InputError("--huber-k must be > 0");
  if (!(c.p_min >= 0 && c.p_min < c.p_max && c.p_max <= 1)) {
    throw InputError("p-value window must satisfy 0 <= p-min < p-max <= 1");
  }
  if (c.distance_bp < 0) throw InputError("--distance-bp must be >= 0");
  if (!(c.sig_threshold > 0 && c.sig_threshold < 1)) throw InputError("significance threshold must be in (0, 1)");
  if (c.het_df < 0) throw InputError("--het-df must be >= 0 (0 selects the default)");
  for (const auto* cols : {&c.columns, &c.exposure_columns, &c.outcome_columns, &c.selection_columns}) {
    for (const auto& [role, header] : *cols) {
      if (!role_from_name(role)) throw InputError("unknown column role '" + role + "'");
      if (header.empty()) throw InputError("empty header name for role '" + role + "'");
    }
  }
  if (c.command == "simulate") {
    if (c.reps < 1) throw InputError("--reps must be >= 1");
    if (c.settings.empty()) throw InputError("--setting is required");
    const auto& names = sim::preset_names();
    for (const auto& s : c.settings) {
      if (std::find(names.begin(), names.end(), s) == names.end()) {
        throw InputError("unknown setting '" + s + "'");
      }
    }
  } else {
    const bool files = !c.exposure.empty() || !c.outcome.empty() || !c.selection.empty();
    if (c.data.empty() && !files) throw InputError("give --data or all of --exposure, --outcome, --selection");
    if (!c.data.empty() && files) throw InputError("--data cannot be combined with --exposure/--outcome/--selection");
    if (files && (c.exposure.empty() || c.outcome.empty() || c.selection.empty())) {
      throw InputError("--exposure, --outcome and --selection must be given together");
    }
  }
}

RapsOptions raps_options(const RunConfig& c) {
  RapsOptions o;
  o.weight_mode = c.weights == "mle" ? WeightMode::mle : WeightMode::shrinkage;
  o.psi = c.psi == "identity" ? PsiFunction::identity() : PsiFunction::huber(c.huber_k);
  o.overdispersion = c.overdispersion;
  return o;
}

gwas::ColumnMap column_map(const RunConfig& c, const RunConfig::Columns& per_file) {
  gwas::ColumnMap map;
  for (const auto* cols : {&c.columns, &per_file}) {
    for (const auto& [role, header] : *cols) {
      const auto r = role_from_name(role);
      if (!r) throw InputError("unknown column role '" + role + "'");
      map.columns[*r] = header;
    }
  }
  return map;
}

}  // namespace mrraps::cli
