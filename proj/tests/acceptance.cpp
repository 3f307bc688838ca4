// Acceptance checks. Usage: mrraps_acceptance [--criterion N]...
// Each criterion prints its sub-checks followed by one verdict line, and the
// exit status is non-zero when any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "grids.hpp"
#include "mrraps/diagnostics.hpp"
#include "mrraps/prior_model.hpp"
#include "mrraps/psi.hpp"
#include "mrraps/raps.hpp"
#include "mrraps/rng.hpp"
#include "mrraps/simulation.hpp"
#include "oracles.hpp"

using namespace mrraps;
using sim::SimSetting;

namespace {

// Tolerances and Monte-Carlo sizes.
constexpr int kStudyReps = 1000;
constexpr int kCadReps = 100;
constexpr int kUnbiasedReps = 10000;
constexpr int kHetNullReps = 1000;
constexpr int kHetPowerReps = 200;
constexpr double kHetTrend = 0.3;  // planted slope per SD of strength
constexpr double kOracleRel = 1e-8;
constexpr double kHuberTol = 1e-10;

class Checker {
 public:
  bool check(bool ok, const std::string& what) {
    std::printf("  [%s] %s\n", ok ? "pass" : "FAIL", what.c_str());
    all_ &= ok;
    return ok;
  }
  bool ok() const { return all_; }

 private:
  bool all_ = true;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool in(double x, double lo, double hi) { return x >= lo && x <= hi; }

SpikeSlabPrior true_prior(const SimSetting& s) {
  return {s.p1, s.sigma1 * s.sigma1, s.sigma2 * s.sigma2};
}

sim::StudyResult study(const std::string& setting, const std::vector<sim::EstimatorSpec>& est, std::uint64_t seed,
                       bool het = false) {
  sim::StudyOptions o;
  o.n_reps = kStudyReps;
  o.seed = seed;
  o.heterogeneity = het;
  return run_study(SimSetting::preset(setting), est, o);
}

void print_metrics(const sim::SimMetrics& m) {
  std::printf("  %-16s mean %.4f  rmse %.4f  coverage %.3f  power %.3f  mean_se %.4f  sd %.4f  used %zu  failed %zu\n",
              m.estimator.c_str(), m.mean_beta, m.rmse, m.coverage, m.power, m.mean_se, m.sd_beta, m.n_used,
              m.n_failed);
}

// RMSE(a) - RMSE(b) and its Monte-Carlo SE from paired squared errors (delta method).
std::pair<double, double> rmse_difference(const std::vector<sim::RepRecord>& a, const std::vector<sim::RepRecord>& b,
                                          double truth) {
  std::vector<double> sa, sb, d;
  for (std::size_t r = 0; r < a.size(); ++r) {
    if (!a[r].ok || !b[r].ok) continue;
    const double ea = (a[r].beta - truth) * (a[r].beta - truth);
    const double eb = (b[r].beta - truth) * (b[r].beta - truth);
    sa.push_back(ea);
    sb.push_back(eb);
    d.push_back(ea - eb);
  }
  const double ra = std::sqrt(oracle::mean(sa)), rb = std::sqrt(oracle::mean(sb));
  const double se_msd = oracle::sd(d) / std::sqrt(static_cast<double>(d.size()));
  return {ra - rb, se_msd / (ra + rb)};
}

std::size_t index_of(const std::vector<sim::EstimatorSpec>& est, const std::string& name) {
  for (std::size_t i = 0; i < est.size(); ++i) {
    if (est[i].name == name) return i;
  }
  throw std::runtime_error("estimator not found: " + name);
}

bool criterion1(Checker& c) {
  const std::vector<sim::EstimatorSpec> est{sim::EstimatorSpec::raps_default(WeightMode::shrinkage)};
  const auto r = study("NUL", est, 101);
  const auto& m = r.metrics[0];
  print_metrics(m);
  c.check(std::abs(m.mean_beta) <= 0.01, fmt("|mean| = %.4f <= 0.01", std::abs(m.mean_beta)));
  c.check(in(m.coverage, 0.92, 0.97), fmt("coverage %.3f in [0.92, 0.97]", m.coverage));
  c.check(in(m.power, 0.03, 0.09), fmt("power %.3f in [0.03, 0.09]", m.power));
  return c.ok();
}

bool criterion2(Checker& c) {
  const std::vector<sim::EstimatorSpec> est{sim::EstimatorSpec::raps_default(WeightMode::mle),
                                            sim::EstimatorSpec::raps_default(WeightMode::shrinkage)};
  const auto r = study("NOO", est, 202);
  for (const auto& m : r.metrics) print_metrics(m);
  const auto& s = r.metrics[1];
  c.check(in(s.mean_beta, 0.18, 0.22), fmt("shrinkage mean %.4f in [0.18, 0.22]", s.mean_beta));
  c.check(in(s.coverage, 0.92, 0.97), fmt("shrinkage coverage %.3f in [0.92, 0.97]", s.coverage));
  const auto [diff, se] = rmse_difference(r.reps[1], r.reps[0], 0.2);
  c.check(diff <= 2.0 * se, fmt("RMSE(shrinkage) - RMSE(mle) = %.5f <= 2 MC SE = %.5f", diff, 2.0 * se));
  c.check(std::abs(s.mean_se / s.sd_beta - 1.0) <= 0.15,
          fmt("shrinkage mean SE / empirical SD = %.3f within 15%%", s.mean_se / s.sd_beta));
  return c.ok();
}

bool criterion3(Checker& c) {
  const auto est = sim::standard_estimators();
  const auto r = study("ALL", est, 303);
  for (const auto& m : r.metrics) print_metrics(m);
  for (const char* name : {"raps_mle", "raps_shrinkage"}) {
    const auto& m = r.metrics[index_of(est, name)];
    c.check(in(m.mean_beta, 0.15, 0.20), fmt("%s mean %.4f in [0.15, 0.20]", name, m.mean_beta));
    c.check(m.coverage >= 0.88, fmt("%s coverage %.3f >= 0.88", name, m.coverage));
  }
  for (const char* name : {"egger", "weighted_median"}) {
    const auto& m = r.metrics[index_of(est, name)];
    c.check(std::abs(m.mean_beta - 0.2) >= 0.05, fmt("%s |mean - 0.2| = %.4f >= 0.05", name, std::abs(m.mean_beta - 0.2)));
    c.check(m.coverage <= 0.75, fmt("%s coverage %.3f <= 0.75", name, m.coverage));
  }
  return c.ok();
}

bool criterion4(Checker& c) {
  const SimSetting cad = SimSetting::preset("CAD");
  struct Variant {
    const char* name;
    bool huber;
    bool overdispersion;
  };
  const Variant variants[] = {
      {"l2", false, false}, {"l2+od", false, true}, {"huber", true, false}, {"huber+od", true, true}};
  std::vector<double> ratio;
  std::map<std::string, int> covered;
  int n_ok = 0;
  for (int r = 0; r < kCadReps; ++r) {
    const SummarySet d = sim::generate(cad, rng::stream_seed(404, static_cast<std::uint64_t>(r))).data;
    const PriorFit pf = fit_prior(exposure_z_scores(d));
    bool all_ok = true;
    std::map<std::string, double> se;
    for (const auto& v : variants) {
      for (auto mode : {WeightMode::mle, WeightMode::shrinkage}) {
        RapsOptions o = sim::EstimatorSpec::raps_default(mode, v.huber, v.overdispersion).raps;
        const RapsFit f = solve(d, pf.prior, o);
        const std::string key = std::string(v.name) + "/" + to_string(mode);
        if (!f.ok() || !f.se_beta) {
          all_ok = false;
          if (r == 0) c.check(false, key + " failed on the reference dataset: " + to_string(f.status));
          continue;
        }
        const bool within = std::abs(*f.beta_hat - 1.0) <= 3.0 * *f.se_beta;
        covered[key] += within;
        se[key] = *f.se_beta;
        if (r == 0) {
          c.check(within, fmt("reference dataset %-24s beta %.4f se %.4f within 3 SE of 1", key.c_str(), *f.beta_hat,
                              *f.se_beta));
        }
      }
    }
    if (all_ok) {
      ++n_ok;
      ratio.push_back(se["huber+od/shrinkage"] / se["huber+od/mle"]);
    }
  }
  for (const auto& [k, n] : covered) std::printf("  %-24s within 3 SE in %d of %d datasets\n", k.c_str(), n, kCadReps);
  const double m = oracle::mean(ratio), mc = oracle::sd(ratio) / std::sqrt(static_cast<double>(ratio.size()));
  c.check(n_ok == kCadReps, fmt("all fits succeeded in %d of %d datasets", n_ok, kCadReps));
  c.check(m <= 1.0 + 2.0 * mc, fmt("SE ratio shrinkage/mle %.4f <= 1 + 2 MC SE = %.4f", m, 1.0 + 2.0 * mc));
  return c.ok();
}

bool criterion5(Checker& c) {
  double worst_mean = 0, worst_var = 0, worst_resp = 0;
  const auto cases = grid::posterior_cases();
  for (const auto& g : cases) {
    const auto got = posterior_moments(g.z, g.obs_var, {g.p1, g.v1, g.v2}, g.mu1, g.mu2);
    const auto want = oracle::posterior_by_quadrature(g.z, g.obs_var, g.p1, g.v1, g.v2, g.mu1, g.mu2);
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
    worst_mean = std::max(worst_mean, want.mean == 0.0 ? std::abs(got.mean) : rel(got.mean, want.mean));
    worst_var = std::max(worst_var, rel(got.variance, want.variance));
    worst_resp = std::max(worst_resp, std::abs(got.spike_resp - want.spike_resp));
  }
  c.check(cases.size() == 100, fmt("%zu grid points", cases.size()));
  c.check(worst_mean <= kOracleRel, fmt("posterior mean max rel err %.2e <= 1e-8", worst_mean));
  c.check(worst_var <= kOracleRel, fmt("posterior variance max rel err %.2e <= 1e-8", worst_var));
  c.check(worst_resp <= kOracleRel, fmt("spike responsibility max abs err %.2e <= 1e-8", worst_resp));

  double worst_huber = 0;
  for (double k : {0.5, 1.0, 1.345, 2.0, 3.0}) {
    const PsiFunction h = PsiFunction::huber(k);
    const auto want = oracle::huber_closed_form(k);
    for (auto [got, ref] : {std::pair{h.delta(), want.delta}, {h.c1(), want.c1}, {h.c2(), want.c2},
                            {h.c3(), want.c3}, {h.psi2_slope(), want.psi2_slope}}) {
      worst_huber = std::max(worst_huber, std::abs(got - ref));
    }
  }
  c.check(worst_huber <= kHuberTol, fmt("Huber constants max abs err %.2e <= 1e-10", worst_huber));
  const PsiFunction id = PsiFunction::identity();
  c.check(id.delta() == 1.0 && id.c1() == 1.0 && id.c2() == 2.0 && id.c3() == 0.0,
          "identity constants are exactly (1, 1, 2, 0)");
  return c.ok();
}

bool criterion6(Checker& c) {
  double worst_recode = 0, worst_flat = 0, worst_sign = 0;
  for (const char* name : {"NOO", "ALL", "WKS", "EXP"}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const SummarySet d = sim::generate(SimSetting::preset(name), rng::stream_seed(606, seed)).data;
      SummarySet flipped = d;
      std::mt19937_64 eng(seed);
      for (std::size_t j = 0; j < d.size(); ++j) {
        if (eng() & 1) {
          flipped.gamma_hat[j] = -flipped.gamma_hat[j];
          flipped.Gamma_hat[j] = -flipped.Gamma_hat[j];
        }
      }
      const PriorFit pf = fit_prior(exposure_z_scores(d));
      for (auto mode : {WeightMode::mle, WeightMode::shrinkage}) {
        RapsOptions o;
        o.weight_mode = mode;
        const RapsFit a = solve(d, pf.prior, o), b = solve(flipped, pf.prior, o);
        if (!c.check(a.ok() && b.ok(), fmt("%s seed %d %s fits", name, int(seed), to_string(mode))) || !a.ok() ||
            !b.ok()) {
          continue;
        }
        worst_recode = std::max(worst_recode, std::abs(*a.beta_hat - *b.beta_hat) / a.anchor_scale);
      }
      RapsOptions mle, flat;
      mle.weight_mode = WeightMode::mle;
      const RapsFit a = solve(d, std::nullopt, mle), b = solve(d, SpikeSlabPrior::flat(), flat);
      if (a.ok() && b.ok()) worst_flat = std::max(worst_flat, std::abs(*a.beta_hat - *b.beta_hat));
      else c.check(false, fmt("%s seed %d flat-prior fits", name, int(seed)));
    }
  }
  c.check(worst_recode <= 1e-8, fmt("allele recoding: max |delta beta| / scale = %.2e <= 1e-8", worst_recode));
  c.check(worst_flat < 1e-4, fmt("flat prior vs MLE weights: max |delta beta| = %.2e < 1e-4", worst_flat));

  for (const auto& g : grid::posterior_cases()) {
    if (g.mu1 != 0.0 || g.mu2 != 0.0) continue;
    const SpikeSlabPrior pr{g.p1, g.v1, g.v2};
    const double m = posterior_moments(g.z, g.obs_var, pr).mean;
    worst_sign = std::max(worst_sign, std::abs(m + posterior_moments(-g.z, g.obs_var, pr).mean));
  }
  c.check(worst_sign == 0.0, fmt("posterior mean sign equivariance: max |m(z) + m(-z)| = %.2e", worst_sign));

  bool ascent = true;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SummarySet d = sim::generate(SimSetting::preset("NOO"), rng::stream_seed(607, seed)).data;
    PriorFitOptions o;
    o.record_trace = true;
    const PriorFit f = fit_prior(exposure_z_scores(d), o);
    for (std::size_t i = 1; i < f.trace.size(); ++i) {
      ascent &= f.trace[i] >= f.trace[i - 1] - 1e-9 * std::abs(f.trace[i - 1]);
    }
  }
  c.check(ascent, "EM log-likelihood non-decreasing on 10 NOO datasets");

  bool same_data = true;
  for (const auto& name : sim::preset_names()) {
    const SimSetting s = SimSetting::preset(name);
    const auto a = sim::generate(s, 77), b = sim::generate(s, 77);
    same_data &= a.data.gamma_hat == b.data.gamma_hat && a.data.Gamma_hat == b.data.Gamma_hat;
  }
  c.check(same_data, "generate is bit-identical under a fixed seed in every setting");
  sim::StudyOptions o;
  o.n_reps = 20;
  o.seed = 608;
  o.threads = 1;
  const auto serial = run_study(SimSetting::preset("ALL"), sim::standard_estimators(), o);
  o.threads = 4;
  const auto parallel = run_study(SimSetting::preset("ALL"), sim::standard_estimators(), o);
  c.check(sim::metrics_tsv({serial}) == sim::metrics_tsv({parallel}) &&
              sim::reps_tsv(serial, sim::standard_estimators()) == sim::reps_tsv(parallel, sim::standard_estimators()),
          "run_study output identical with 1 and 4 workers");
  return c.ok();
}

bool criterion7(Checker& c) {
  const PsiFunction huber = PsiFunction::huber();
  for (const auto& name : sim::preset_names()) {
    const SimSetting s = SimSetting::preset(name);
    const double tau_sq = s.tau * s.tau;
    // The Laplace setting has no mixture truth; a prior fitted once on a pilot
    // dataset stays fixed across replications.
    const SpikeSlabPrior prior =
        s.dist == sim::EffectDist::mixture
            ? true_prior(s)
            : fit_prior(exposure_z_scores(sim::generate(s, rng::stream_seed(700, 999999)).data)).prior;
    std::vector<double> c1, c2;
    for (int r = 0; r < kUnbiasedReps; ++r) {
      const sim::SimData d = sim::generate(s, rng::stream_seed(701, static_cast<std::uint64_t>(r)));
      // the planted outlier violates the model by construction
      std::vector<std::size_t> keep;
      for (std::size_t j = 0; j < d.data.size(); ++j) {
        if (!d.outlier_index || j != *d.outlier_index) keep.push_back(j);
      }
      const auto v = estimating_functions(s.beta_true, tau_sq, d.data.subset(keep), prior, huber);
      c1.push_back(v.c1);
      c2.push_back(v.c2);
    }
    const double n = std::sqrt(static_cast<double>(kUnbiasedReps));
    const double m1 = oracle::mean(c1), se1 = oracle::sd(c1) / n;
    const double m2 = oracle::mean(c2), se2 = oracle::sd(c2) / n;
    c.check(std::abs(m1) <= 3.0 * se1, fmt("%s: C1 mean %.3e, |z| = %.2f <= 3", name.c_str(), m1, std::abs(m1) / se1));
    c.check(std::abs(m2) <= 3.0 * se2, fmt("%s: C2 mean %.3e, |z| = %.2f <= 3", name.c_str(), m2, std::abs(m2) / se2));
  }
  return c.ok();
}

bool criterion8(Checker& c) {
  const SimSetting noo = SimSetting::preset("NOO");
  const SpikeSlabPrior prior = true_prior(noo);
  RapsFit truth;
  truth.status = FitStatus::ok;
  truth.beta_hat = noo.beta_true;
  truth.tau_sq_hat = noo.tau * noo.tau;
  auto records = [&](std::uint64_t stream, int r) {
    const SummarySet d = sim::generate(noo, rng::stream_seed(stream, static_cast<std::uint64_t>(r))).data;
    return diagnostic_table(truth, d, prior);
  };
  const int df = default_het_df(noo.p);

  int reject = 0;
  for (int r = 0; r < kHetNullReps; ++r) reject += heterogeneity_test(records(801, r), df).p_value < 0.05;
  const double rate = reject / static_cast<double>(kHetNullReps);
  c.check(in(rate, 0.03, 0.07), fmt("null rejection rate %.3f in [0.03, 0.07] (df %d, %d datasets)", rate, df,
                                    kHetNullReps));

  int detect = 0;
  for (int r = 0; r < kHetPowerReps; ++r) {
    auto recs = records(802, r);
    std::vector<double> st;
    for (const auto& x : recs) st.push_back(x.strength);
    const double m = oracle::mean(st), sd = oracle::sd(st);
    for (auto& x : recs) x.residual += kHetTrend * (x.strength - m) / sd;
    detect += heterogeneity_test(recs, df).p_value < 0.05;
  }
  const double power = detect / static_cast<double>(kHetPowerReps);
  c.check(power > 0.99, fmt("power %.3f > 0.99 under a linear trend of %.2f per SD of strength", power, kHetTrend));

  // Reported for reference: the same test at each dataset's fitted root.
  sim::StudyOptions o;
  o.n_reps = kHetNullReps;
  o.seed = 803;
  o.heterogeneity = true;
  const auto r = run_study(noo, {sim::EstimatorSpec::raps_default(WeightMode::shrinkage)}, o);
  int fitted_reject = 0, used = 0;
  for (const auto& rec : r.reps[0]) {
    if (!rec.ok || rec.het_p < 0) continue;
    ++used;
    fitted_reject += rec.het_p < 0.05;
  }
  std::printf("  (info) rejection rate at fitted roots %.3f over %d datasets\n", fitted_reject / double(used), used);
  return c.ok();
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, std::function<bool(Checker&)>>> criteria{
      {1, {"NUL calibration", criterion1}},
      {2, {"NOO accuracy and efficiency", criterion2}},
      {3, {"robustness to one outlier (ALL)", criterion3}},
      {4, {"CAD analog, beta = 1", criterion4}},
      {5, {"oracle suite", criterion5}},
      {6, {"invariance suite", criterion6}},
      {7, {"unbiased estimating functions", criterion7}},
      {8, {"heterogeneity test calibration", criterion8}},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      selected.push_back(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]...\n", argv[0]);
      return 2;
    }
  }
  if (selected.empty()) {
    for (const auto& [n, _] : criteria) selected.push_back(n);
  }
  bool all = true;
  for (int n : selected) {
    const auto it = criteria.find(n);
    if (it == criteria.end()) {
      std::fprintf(stderr, "unknown criterion %d\n", n);
      return 2;
    }
    std::printf("criterion %d: %s\n", n, it->second.first);
    std::fflush(stdout);
    Checker c;
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = it->second.second(c);
    } catch (const std::exception& e) {
      std::printf("  [FAIL] exception: %s\n", e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d %s (%.1f s)\n", n, ok ? "PASS" : "FAIL", secs);
    std::fflush(stdout);
    all &= ok;
  }
  return all ? 0 : 1;
}
