#include "mrraps/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

#include "mrraps/baselines.hpp"
#include "mrraps/diagnostics.hpp"
#include "mrraps/error.hpp"
#include "mrraps/rng.hpp"
#include "mrraps/text_io.hpp"

namespace mrraps::sim {

namespace {

constexpr double kTauSq = 3.8e-5;
constexpr std::uint64_t kSigmaSeed = 0x51d3a5eedULL;

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"NOO", "ALL", "STR", "WKS", "NUL", "EXP", "CAD"};
  return names;
}

SigmaPairs surrogate_sigmas(std::size_t n) {
  // Shared factor u mimics allele frequency, which moves both SEs together.
  rng::Engine engine(kSigmaSeed);
  std::normal_distribution<double> std_normal;
  SigmaPairs out;
  out.sigma_x.resize(n);
  out.sigma_y.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double u = std_normal(engine);
    const double v = std_normal(engine);
    out.sigma_x[j] = 0.0065 * std::exp(0.3 * u);
    out.sigma_y[j] = 0.0090 * std::exp(0.3 * u + 0.1 * v);
  }
  return out;
}

SigmaPairs read_sigma_file(const std::string& path) {
  const std::string content = text::read_file(path);
  SigmaPairs out;
  std::size_t start = 0;
  bool header = true;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    const std::string_view line = text::trim(std::string_view(content).substr(start, end - start));
    start = end + 1;
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto cells = text::split(line, '\t');
    if (cells.size() < 2) throw InputError("sigma file: expected two columns in " + path);
    const auto sx = text::parse_double(cells[0]);
    const auto sy = text::parse_double(cells[1]);
    if (!sx || !sy || !(*sx > 0) || !(*sy > 0)) throw InputError("sigma file: bad value in " + path);
    out.sigma_x.push_back(*sx);
    out.sigma_y.push_back(*sy);
  }
  return out;
}

std::string sigma_tsv(const SigmaPairs& s) {
  std::string out = "sigma_x\tsigma_y\n";
  for (std::size_t j = 0; j < s.sigma_x.size(); ++j) {
    out += text::format_double(s.sigma_x[j]) + '\t' + text::format_double(s.sigma_y[j]) + '\n';
  }
  return out;
}

SimSetting SimSetting::preset(const std::string& name) {
  SimSetting s;
  s.name = name;
  s.tau = std::sqrt(kTauSq);
  s.beta_true = 0.2;
  if (name == "NOO" || name == "ALL" || name == "NUL") {
    s.p = 898;
    s.p1 = 0.92;
    s.sigma1 = 0.47;
    s.sigma2 = 3.48;
    s.outlier = name == "ALL";
    if (name == "NUL") s.beta_true = 0.0;
  } else if (name == "STR") {
    s.p = 11;
    s.p1 = 0.0;  // sigma1 == sigma2, so the mixture is a single Gaussian
    s.sigma1 = 5.93;
    s.sigma2 = 5.93;
    s.outlier = true;
  } else if (name == "WKS") {
    s.p = 887;
    s.p1 = 0.92;
    s.sigma1 = 0.44;
    s.sigma2 = 2.39;
    s.outlier = true;
  } else if (name == "EXP") {
    s.p = 898;
    s.dist = EffectDist::laplace;
    s.laplace_rate = 1.5;
  } else if (name == "CAD") {
    // Exposure and outcome measure the same trait, so beta = 1 and no pleiotropy.
    s.p = 1650;
    s.beta_true = 1.0;
    s.tau = 0.0;
    s.p1 = 0.99;
    s.sigma1 = 0.44;
    s.sigma2 = 4.5;
  } else {
    throw std::invalid_argument("unknown simulation setting: " + name);
  }
  const SigmaPairs sig = surrogate_sigmas(s.p);
  s.sigma_x = sig.sigma_x;
  s.sigma_y = sig.sigma_y;
  if (name == "CAD") {
    // Two case-control studies of similar size: comparable SEs on both sides.
    s.sigma_x = sig.sigma_y;
    for (double& v : s.sigma_y) v *= 1.2;
  }
  return s;
}

SimData generate(const SimSetting& setting, std::uint64_t seed) {
  if (setting.sigma_x.size() < setting.p || setting.sigma_y.size() < setting.p) {
    throw std::invalid_argument("generate: sigma vectors shorter than p");
  }
  if (setting.p == 0) throw std::invalid_argument("generate: p must be >= 1");
  rng::Engine engine(rng::mix64(seed));
  std::normal_distribution<double> std_normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> expo(setting.laplace_rate);

  const std::size_t p = setting.p;
  SimData out;
  out.gamma_true.resize(p);
  out.alpha.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    double z;
    if (setting.dist == EffectDist::laplace) {
      const double mag = expo(engine);
      z = unit(engine) < 0.5 ? -mag : mag;
    } else {
      const double sd = unit(engine) < setting.p1 ? setting.sigma1 : setting.sigma2;
      z = sd * std_normal(engine);
    }
    out.gamma_true[j] = z * setting.sigma_x[j];
  }
  for (std::size_t j = 0; j < p; ++j) out.alpha[j] = setting.tau * std_normal(engine);
  if (setting.outlier) {
    std::size_t strongest = 0;
    for (std::size_t j = 1; j < p; ++j) {
      if (std::abs(out.gamma_true[j]) > std::abs(out.gamma_true[strongest])) strongest = j;
    }
    // Shift against the causal direction: read in the allele coding where gamma > 0.
    const double direction = out.gamma_true[strongest] < 0 ? -1.0 : 1.0;
    out.alpha[strongest] -= direction * setting.outlier_shift * setting.tau;
    out.outlier_index = strongest;
  }
  std::vector<double> g(p), G(p), sx(p), sy(p);
  for (std::size_t j = 0; j < p; ++j) {
    sx[j] = setting.sigma_x[j];
    sy[j] = setting.sigma_y[j];
    const double Gamma = setting.beta_true * out.gamma_true[j] + out.alpha[j];
    g[j] = out.gamma_true[j] + sx[j] * std_normal(engine);
    G[j] = Gamma + sy[j] * std_normal(engine);
  }
  out.data = SummarySet::from_stats(g, sx, G, sy);
  return out;
}

EstimatorSpec EstimatorSpec::raps_default(WeightMode mode, bool huber, bool overdispersion) {
  EstimatorSpec e;
  e.kind = EstimatorKind::raps;
  e.raps.weight_mode = mode;
  e.raps.psi = huber ? PsiFunction::huber() : PsiFunction::identity();
  e.raps.overdispersion = overdispersion;
  e.name = std::string("raps_") + to_string(mode);
  if (!huber) e.name += "_identity";
  if (!overdispersion) e.name += "_tau0";
  return e;
}

EstimatorSpec EstimatorSpec::baseline(EstimatorKind kind) {
  EstimatorSpec e;
  e.kind = kind;
  switch (kind) {
    case EstimatorKind::ivw: e.name = "ivw"; break;
    case EstimatorKind::egger: e.name = "egger"; break;
    case EstimatorKind::weighted_median: e.name = "weighted_median"; break;
    case EstimatorKind::raps: throw std::invalid_argument("baseline: raps is not a baseline");
  }
  return e;
}

std::vector<EstimatorSpec> standard_estimators() {
  return {EstimatorSpec::baseline(EstimatorKind::egger), EstimatorSpec::baseline(EstimatorKind::weighted_median),
          EstimatorSpec::raps_default(WeightMode::mle), EstimatorSpec::raps_default(WeightMode::shrinkage)};
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("RAPS_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SimMetrics summarize(const std::string& estimator, const std::vector<RepRecord>& reps, double beta_true) {
  SimMetrics m;
  m.estimator = estimator;
  double sum = 0, sum_sq_err = 0, sum_se = 0;
  std::size_t cover = 0, reject = 0;
  for (const auto& r : reps) {
    if (!r.ok) {
      ++m.n_failed;
      continue;
    }
    ++m.n_used;
    sum += r.beta;
    sum_sq_err += (r.beta - beta_true) * (r.beta - beta_true);
    sum_se += r.se;
    const double lo = r.beta - 1.96 * r.se, hi = r.beta + 1.96 * r.se;
    if (lo <= beta_true && beta_true <= hi) ++cover;
    if (lo > 0 || hi < 0) ++reject;
  }
  if (m.n_used == 0) return m;
  const double n = static_cast<double>(m.n_used);
  m.mean_beta = sum / n;
  m.rmse = std::sqrt(sum_sq_err / n);
  m.coverage = static_cast<double>(cover) / n;
  m.power = static_cast<double>(reject) / n;
  m.mean_se = sum_se / n;
  double ss = 0;
  for (const auto& r : reps) {
    if (r.ok) ss += (r.beta - m.mean_beta) * (r.beta - m.mean_beta);
  }
  m.sd_beta = m.n_used > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  m.mc_se_mean = m.sd_beta / std::sqrt(n);
  return m;
}

namespace {

RepRecord run_estimator(const EstimatorSpec& e, const SummarySet& data, const std::optional<SpikeSlabPrior>& prior,
                        bool heterogeneity, std::uint64_t rep_seed) {
  RepRecord rec;
  try {
    switch (e.kind) {
      case EstimatorKind::ivw:
      case EstimatorKind::egger:
      case EstimatorKind::weighted_median: {
        const BaselineFit b = e.kind == EstimatorKind::ivw     ? ivw(data)
                              : e.kind == EstimatorKind::egger ? mr_egger(data)
                                                               : weighted_median(data, 200, rep_seed);
        rec.ok = std::isfinite(b.beta_hat) && b.se_beta > 0 && std::isfinite(b.se_beta);
        rec.beta = b.beta_hat;
        rec.se = b.se_beta;
        rec.status = rec.ok ? "ok" : "bad_se";
        break;
      }
      case EstimatorKind::raps: {
        const std::optional<SpikeSlabPrior> used =
            e.raps.weight_mode == WeightMode::shrinkage ? prior : std::nullopt;
        const RapsFit fit = solve(data, used, e.raps);
        rec.status = to_string(fit.status);
        if (fit.ok() && fit.se_beta) {
          rec.ok = true;
          rec.beta = *fit.beta_hat;
          rec.se = *fit.se_beta;
          if (heterogeneity) {
            const auto table = diagnostic_table(fit, data, used);
            rec.het_p = heterogeneity_test(table, default_het_df(data.size())).p_value;
          }
        } else if (fit.ok()) {
          rec.status = "se_failed";
        }
        break;
      }
    }
  } catch (const std::exception& ex) {
    rec.ok = false;
    rec.status = std::string("error: ") + ex.what();
  }
  return rec;
}

}  // namespace

StudyResult run_study(const SimSetting& setting, const std::vector<EstimatorSpec>& estimators,
                      const StudyOptions& options) {
  if (options.n_reps < 1) throw std::invalid_argument("run_study: n_reps must be >= 1");
  if (estimators.empty()) throw std::invalid_argument("run_study: no estimators");
  const bool need_prior = std::any_of(estimators.begin(), estimators.end(), [](const EstimatorSpec& e) {
    return e.kind == EstimatorKind::raps && e.raps.weight_mode == WeightMode::shrinkage;
  });

  StudyResult result;
  result.setting = setting.name;
  const std::size_t n_reps = static_cast<std::size_t>(options.n_reps);
  result.reps.assign(estimators.size(), std::vector<RepRecord>(n_reps));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t r = next++; r < n_reps; r = next++) {
      try {
        const std::uint64_t rep_seed = rng::stream_seed(options.seed, r);
        const SimData sim = generate(setting, rep_seed);
        std::optional<SpikeSlabPrior> prior;
        if (need_prior) {
          try {
            prior = fit_prior(exposure_z_scores(sim.data), options.prior_fit).prior;
          } catch (const std::exception&) {
            // shrinkage fits for this replication are recorded as failed
          }
        }
        for (std::size_t e = 0; e < estimators.size(); ++e) {
          const auto& spec = estimators[e];
          if (spec.kind == EstimatorKind::raps && spec.raps.weight_mode == WeightMode::shrinkage && !prior) {
            result.reps[e][r] = RepRecord{false, 0, 0, -1, "prior_failed"};
            continue;
          }
          result.reps[e][r] = run_estimator(spec, sim.data, prior, options.heterogeneity, rep_seed);
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int threads = std::min<int>(resolve_threads(options.threads), options.n_reps);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t e = 0; e < estimators.size(); ++e) {
    SimMetrics m = summarize(estimators[e].name, result.reps[e], setting.beta_true);
    if (m.n_used == 0) {
      throw NumericalError("run_study: every replication failed for estimator " + estimators[e].name);
    }
    result.metrics.push_back(std::move(m));
  }
  return result;
}

std::string metrics_tsv(const std::vector<StudyResult>& results) {
  std::string out = "setting\testimator\tmean\trmse\tcoverage\tpower\tn_used\n";
  for (const auto& r : results) {
    for (const auto& m : r.metrics) {
      out += r.setting + '\t' + m.estimator + '\t' + text::format_double(m.mean_beta) + '\t' +
             text::format_double(m.rmse) + '\t' + text::format_double(m.coverage) + '\t' +
             text::format_double(m.power) + '\t' + std::to_string(m.n_used) + '\n';
    }
  }
  return out;
}

std::string reps_tsv(const StudyResult& result, const std::vector<EstimatorSpec>& estimators) {
  std::string out = "setting\testimator\trep\tok\tbeta\tse\thet_p\tstatus\n";
  for (std::size_t e = 0; e < result.reps.size(); ++e) {
    for (std::size_t r = 0; r < result.reps[e].size(); ++r) {
      const RepRecord& rec = result.reps[e][r];
      out += result.setting + '\t' + estimators[e].name + '\t' + std::to_string(r) + '\t' +
             (rec.ok ? "1" : "0") + '\t' + text::format_double(rec.beta) + '\t' + text::format_double(rec.se) +
             '\t' + (rec.het_p >= 0 ? text::format_double(rec.het_p) : std::string("NA")) + '\t' + rec.status +
             '\n';
    }
  }
  return out;
}

}  // namespace mrraps::sim
