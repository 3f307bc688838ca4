#include "mrraps/raps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/LU>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "mrraps/error.hpp"
#include "mrraps/text_io.hpp"

namespace mrraps {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double median_of(std::vector<double> x) {
  const std::size_t m = x.size() / 2;
  std::nth_element(x.begin(), x.begin() + m, x.end());
  return x[m];
}

// Evaluates the tau^2 equation along tau^2 for a fixed beta. Residuals and
// beta-dependent variances are cached; the weights do not enter this equation.
class TauEquation {
 public:
  TauEquation(double beta, const SummarySet& data, const PsiFunction& psi) : psi_(psi) {
    const std::size_t p = data.size();
    resid_.resize(p);
    base_var_.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
      resid_[j] = data.Gamma_hat[j] - beta * data.gamma_hat[j];
      base_var_[j] = beta * beta * data.sigma_x[j] * data.sigma_x[j] + data.sigma_y[j] * data.sigma_y[j];
    }
  }

  double operator()(double tau_sq) const {
    double sum = 0.0;
    const double delta = psi_.delta();
    for (std::size_t j = 0; j < resid_.size(); ++j) {
      const double s2 = base_var_[j] + tau_sq;
      const double t = resid_[j] / std::sqrt(s2);
      sum += (psi_.psi2(t) - delta) / s2;
    }
    return sum;
  }

  double typical_variance() const { return median_of(base_var_); }

 private:
  const PsiFunction& psi_;
  std::vector<double> resid_;
  std::vector<double> base_var_;
};

// Root of the tau^2 equation at fixed beta, clamped to [0, inf). NaN when the
// equation stays positive for every finite tau^2.
double solve_tau_sq(double beta, const SummarySet& data, const PsiFunction& psi) {
  TauEquation eq(beta, data, psi);
  const double f0 = eq(0.0);
  if (!(f0 > 0.0)) return 0.0;
  const double ref = eq.typical_variance();
  double lo = 0.0, flo = f0;
  double hi = ref, fhi = eq(hi);
  for (int k = 0; fhi > 0.0 && k < 80; ++k) {
    lo = hi;
    flo = fhi;
    hi *= 4.0;
    fhi = eq(hi);
  }
  if (fhi > 0.0 || !std::isfinite(fhi)) return kNaN;
  if (fhi == 0.0) return hi;
  const double abs_tol = 1e-14 * ref;
  auto tol = [abs_tol](double a, double b) {
    return std::abs(b - a) <= std::max(abs_tol, 4 * std::numeric_limits<double>::epsilon() * std::abs(a));
  };
  std::uintmax_t max_iter = 200;
  auto [a, b] = boost::math::tools::toms748_solve(eq, lo, hi, flo, fhi, tol, max_iter);
  return 0.5 * (a + b);
}

}  // namespace

const char* to_string(WeightMode m) noexcept { return m == WeightMode::mle ? "mle" : "shrinkage"; }

const char* to_string(FitStatus s) noexcept {
  switch (s) {
    case FitStatus::ok: return "ok";
    case FitStatus::multiple_ambiguous_roots: return "multiple_ambiguous_roots";
    case FitStatus::no_root: return "no_root";
  }
  return "?";
}

double residual_scale(double beta, double tau_sq, const SnpStats& snp) noexcept {
  return std::sqrt(beta * beta * snp.sigma_x * snp.sigma_x + snp.sigma_y * snp.sigma_y + tau_sq);
}

double standardized_residual(double beta, double tau_sq, const SnpStats& snp) noexcept {
  return (snp.Gamma_hat - beta * snp.gamma_hat) / residual_scale(beta, tau_sq, snp);
}

double snp_weight(double beta, double tau_sq, const SnpStats& snp,
                  const std::optional<SpikeSlabPrior>& prior) noexcept {
  if (!prior) return gamma_mle(beta, tau_sq, snp).estimate;
  return eb_weight(beta, tau_sq, snp, *prior);
}

EstimatingValues estimating_functions(double beta, double tau_sq, const SummarySet& data,
                                      const std::optional<SpikeSlabPrior>& prior, const PsiFunction& psi) {
  EstimatingValues out{0.0, 0.0};
  const double delta = psi.delta();
  for (std::size_t j = 0; j < data.size(); ++j) {
    const SnpStats snp = data.stats(j);
    const double s = residual_scale(beta, tau_sq, snp);
    const double t = (snp.Gamma_hat - beta * snp.gamma_hat) / s;
    out.c1 += snp_weight(beta, tau_sq, snp, prior) * psi.psi1(t) / s;
    out.c2 += (psi.psi2(t) - delta) / (s * s);
  }
  return out;
}

double profile_loglik(double beta, const SummarySet& data) {
  double ll = 0.0;
  for (std::size_t j = 0; j < data.size(); ++j) {
    const double r = data.Gamma_hat[j] - beta * data.gamma_hat[j];
    const double v = beta * beta * data.sigma_x[j] * data.sigma_x[j] + data.sigma_y[j] * data.sigma_y[j];
    ll -= 0.5 * r * r / v;
  }
  return ll;
}

ProfileAnchor profile_likelihood_anchor(const SummarySet& data) {
  if (data.empty()) throw std::invalid_argument("profile_likelihood_anchor: empty data");
  // Coarse search over the whole line through beta = tan(theta).
  constexpr int kGrid = 256;
  const double step = std::numbers::pi / kGrid;
  int best = 0;
  double best_ll = -std::numeric_limits<double>::infinity();
  std::vector<double> betas(kGrid - 1);
  for (int i = 0; i < kGrid - 1; ++i) {
    betas[i] = std::tan(-std::numbers::pi / 2 + (i + 1) * step);
    const double ll = profile_loglik(betas[i], data);
    if (ll > best_ll) {
      best_ll = ll;
      best = i;
    }
  }
  double lo = best > 0 ? betas[best - 1] : betas[0] - 1.0 - std::abs(betas[0]);
  double hi = best < kGrid - 2 ? betas[best + 1] : betas[kGrid - 2] + 1.0 + std::abs(betas[kGrid - 2]);
  auto neg = [&](double b) { return -profile_loglik(b, data); };
  std::uintmax_t max_iter = 500;
  auto [beta, neg_ll] = boost::math::tools::brent_find_minima(neg, lo, hi, 52, max_iter);
  (void)neg_ll;

  // Fallback scale: inverse-variance precision of the ratio estimates.
  double info0 = 0.0;
  for (std::size_t j = 0; j < data.size(); ++j) {
    info0 += data.gamma_hat[j] * data.gamma_hat[j] / (data.sigma_y[j] * data.sigma_y[j]);
  }
  double scale = info0 > 0 ? 1.0 / std::sqrt(info0) : 1.0;
  const double h = 0.1 * scale;
  const double curv = (profile_loglik(beta + h, data) - 2.0 * profile_loglik(beta, data) +
                       profile_loglik(beta - h, data)) / (h * h);
  if (std::isfinite(curv) && curv < 0.0) scale = 1.0 / std::sqrt(-curv);
  scale = std::max(scale, 1e-12 * (1.0 + std::abs(beta)));
  return {beta, scale};
}

Eigen::Matrix2d variance_estimate(double beta_hat, double tau_sq_hat, const SummarySet& data,
                                  const std::optional<SpikeSlabPrior>& prior, const PsiFunction& psi,
                                  bool overdispersion) {
  const std::size_t p = data.size();
  std::vector<double> base(p);
  for (std::size_t j = 0; j < p; ++j) base[j] = residual_scale(beta_hat, 0.0, data.stats(j));
  for (double& b : base) b *= b;
  const double hb = 1e-5 * (1.0 + std::abs(beta_hat));
  const double ht = 1e-5 * (tau_sq_hat + median_of(base));

  double a11 = 0, a12 = 0, a22 = 0, v11 = 0, v22 = 0;
  for (std::size_t j = 0; j < p; ++j) {
    const SnpStats snp = data.stats(j);
    const double s = residual_scale(beta_hat, tau_sq_hat, snp);
    const double t = standardized_residual(beta_hat, tau_sq_hat, snp);
    const double g = snp_weight(beta_hat, tau_sq_hat, snp, prior);
    const double dg_db = (snp_weight(beta_hat + hb, tau_sq_hat, snp, prior) -
                          snp_weight(beta_hat - hb, tau_sq_hat, snp, prior)) / (2 * hb);
    const double dt_db = (standardized_residual(beta_hat + hb, tau_sq_hat, snp) -
                          standardized_residual(beta_hat - hb, tau_sq_hat, snp)) / (2 * hb);
    a11 += (psi.psi1(t) * dg_db + g * psi.dpsi1(t) * dt_db) / s;
    v11 += psi.c1() * g * g / (s * s);
    if (overdispersion) {
      const double dg_dt = (snp_weight(beta_hat, tau_sq_hat + ht, snp, prior) -
                            snp_weight(beta_hat, tau_sq_hat - ht, snp, prior)) / (2 * ht);
      const double s4 = s * s * s * s;
      a12 += psi.psi1(t) * dg_dt / s;
      a22 += psi.psi2_slope() / (2 * s4);
      v22 += psi.c2() / s4;
    }
  }

  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  if (!overdispersion) {
    if (!(std::abs(a11) > 0) || !std::isfinite(a11)) throw NumericalError("singular Jacobian");
    cov(0, 0) = v11 / (a11 * a11);
    return cov;
  }
  Eigen::Matrix2d jac;
  jac << a11, a12, 0.0, a22;
  const double det = a11 * a22;
  if (!(std::abs(det) > 0) || !std::isfinite(det)) throw NumericalError("singular Jacobian");
  Eigen::Matrix2d vc = Eigen::Matrix2d::Zero();
  vc(0, 0) = v11;
  vc(1, 1) = v22;
  const Eigen::Matrix2d inv = jac.inverse();
  cov = inv * vc * inv.transpose();
  return cov;
}

RootChoice select_root(std::span<const double> roots, double anchor, double ambiguity_ratio) {
  if (roots.empty()) return {0, FitStatus::no_root};
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < roots.size(); ++i) {
    const double d = std::abs(roots[i] - anchor);
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (i != best && std::abs(roots[i] - anchor) <= ambiguity_ratio * best_dist) {
      return {best, FitStatus::multiple_ambiguous_roots};
    }
  }
  return {best, FitStatus::ok};
}

RapsFit solve(const SummarySet& data, const std::optional<SpikeSlabPrior>& prior, const RapsOptions& options) {
  const std::size_t p = data.size();
  if (p < 2) throw std::invalid_argument("solve: at least 2 SNPs are required");
  if (options.overdispersion && p < 3) {
    throw std::invalid_argument("solve: at least 3 SNPs are required to estimate overdispersion");
  }
  if (options.weight_mode == WeightMode::shrinkage && !prior) {
    throw std::invalid_argument("solve: shrinkage weights need a fitted prior");
  }
  if (options.grid_points < 2) throw std::invalid_argument("solve: grid_points must be >= 2");

  const std::optional<SpikeSlabPrior> weights_prior =
      options.weight_mode == WeightMode::shrinkage ? prior : std::nullopt;
  const PsiFunction& psi = options.psi;

  RapsFit fit;
  fit.weight_mode = options.weight_mode;
  fit.overdispersed = options.overdispersion;
  fit.psi = psi;

  const ProfileAnchor anchor = profile_likelihood_anchor(data);
  fit.anchor_beta = anchor.beta;
  fit.anchor_scale = anchor.scale;

  auto tau_of = [&](double beta) {
    return options.overdispersion ? solve_tau_sq(beta, data, psi) : 0.0;
  };
  // beta equation along the curve tau^2(beta) that solves the tau^2 equation
  auto reduced = [&](double beta) {
    const double tau_sq = tau_of(beta);
    if (!std::isfinite(tau_sq)) return kNaN;
    return estimating_functions(beta, tau_sq, data, weights_prior, psi).c1;
  };

  std::vector<double> roots;
  auto scan = [&](double width) {
    const int n = options.grid_points;
    const double lo = anchor.beta - width * anchor.scale;
    const double hi = anchor.beta + width * anchor.scale;
    std::vector<double> xs(n), fs(n);
    for (int i = 0; i < n; ++i) {
      xs[i] = lo + (hi - lo) * i / (n - 1);
      fs[i] = reduced(xs[i]);
      if (fs[i] == 0.0) roots.push_back(xs[i]);
    }
    const double abs_tol = 1e-10 * anchor.scale;
    auto tol = [abs_tol](double a, double b) { return std::abs(b - a) <= abs_tol; };
    for (int i = 0; i + 1 < n; ++i) {
      if (!std::isfinite(fs[i]) || !std::isfinite(fs[i + 1])) continue;
      if (fs[i] == 0.0 || fs[i + 1] == 0.0) continue;
      if ((fs[i] < 0) == (fs[i + 1] < 0)) continue;
      std::uintmax_t max_iter = 200;
      try {
        auto [a, b] = boost::math::tools::toms748_solve(reduced, xs[i], xs[i + 1], fs[i], fs[i + 1], tol,
                                                        max_iter);
        roots.push_back(0.5 * (a + b));
      } catch (const boost::math::evaluation_error&) {
        // reduced() became undefined inside the bracket; skip it
      }
    }
  };
  scan(options.search_width);
  if (roots.empty()) scan(4.0 * options.search_width);

  std::sort(roots.begin(), roots.end());
  std::vector<double> unique_roots;
  for (double r : roots) {
    if (unique_roots.empty() || std::abs(r - unique_roots.back()) > options.dedup_tol) unique_roots.push_back(r);
  }
  for (double r : unique_roots) fit.roots_found.push_back({r, tau_of(r)});

  if (fit.roots_found.empty()) {
    fit.status = FitStatus::no_root;
    return fit;
  }

  std::vector<double> betas;
  for (const Root& r : fit.roots_found) betas.push_back(r.beta);
  const RootChoice choice = select_root(betas, anchor.beta, options.ambiguity_ratio);
  if (choice.status != FitStatus::ok) {
    fit.status = choice.status;
    return fit;
  }

  const Root root = fit.roots_found[choice.index];
  fit.status = FitStatus::ok;
  fit.beta_hat = root.beta;
  fit.tau_sq_hat = root.tau_sq;
  try {
    const Eigen::Matrix2d cov =
        variance_estimate(root.beta, root.tau_sq, data, weights_prior, psi, options.overdispersion);
    if (cov(0, 0) > 0 && std::isfinite(cov(0, 0))) {
      fit.se_beta = std::sqrt(cov(0, 0));
    } else {
      fit.se_error = "non-positive variance";
    }
    if (options.overdispersion && cov(1, 1) > 0 && std::isfinite(cov(1, 1))) {
      fit.se_tau_sq = std::sqrt(cov(1, 1));
    }
  } catch (const NumericalError& e) {
    fit.se_error = e.what();
  }

  fit.residual.resize(p);
  fit.weight.resize(p);
  fit.scale.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    const SnpStats snp = data.stats(j);
    fit.residual[j] = standardized_residual(root.beta, root.tau_sq, snp);
    fit.weight[j] = snp_weight(root.beta, root.tau_sq, snp, weights_prior);
    fit.scale[j] = residual_scale(root.beta, root.tau_sq, snp);
  }
  return fit;
}

std::string raps_fit_text(const RapsFit& fit) {
  text::KeyValueBlock kv;
  kv.set("status", std::string(to_string(fit.status)));
  kv.set("weight_mode", std::string(to_string(fit.weight_mode)));
  kv.set("psi", fit.psi.name());
  kv.set("overdispersion", fit.overdispersed);
  if (fit.beta_hat) kv.set("beta_hat", *fit.beta_hat);
  if (fit.se_beta) kv.set("se_beta", *fit.se_beta);
  if (fit.tau_sq_hat) kv.set("tau_sq_hat", *fit.tau_sq_hat);
  if (fit.se_tau_sq) kv.set("se_tau_sq", *fit.se_tau_sq);
  if (!fit.se_error.empty()) kv.set("se_error", fit.se_error);
  kv.set("anchor_beta", fit.anchor_beta);
  kv.set("n_roots", static_cast<long long>(fit.roots_found.size()));
  std::string roots;
  for (const auto& r : fit.roots_found) {
    if (!roots.empty()) roots += ';';
    roots += text::format_double(r.beta) + ',' + text::format_double(r.tau_sq);
  }
  kv.set("roots", roots.empty() ? std::string("none") : roots);
  return kv.str();
}

std::string raps_snp_tsv(const RapsFit& fit, const SummarySet& data) {
  std::string out = "rsid\tt_j\teb_weight\ts_j\n";
  if (!fit.ok()) return out;
  for (std::size_t j = 0; j < data.size(); ++j) {
    out += data.snps[j] + '\t' + text::format_double(fit.residual[j]) + '\t' +
           text::format_double(fit.weight[j]) + '\t' + text::format_double(fit.scale[j]) + '\n';
  }
  return out;
}

}  // namespace mrraps
