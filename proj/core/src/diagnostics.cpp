#include "mrraps/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/QR>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>

#include "mrraps/error.hpp"
#include "mrraps/text_io.hpp"

namespace mrraps {

std::vector<DiagnosticRecord> diagnostic_table(const RapsFit& fit, const SummarySet& data,
                                               const std::optional<SpikeSlabPrior>& prior) {
  if (!fit.ok()) throw std::invalid_argument("diagnostic_table: fit has no estimate");
  const double beta = *fit.beta_hat;
  const double tau_sq = fit.tau_sq_hat.value_or(0.0);
  std::vector<DiagnosticRecord> out(data.size());
  for (std::size_t j = 0; j < data.size(); ++j) {
    SnpStats snp = data.stats(j);
    double mean, sd, resp = 0.0;
    if (prior) {
      PosteriorMoments pm = eb_posterior(beta, tau_sq, snp, *prior);
      mean = pm.mean;
      sd = std::sqrt(pm.variance);
      resp = pm.spike_resp;
    } else {
      const GammaMle m = gamma_mle(beta, tau_sq, snp);
      mean = m.estimate;
      sd = std::sqrt(m.variance);
    }
    // Posterior means are odd in the data, so recoding only flips signs.
    if (mean < 0) {
      snp = snp.flipped();
      mean = -mean;
    }
    out[j].rsid = data.snps.empty() ? std::string() : data.snps[j];
    out[j].strength = sd > 0 ? mean / sd : 0.0;
    out[j].residual = standardized_residual(beta, tau_sq, snp);
    out[j].spike_resp = resp;
  }
  return out;
}

int default_het_df(std::size_t p) {
  int df = std::clamp(static_cast<int>(p / 20), 3, 100);
  const int cap = static_cast<int>(p) - 2;
  return std::max(1, std::min(df, cap));
}

namespace {

double quantile_sorted(const std::vector<double>& s, double q) {
  // Type-7 quantile, the R default.
  const double h = (static_cast<double>(s.size()) - 1.0) * q;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

}  // namespace

Eigen::MatrixXd bspline_basis(const std::vector<double>& x, int df) {
  if (df < 1) throw std::invalid_argument("bspline_basis: df must be >= 1");
  if (x.empty()) throw std::invalid_argument("bspline_basis: empty input");
  const int degree = std::min(3, df);
  const int n_interior = df - degree;
  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front(), hi = sorted.back();

  std::vector<double> knots;
  for (int i = 0; i <= degree; ++i) knots.push_back(lo);
  for (int i = 1; i <= n_interior; ++i) {
    knots.push_back(quantile_sorted(sorted, static_cast<double>(i) / (n_interior + 1)));
  }
  for (int i = 0; i <= degree; ++i) knots.push_back(hi);
  const int n_basis = static_cast<int>(knots.size()) - degree - 1;  // df + 1

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(x.size()), df);
  std::vector<double> b(knots.size());
  for (std::size_t r = 0; r < x.size(); ++r) {
    const double v = x[r];
    // Cox-de Boor recursion. The right boundary belongs to the last non-empty span.
    std::fill(b.begin(), b.end(), 0.0);
    std::size_t span = static_cast<std::size_t>(degree);
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
      if (knots[i] < knots[i + 1] && v >= knots[i]) span = i;
    }
    b[span] = 1.0;
    for (int d = 1; d <= degree; ++d) {
      for (std::size_t i = 0; i + d + 1 < knots.size(); ++i) {
        double left = 0.0, right = 0.0;
        const double dl = knots[i + d] - knots[i];
        const double dr = knots[i + d + 1] - knots[i + 1];
        if (dl > 0) left = (v - knots[i]) / dl * b[i];
        if (dr > 0) right = (knots[i + d + 1] - v) / dr * b[i + 1];
        b[i] = left + right;
      }
    }
    for (int c = 1; c < n_basis; ++c) out(static_cast<Eigen::Index>(r), c - 1) = b[static_cast<std::size_t>(c)];
  }
  return out;
}

namespace {

struct FTest {
  bool full_rank;
  int rank;
  HeterogeneityResult result;
};

FTest f_test(const Eigen::VectorXd& y, const std::vector<double>& x, int df) {
  const Eigen::Index n = y.size();
  Eigen::MatrixXd design(n, df + 1);
  design.col(0).setOnes();
  design.rightCols(df) = bspline_basis(x, df);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  const int rank = static_cast<int>(qr.rank());
  FTest out{rank == df + 1, rank, {}};
  if (!out.full_rank) return out;

  const Eigen::VectorXd coef = qr.solve(y);
  const double rss1 = (y - design * coef).squaredNorm();
  const double rss0 = (y.array() - y.mean()).matrix().squaredNorm();
  const int df_resid = static_cast<int>(n) - df - 1;
  out.result.df_used = df;
  out.result.df_resid = df_resid;
  if (!(rss1 > 0)) {
    out.result.f_statistic = rss0 > 0 ? std::numeric_limits<double>::infinity() : 0.0;
    out.result.p_value = rss0 > 0 ? 0.0 : 1.0;
    return out;
  }
  const double f = std::max(0.0, (rss0 - rss1) / df) / (rss1 / df_resid);
  out.result.f_statistic = f;
  boost::math::fisher_f dist(df, df_resid);
  out.result.p_value = boost::math::cdf(boost::math::complement(dist, f));
  return out;
}

}  // namespace

HeterogeneityResult heterogeneity_test(const std::vector<DiagnosticRecord>& records, int df) {
  if (df < 1) throw std::invalid_argument("heterogeneity_test: df must be >= 1");
  if (records.size() < static_cast<std::size_t>(df) + 2) {
    throw std::invalid_argument("heterogeneity_test: need at least df + 2 SNPs");
  }
  Eigen::VectorXd y(static_cast<Eigen::Index>(records.size()));
  std::vector<double> x(records.size());
  for (std::size_t j = 0; j < records.size(); ++j) {
    y(static_cast<Eigen::Index>(j)) = records[j].residual;
    x[j] = records[j].strength;
  }
  FTest t = f_test(y, x, df);
  if (t.full_rank) return t.result;
  const int reduced = t.rank - 1;
  if (reduced >= 1) {
    FTest retry = f_test(y, x, reduced);
    if (retry.full_rank) return retry.result;
  }
  throw NumericalError("heterogeneity_test: spline design is rank deficient");
}

std::vector<std::pair<double, double>> qq_data(const std::vector<DiagnosticRecord>& records) {
  std::vector<double> r(records.size());
  for (std::size_t j = 0; j < records.size(); ++j) r[j] = records[j].residual;
  std::sort(r.begin(), r.end());
  const boost::math::normal std_normal;
  const double p = static_cast<double>(r.size());
  std::vector<std::pair<double, double>> out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    out[i] = {boost::math::quantile(std_normal, (static_cast<double>(i) + 0.5) / p), r[i]};
  }
  return out;
}

std::string diagnostic_tsv(const std::vector<DiagnosticRecord>& records) {
  std::string out = "rsid\tstrength\tresidual\tspike_resp\n";
  for (const auto& r : records) {
    out += r.rsid + '\t' + text::format_double(r.strength) + '\t' + text::format_double(r.residual) + '\t' +
           text::format_double(r.spike_resp) + '\n';
  }
  return out;
}

std::string qq_tsv(const std::vector<std::pair<double, double>>& qq) {
  std::string out = "theoretical\tobserved\n";
  for (const auto& [t, o] : qq) out += text::format_double(t) + '\t' + text::format_double(o) + '\n';
  return out;
}

}  // namespace mrraps
