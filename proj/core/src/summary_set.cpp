#include "mrraps/summary_set.hpp"

#include <cmath>
#include <unordered_set>

#include "mrraps/error.hpp"

namespace mrraps {

void SummarySet::push_back(std::string rsid, std::string chr, std::int64_t position, double p_sel,
                           const SnpStats& s) {
  snps.push_back(std::move(rsid));
  chrom.push_back(std::move(chr));
  pos.push_back(position);
  sel_pval.push_back(p_sel);
  gamma_hat.push_back(s.gamma_hat);
  sigma_x.push_back(s.sigma_x);
  Gamma_hat.push_back(s.Gamma_hat);
  sigma_y.push_back(s.sigma_y);
}

SummarySet SummarySet::subset(std::span<const std::size_t> indices) const {
  SummarySet out;
  for (std::size_t j : indices) {
    out.push_back(snps[j], chrom[j], pos[j], sel_pval[j], stats(j));
  }
  return out;
}

void SummarySet::validate() const {
  const std::size_t p = gamma_hat.size();
  if (p == 0) throw InputError("summary set is empty");
  if (sigma_x.size() != p || Gamma_hat.size() != p || sigma_y.size() != p) {
    throw InputError("summary set vectors have unequal lengths");
  }
  if (snps.size() != p || chrom.size() != p || pos.size() != p || sel_pval.size() != p) {
    throw InputError("summary set metadata vectors have unequal lengths");
  }
  std::unordered_set<std::string> seen;
  seen.reserve(p);
  for (std::size_t j = 0; j < p; ++j) {
    if (!std::isfinite(gamma_hat[j]) || !std::isfinite(Gamma_hat[j])) {
      throw InputError("non-finite effect estimate for SNP " + snps[j]);
    }
    if (!(sigma_x[j] > 0.0) || !(sigma_y[j] > 0.0) || !std::isfinite(sigma_x[j]) ||
        !std::isfinite(sigma_y[j])) {
      throw InputError("standard errors must be finite and > 0 (SNP " + snps[j] + ")");
    }
    if (!seen.insert(snps[j]).second) throw InputError("duplicate SNP " + snps[j]);
  }
}

SummarySet SummarySet::from_stats(std::span<const double> gamma_hat, std::span<const double> sigma_x,
                                  std::span<const double> Gamma_hat,
                                  std::span<const double> sigma_y) {
  if (sigma_x.size() != gamma_hat.size() || Gamma_hat.size() != gamma_hat.size() ||
      sigma_y.size() != gamma_hat.size()) {
    throw InputError("summary statistic vectors have unequal lengths");
  }
  SummarySet out;
  const std::size_t p = gamma_hat.size();
  out.snps.reserve(p);
  for (std::size_t j = 0; j < p; ++j) {
    out.push_back("snp" + std::to_string(j + 1), "0", static_cast<std::int64_t>(j), 1.0,
                  {gamma_hat[j], sigma_x[j], Gamma_hat[j], sigma_y[j]});
  }
  return out;
}

}  // namespace mrraps
