#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mrraps {

/// One row of a GWAS summary-statistics file.
struct SnpRecord {
  std::string rsid;
  std::string chrom;
  std::int64_t pos = 0;
  char effect_allele = 'N';
  char other_allele = 'N';
  double beta = 0.0;
  double se = 1.0;
  double pval = 1.0;
};

/// The four summary statistics of one instrument.
struct SnpStats {
  double gamma_hat;  // SNP-exposure effect
  double sigma_x;    // its standard error
  double Gamma_hat;  // SNP-outcome effect
  double sigma_y;    // its standard error

  SnpStats flipped() const noexcept { return {-gamma_hat, sigma_x, -Gamma_hat, sigma_y}; }
};

/// Harmonized per-SNP quadruples used by every estimator.
///
/// The four statistic vectors are mandatory. `snps`, `chrom`, `pos` and
/// `sel_pval` carry provenance; they are filled with placeholders for
/// simulated data.
struct SummarySet {
  std::vector<std::string> snps;
  std::vector<std::string> chrom;
  std::vector<std::int64_t> pos;
  std::vector<double> sel_pval;

  std::vector<double> gamma_hat;
  std::vector<double> sigma_x;
  std::vector<double> Gamma_hat;
  std::vector<double> sigma_y;

  std::size_t size() const noexcept { return gamma_hat.size(); }
  bool empty() const noexcept { return gamma_hat.empty(); }

  SnpStats stats(std::size_t j) const noexcept {
    return {gamma_hat[j], sigma_x[j], Gamma_hat[j], sigma_y[j]};
  }

  void push_back(std::string rsid, std::string chr, std::int64_t position, double p_sel,
                 const SnpStats& s);

  /// Subset in the order given by `indices`.
  SummarySet subset(std::span<const std::size_t> indices) const;

  /// Throws InputError when lengths differ, a sigma is not strictly positive,
  /// a value is not finite, the set is empty, or an rsid repeats.
  void validate() const;

  /// Builds a set from bare statistics, naming SNPs snp1..snpP.
  static SummarySet from_stats(std::span<const double> gamma_hat, std::span<const double> sigma_x,
                               std::span<const double> Gamma_hat, std::span<const double> sigma_y);
};

}  // namespace mrraps
