#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mrraps/summary_set.hpp"

namespace mrraps::gwas {

/// Column roles of a summary-statistics file.
enum class Role { rsid, chrom, pos, effect_allele, other_allele, beta, se, pval };

const char* role_name(Role r) noexcept;

/// Maps each role to a header name. The seven roles other than `pval` are
/// required; when `pval` is unmapped or absent from the header it is derived
/// from the Wald statistic beta/se.
struct ColumnMap {
  std::map<Role, std::string> columns{
      {Role::rsid, "SNP"}, {Role::chrom, "CHR"},  {Role::pos, "BP"}, {Role::effect_allele, "A1"},
      {Role::other_allele, "A2"}, {Role::beta, "BETA"}, {Role::se, "SE"}, {Role::pval, "P"},
  };
};

struct ParseResult {
  std::vector<SnpRecord> records;
  std::size_t skipped = 0;
  char delimiter = '\t';
};

/// Reads a tab- or comma-delimited file with a header row.
///
/// Rows with a missing or unparseable required field, or that violate the
/// SnpRecord invariants (se > 0, p in [0,1], distinct ACGT alleles), are
/// skipped and counted. Throws InputError on a missing file, a header without
/// a mapped column, or when no row parses.
ParseResult parse_summary_file(const std::filesystem::path& path, const ColumnMap& columns = {});

struct HarmonizedSet {
  SummarySet data;          // sel_pval is populated from the selection records
  std::size_t dropped_unmatched = 0;     // not in all three inputs
  std::size_t dropped_palindromic = 0;
  std::size_t dropped_allele_mismatch = 0;
};

/// Aligns outcome and selection effects to the exposure's effect allele.
///
/// A record is kept as is when its allele pair equals the exposure's, sign
/// flipped when swapped, and otherwise retried on the complementary strand
/// (non-palindromic SNPs only). Throws InputError when nothing survives.
HarmonizedSet harmonize(const std::vector<SnpRecord>& selection, const std::vector<SnpRecord>& exposure,
                        const std::vector<SnpRecord>& outcome, bool drop_palindromic = true);

/// Greedy distance clumping on the selection p-value within (p_lo, p_hi].
///
/// Repeatedly keeps the SNP with the smallest p-value (ties by rsid) and
/// discards every remaining SNP on the same chromosome closer than
/// `min_distance_bp`. Output is in order of selection.
SummarySet select_instruments(const SummarySet& snps, double p_lo, double p_hi,
                              std::int64_t min_distance_bp);

bool is_palindromic(char a, char b) noexcept;
char complement(char allele) noexcept;

/// TSV with columns rsid, chrom, pos, gamma_hat, sigma_x, Gamma_hat, sigma_y, sel_pval.
std::string summary_set_tsv(const SummarySet& data);
void write_summary_set(const std::filesystem::path& path, const SummarySet& data);
SummarySet read_summary_set(const std::filesystem::path& path);

}  // namespace mrraps::gwas
