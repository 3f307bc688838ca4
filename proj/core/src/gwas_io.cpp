#include "mrraps/gwas_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "mrraps/error.hpp"
#include "mrraps/text_io.hpp"

namespace mrraps::gwas {

namespace {

bool valid_allele(char a) noexcept { return a == 'A' || a == 'C' || a == 'G' || a == 'T'; }

std::optional<char> parse_allele(std::string_view s) {
  s = text::trim(s);
  if (s.size() != 1) return std::nullopt;
  char a = static_cast<char>(std::toupper(static_cast<unsigned char>(s.front())));
  if (!valid_allele(a)) return std::nullopt;
  return a;
}

std::optional<std::int64_t> parse_position(std::string_view s) {
  auto d = text::parse_double(s);
  if (!d || !std::isfinite(*d) || *d < 0 || std::floor(*d) != *d) return std::nullopt;
  return static_cast<std::int64_t>(*d);
}

// +1 when `other` already codes the same effect allele as `ref`, -1 when swapped.
std::optional<int> alignment_sign(const SnpRecord& ref, const SnpRecord& other) {
  if (other.effect_allele == ref.effect_allele && other.other_allele == ref.other_allele) return 1;
  if (other.effect_allele == ref.other_allele && other.other_allele == ref.effect_allele) return -1;
  if (is_palindromic(ref.effect_allele, ref.other_allele)) return std::nullopt;
  const char ea = complement(other.effect_allele);
  const char oa = complement(other.other_allele);
  if (ea == ref.effect_allele && oa == ref.other_allele) return 1;
  if (ea == ref.other_allele && oa == ref.effect_allele) return -1;
  return std::nullopt;
}

std::unordered_map<std::string, const SnpRecord*> index_by_rsid(const std::vector<SnpRecord>& records) {
  std::unordered_map<std::string, const SnpRecord*> index;
  index.reserve(records.size());
  for (const auto& r : records) index.emplace(r.rsid, &r);  // first occurrence wins
  return index;
}

}  // namespace

const char* role_name(Role r) noexcept {
  switch (r) {
    case Role::rsid: return "rsid";
    case Role::chrom: return "chrom";
    case Role::pos: return "pos";
    case Role::effect_allele: return "effect_allele";
    case Role::other_allele: return "other_allele";
    case Role::beta: return "beta";
    case Role::se: return "se";
    case Role::pval: return "pval";
  }
  return "?";
}

bool is_palindromic(char a, char b) noexcept {
  return (a == 'A' && b == 'T') || (a == 'T' && b == 'A') || (a == 'C' && b == 'G') ||
         (a == 'G' && b == 'C');
}

char complement(char allele) noexcept {
  switch (allele) {
    case 'A': return 'T';
    case 'T': return 'A';
    case 'C': return 'G';
    case 'G': return 'C';
    default: return 'N';
  }
}

ParseResult parse_summary_file(const std::filesystem::path& path, const ColumnMap& columns) {
  std::ifstream in(path);
  if (!in) throw InputError("file not found or unreadable: " + path.string());

  std::string header;
  if (!std::getline(in, header)) throw InputError("empty file: " + path.string());
  if (!header.empty() && header.back() == '\r') header.pop_back();

  ParseResult result;
  result.delimiter = header.find('\t') != std::string::npos ? '\t' : ',';
  const auto names = text::split(header, result.delimiter);

  std::map<Role, std::size_t> index;
  for (const auto& [role, name] : columns.columns) {
    auto it = std::find_if(names.begin(), names.end(),
                           [&](const std::string& h) { return text::trim(h) == name; });
    if (it == names.end()) {
      if (role == Role::pval) continue;
      throw InputError(path.string() + ": header is missing column '" + name + "' (" +
                       role_name(role) + ")");
    }
    index[role] = static_cast<std::size_t>(it - names.begin());
  }
  for (Role r : {Role::rsid, Role::chrom, Role::pos, Role::effect_allele, Role::other_allele,
                 Role::beta, Role::se}) {
    if (!index.contains(r)) {
      throw InputError(path.string() + ": no column mapped for role '" + role_name(r) + "'");
    }
  }
  const bool has_pval = index.contains(Role::pval);

  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    const auto fields = text::split(line, result.delimiter);
    auto field = [&](Role r) -> std::string_view {
      std::size_t i = index.at(r);
      return i < fields.size() ? text::trim(fields[i]) : std::string_view{};
    };

    SnpRecord rec;
    rec.rsid = std::string(field(Role::rsid));
    rec.chrom = std::string(field(Role::chrom));
    auto pos = parse_position(field(Role::pos));
    auto ea = parse_allele(field(Role::effect_allele));
    auto oa = parse_allele(field(Role::other_allele));
    auto beta = text::parse_double(field(Role::beta));
    auto se = text::parse_double(field(Role::se));
    std::optional<double> pval;
    if (has_pval) {
      pval = text::parse_double(field(Role::pval));
    } else if (beta && se && *se > 0) {
      pval = std::erfc(std::abs(*beta / *se) / std::sqrt(2.0));
    }

    if (rec.rsid.empty() || rec.chrom.empty() || !pos || !ea || !oa || !beta || !se || !pval ||
        !std::isfinite(*beta) || !std::isfinite(*se) || !(*se > 0.0) || !(*pval >= 0.0 && *pval <= 1.0) ||
        *ea == *oa) {
      ++result.skipped;
      continue;
    }
    rec.pos = *pos;
    rec.effect_allele = *ea;
    rec.other_allele = *oa;
    rec.beta = *beta;
    rec.se = *se;
    rec.pval = *pval;
    result.records.push_back(std::move(rec));
  }
  if (result.records.empty()) throw InputError(path.string() + ": no parseable rows");
  return result;
}

HarmonizedSet harmonize(const std::vector<SnpRecord>& selection, const std::vector<SnpRecord>& exposure,
                        const std::vector<SnpRecord>& outcome, bool drop_palindromic) {
  if (selection.empty() || exposure.empty() || outcome.empty()) {
    throw InputError("harmonize: every input dataset must be non-empty");
  }
  const auto sel_index = index_by_rsid(selection);
  const auto out_index = index_by_rsid(outcome);

  HarmonizedSet result;
  std::unordered_set<std::string> seen;
  for (const auto& exp : exposure) {
    if (!seen.insert(exp.rsid).second) continue;
    auto s_it = sel_index.find(exp.rsid);
    auto o_it = out_index.find(exp.rsid);
    if (s_it == sel_index.end() || o_it == out_index.end()) {
      ++result.dropped_unmatched;
      continue;
    }
    if (drop_palindromic && is_palindromic(exp.effect_allele, exp.other_allele)) {
      ++result.dropped_palindromic;
      continue;
    }
    auto o_sign = alignment_sign(exp, *o_it->second);
    auto s_sign = alignment_sign(exp, *s_it->second);
    if (!o_sign || !s_sign) {
      ++result.dropped_allele_mismatch;
      continue;
    }
    result.data.push_back(exp.rsid, exp.chrom, exp.pos, s_it->second->pval,
                          {exp.beta, exp.se, *o_sign * o_it->second->beta, o_it->second->se});
  }
  if (result.data.empty()) throw InputError("no SNPs survive intersection and harmonization");
  return result;
}

SummarySet select_instruments(const SummarySet& snps, double p_lo, double p_hi,
                              std::int64_t min_distance_bp) {
  if (min_distance_bp < 0) throw std::invalid_argument("min_distance_bp must be >= 0");
  if (!(p_lo >= 0.0 && p_lo < p_hi && p_hi <= 1.0)) {
    throw std::invalid_argument("p-value window must satisfy 0 <= lo < hi <= 1");
  }
  std::vector<std::size_t> order;
  for (std::size_t j = 0; j < snps.size(); ++j) {
    if (snps.sel_pval[j] > p_lo && snps.sel_pval[j] <= p_hi) order.push_back(j);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (snps.sel_pval[a] != snps.sel_pval[b]) return snps.sel_pval[a] < snps.sel_pval[b];
    return snps.snps[a] < snps.snps[b];
  });

  // Kept positions per chromosome; a candidate is excluded when any kept SNP
  // lies strictly closer than min_distance_bp.
  std::unordered_map<std::string, std::vector<std::int64_t>> kept_positions;
  std::vector<std::size_t> kept;
  for (std::size_t j : order) {
    auto& positions = kept_positions[snps.chrom[j]];
    const bool too_close = std::any_of(positions.begin(), positions.end(), [&](std::int64_t q) {
      return std::llabs(q - snps.pos[j]) < min_distance_bp;
    });
    if (too_close) continue;
    positions.push_back(snps.pos[j]);
    kept.push_back(j);
  }
  if (kept.empty()) throw InputError("instrument selection produced an empty set");
  return snps.subset(kept);
}

std::string summary_set_tsv(const SummarySet& data) {
  std::string out = "rsid\tchrom\tpos\tgamma_hat\tsigma_x\tGamma_hat\tsigma_y\tsel_pval\n";
  for (std::size_t j = 0; j < data.size(); ++j) {
    out += data.snps[j] + '\t' + data.chrom[j] + '\t' + std::to_string(data.pos[j]) + '\t' +
           text::format_double(data.gamma_hat[j]) + '\t' + text::format_double(data.sigma_x[j]) + '\t' +
           text::format_double(data.Gamma_hat[j]) + '\t' + text::format_double(data.sigma_y[j]) + '\t' +
           text::format_double(data.sel_pval[j]) + '\n';
  }
  return out;
}

void write_summary_set(const std::filesystem::path& path, const SummarySet& data) {
  text::write_file_atomic(path, summary_set_tsv(data));
}

SummarySet read_summary_set(const std::filesystem::path& path) {
  const std::string content = text::read_file(path);
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = text::split(line, '\t');
  static const std::vector<std::string> expected{"rsid",      "chrom",   "pos",      "gamma_hat",
                                                 "sigma_x",   "Gamma_hat", "sigma_y", "sel_pval"};
  if (header != expected) throw InputError(path.string() + ": not a summary-set TSV (bad header)");

  SummarySet data;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = text::split(line, '\t');
    if (f.size() != expected.size()) {
      throw InputError(path.string() + ": wrong field count on line " + std::to_string(line_no));
    }
    auto pos = parse_position(f[2]);
    auto g = text::parse_double(f[3]), sx = text::parse_double(f[4]);
    auto G = text::parse_double(f[5]), sy = text::parse_double(f[6]);
    auto ps = text::parse_double(f[7]);
    if (!pos || !g || !sx || !G || !sy) {
      throw InputError(path.string() + ": malformed value on line " + std::to_string(line_no));
    }
    data.push_back(f[0], f[1], *pos, ps.value_or(1.0), {*g, *sx, *G, *sy});
  }
  data.validate();
  return data;
}

}  // namespace mrraps::gwas
