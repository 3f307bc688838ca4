#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "mrraps/error.hpp"
#include "mrraps/gwas_io.hpp"
#include "oracles.hpp"

using namespace mrraps;
namespace fs = std::filesystem;

namespace {

fs::path write(const fs::path& dir, const std::string& name, const std::string& body) {
  const fs::path p = dir / name;
  std::ofstream(p) << body;
  return p;
}

const char* kHeader = "SNP\tCHR\tBP\tA1\tA2\tBETA\tSE\tP\n";

SnpRecord rec(std::string id, char ea, char oa, double beta, std::string chrom = "1", std::int64_t pos = 1,
              double p = 0.5) {
  SnpRecord r;
  r.rsid = std::move(id);
  r.chrom = std::move(chrom);
  r.pos = pos;
  r.effect_allele = ea;
  r.other_allele = oa;
  r.beta = beta;
  r.se = 0.01;
  r.pval = p;
  return r;
}

class GwasFiles : public ::testing::Test {
 protected:
  void SetUp() override { dir = oracle::scratch_dir("gwas"); }
  void TearDown() override { fs::remove_all(dir); }
  fs::path dir;
};

}  // namespace

TEST_F(GwasFiles, WellFormedRowsParse) {
  const auto p = write(dir, "a.tsv", std::string(kHeader) +
                                         "rs1\t1\t100\tA\tG\t0.1\t0.01\t1e-5\n"
                                         "rs2\t2\t200\tC\tT\t-0.2\t0.02\t0.3\n"
                                         "rs3\tX\t300\tG\tA\t0.05\t0.03\t1\n");
  const auto r = gwas::parse_summary_file(p);
  ASSERT_EQ(r.records.size(), 3u);
  EXPECT_EQ(r.skipped, 0u);
  EXPECT_EQ(r.delimiter, '\t');
  EXPECT_EQ(r.records[1].rsid, "rs2");
  EXPECT_EQ(r.records[1].effect_allele, 'C');
  EXPECT_DOUBLE_EQ(r.records[1].beta, -0.2);
  EXPECT_EQ(r.records[2].chrom, "X");
}

TEST_F(GwasFiles, MissingSeIsSkippedAndCounted) {
  const auto p = write(dir, "a.tsv", std::string(kHeader) +
                                         "rs1\t1\t100\tA\tG\t0.1\t0.01\t1e-5\n"
                                         "rs2\t1\t200\tA\tG\t0.1\tNA\t1e-5\n");
  const auto r = gwas::parse_summary_file(p);
  EXPECT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.skipped, 1u);
}

TEST_F(GwasFiles, InvariantViolationsAreSkipped) {
  const auto p = write(dir, "a.tsv", std::string(kHeader) +
                                         "rs1\t1\t100\tA\tG\t0.1\t0.01\t1e-5\n"
                                         "rs2\t1\t200\tA\tG\t0.1\t0\t1e-5\n"     // se = 0
                                         "rs3\t1\t300\tA\tA\t0.1\t0.01\t1e-5\n"  // equal alleles
                                         "rs4\t1\t400\tA\tG\t0.1\t0.01\t1.5\n"   // p > 1
                                         "rs5\t1\t500\tN\tG\t0.1\t0.01\t0.5\n");  // not ACGT
  const auto r = gwas::parse_summary_file(p);
  EXPECT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.skipped, 4u);
}

TEST_F(GwasFiles, CommaDelimiterAndCustomHeaders) {
  const auto p = write(dir, "a.csv",
                       "id,chr,position,ea,oa,b,s\n"
                       "rs1,1,100,a,g,0.1,0.02\n");
  gwas::ColumnMap m;
  m.columns = {{gwas::Role::rsid, "id"}, {gwas::Role::chrom, "chr"}, {gwas::Role::pos, "position"},
               {gwas::Role::effect_allele, "ea"}, {gwas::Role::other_allele, "oa"}, {gwas::Role::beta, "b"},
               {gwas::Role::se, "s"}};
  const auto r = gwas::parse_summary_file(p, m);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.delimiter, ',');
  EXPECT_EQ(r.records[0].effect_allele, 'A');
  // p-value derived from the Wald statistic when the column is absent
  EXPECT_NEAR(r.records[0].pval, std::erfc(5.0 / std::sqrt(2.0)), 1e-15);
}

TEST_F(GwasFiles, ErrorsNameTheProblem) {
  EXPECT_THROW(gwas::parse_summary_file(dir / "absent.tsv"), InputError);
  const auto p = write(dir, "a.tsv", "SNP\tCHR\tBP\tA1\tA2\tBETA\tP\nrs1\t1\t1\tA\tG\t0.1\t0.5\n");
  try {
    gwas::parse_summary_file(p);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("'SE'"), std::string::npos) << e.what();
  }
  const auto q = write(dir, "b.tsv", std::string(kHeader) + "rs1\t1\t1\tA\tG\tNA\t0.1\t0.5\n");
  EXPECT_THROW(gwas::parse_summary_file(q), InputError);
}

TEST(Harmonize, SameAllelesLeaveEffectsUnchanged) {
  const auto h = gwas::harmonize({rec("rs1", 'A', 'G', 0.3)}, {rec("rs1", 'A', 'G', 0.2)},
                                 {rec("rs1", 'A', 'G', 0.1)});
  ASSERT_EQ(h.data.size(), 1u);
  EXPECT_DOUBLE_EQ(h.data.gamma_hat[0], 0.2);
  EXPECT_DOUBLE_EQ(h.data.Gamma_hat[0], 0.1);
  EXPECT_DOUBLE_EQ(h.data.sel_pval[0], 0.5);
}

TEST(Harmonize, SwappedOutcomeAllelesFlipTheSign) {
  const auto h = gwas::harmonize({rec("rs1", 'A', 'G', 0.3)}, {rec("rs1", 'A', 'G', 0.2)},
                                 {rec("rs1", 'G', 'A', 0.1)});
  ASSERT_EQ(h.data.size(), 1u);
  EXPECT_DOUBLE_EQ(h.data.Gamma_hat[0], -0.1);
}

TEST(Harmonize, ComplementStrandIsResolved) {
  // exposure A/G; outcome reported on the other strand as T/C (same allele) and C/T (swapped)
  const auto h = gwas::harmonize({rec("rs1", 'A', 'G', 0.3), rec("rs2", 'A', 'G', 0.3)},
                                 {rec("rs1", 'A', 'G', 0.2), rec("rs2", 'A', 'G', 0.2)},
                                 {rec("rs1", 'T', 'C', 0.1), rec("rs2", 'C', 'T', 0.1)});
  ASSERT_EQ(h.data.size(), 2u);
  EXPECT_DOUBLE_EQ(h.data.Gamma_hat[0], 0.1);
  EXPECT_DOUBLE_EQ(h.data.Gamma_hat[1], -0.1);
}

TEST(Harmonize, PalindromicSnpsAreDroppedByDefault) {
  const std::vector<SnpRecord> s{rec("rs1", 'A', 'T', 0.3), rec("rs2", 'A', 'G', 0.3)};
  const std::vector<SnpRecord> e{rec("rs1", 'A', 'T', 0.2), rec("rs2", 'A', 'G', 0.2)};
  const std::vector<SnpRecord> o{rec("rs1", 'A', 'T', 0.1), rec("rs2", 'A', 'G', 0.1)};
  const auto h = gwas::harmonize(s, e, o);
  ASSERT_EQ(h.data.size(), 1u);
  EXPECT_EQ(h.data.snps[0], "rs2");
  EXPECT_EQ(h.dropped_palindromic, 1u);
  EXPECT_EQ(gwas::harmonize(s, e, o, false).data.size(), 2u);
}

TEST(Harmonize, MismatchedAndUnmatchedSnpsAreDropped) {
  const auto h = gwas::harmonize({rec("rs1", 'A', 'G', 0.3), rec("rs2", 'A', 'G', 0.3), rec("rs3", 'A', 'G', 0.3)},
                                 {rec("rs1", 'A', 'G', 0.2), rec("rs2", 'A', 'G', 0.2), rec("rs3", 'A', 'G', 0.2)},
                                 {rec("rs1", 'A', 'C', 0.1), rec("rs3", 'A', 'G', 0.1)});
  ASSERT_EQ(h.data.size(), 1u);
  EXPECT_EQ(h.data.snps[0], "rs3");
  EXPECT_EQ(h.dropped_allele_mismatch, 1u);
  EXPECT_EQ(h.dropped_unmatched, 1u);
  EXPECT_THROW(gwas::harmonize({rec("rs1", 'A', 'G', 0.3)}, {rec("rs2", 'A', 'G', 0.2)},
                               {rec("rs1", 'A', 'G', 0.1)}),
               InputError);
}

TEST(Harmonize, DoubleAlleleFlipIsIdentity) {
  std::mt19937_64 eng(11);
  std::normal_distribution<double> n;
  const char pairs[][2] = {{'A', 'G'}, {'C', 'T'}, {'G', 'T'}, {'A', 'C'}};
  std::vector<SnpRecord> s, e, o;
  for (int j = 0; j < 40; ++j) {
    const auto& pr = pairs[j % 4];
    const std::string id = "rs" + std::to_string(j);
    s.push_back(rec(id, pr[0], pr[1], n(eng)));
    e.push_back(rec(id, pr[0], pr[1], n(eng)));
    o.push_back(rec(id, pr[0], pr[1], n(eng)));
  }
  auto flip = [](std::vector<SnpRecord> v) {
    for (auto& r : v) {
      std::swap(r.effect_allele, r.other_allele);
      r.beta = -r.beta;
    }
    return v;
  };
  const auto base = gwas::harmonize(s, e, o);
  const auto twice = gwas::harmonize(flip(flip(s)), flip(flip(e)), flip(flip(o)));
  EXPECT_EQ(base.data.gamma_hat, twice.data.gamma_hat);
  EXPECT_EQ(base.data.Gamma_hat, twice.data.Gamma_hat);
  // flipping only the outcome and selection files must not change anything either
  const auto partial = gwas::harmonize(flip(s), e, flip(o));
  EXPECT_EQ(base.data.gamma_hat, partial.data.gamma_hat);
  EXPECT_EQ(base.data.Gamma_hat, partial.data.Gamma_hat);
}

namespace {

SummarySet snp_table(const std::vector<std::tuple<std::string, std::string, std::int64_t, double>>& rows) {
  SummarySet s;
  for (const auto& [id, chr, pos, p] : rows) s.push_back(id, chr, pos, p, {0.1, 0.01, 0.02, 0.01});
  return s;
}

}  // namespace

TEST(SelectInstruments, CloseSnpsKeepTheSmallerP) {
  const auto s = snp_table({{"rs1", "1", 10'000'000, 1e-9}, {"rs2", "1", 15'000'000, 1e-12}});
  const auto out = gwas::select_instruments(s, 0.0, 1.0, 10'000'000);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out.snps[0], "rs2");
}

TEST(SelectInstruments, DifferentChromosomesAreIndependent) {
  const auto s = snp_table({{"rs1", "1", 10'000'000, 1e-9}, {"rs2", "2", 10'000'000, 1e-12}});
  EXPECT_EQ(gwas::select_instruments(s, 0.0, 1.0, 10'000'000).size(), 2u);
}

TEST(SelectInstruments, PValueWindowIsHalfOpen) {
  const auto s = snp_table({{"rs1", "1", 0, 1e-9}, {"rs2", "2", 0, 1e-4}, {"rs3", "3", 0, 0.5}});
  const auto out = gwas::select_instruments(s, 1e-9, 1e-4, 0);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out.snps[0], "rs2");
  EXPECT_THROW(gwas::select_instruments(s, 0.6, 1.0, 0), InputError);
}

TEST(SelectInstruments, IndependentOfRowOrderWithRsidTieBreak) {
  std::vector<std::tuple<std::string, std::string, std::int64_t, double>> rows;
  std::mt19937_64 eng(5);
  std::uniform_int_distribution<std::int64_t> pos(0, 100'000'000);
  std::uniform_int_distribution<int> chr(1, 3), pbin(1, 4);
  for (int j = 0; j < 200; ++j) {
    // coarse p-values so that ties are common
    rows.emplace_back("rs" + std::to_string(1000 + j), std::to_string(chr(eng)), pos(eng), std::pow(10.0, -pbin(eng)));
  }
  const auto ref = gwas::select_instruments(snp_table(rows), 0.0, 1.0, 5'000'000);
  for (int k = 0; k < 5; ++k) {
    std::shuffle(rows.begin(), rows.end(), eng);
    const auto out = gwas::select_instruments(snp_table(rows), 0.0, 1.0, 5'000'000);
    EXPECT_EQ(out.snps, ref.snps);
  }
  // ties resolved lexicographically: among equal p-values the smaller rsid comes first
  for (std::size_t i = 0; i + 1 < ref.size(); ++i) {
    if (ref.sel_pval[i] == ref.sel_pval[i + 1]) EXPECT_LT(ref.snps[i], ref.snps[i + 1]);
    EXPECT_LE(ref.sel_pval[i], ref.sel_pval[i + 1]);
  }
}

TEST_F(GwasFiles, SummarySetTsvRoundTrips) {
  SummarySet s;
  s.push_back("rs1", "1", 12, 1e-300, {0.1, 0.01, -0.3, 0.02});
  s.push_back("rs2", "X", 34, 0.5, {-1.0 / 3.0, 0.07, 2.0 / 7.0, 0.011});
  const fs::path p = dir / "set.tsv";
  gwas::write_summary_set(p, s);
  const SummarySet back = gwas::read_summary_set(p);
  EXPECT_EQ(back.snps, s.snps);
  EXPECT_EQ(back.chrom, s.chrom);
  EXPECT_EQ(back.pos, s.pos);
  EXPECT_EQ(back.sel_pval, s.sel_pval);
  EXPECT_EQ(back.gamma_hat, s.gamma_hat);
  EXPECT_EQ(back.sigma_x, s.sigma_x);
  EXPECT_EQ(back.Gamma_hat, s.Gamma_hat);
  EXPECT_EQ(back.sigma_y, s.sigma_y);
  std::ifstream in(p);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "rsid\tchrom\tpos\tgamma_hat\tsigma_x\tGamma_hat\tsigma_y\tsel_pval");
}

TEST(SummarySetTest, ValidateRejectsBrokenSets) {
  SummarySet s;
  EXPECT_THROW(s.validate(), InputError);
  s.push_back("rs1", "1", 1, 0.5, {0.1, 0.01, 0.2, 0.01});
  EXPECT_NO_THROW(s.validate());
  s.push_back("rs1", "1", 2, 0.5, {0.1, 0.01, 0.2, 0.01});
  EXPECT_THROW(s.validate(), InputError);
  s.snps[1] = "rs2";
  s.sigma_y[1] = 0.0;
  EXPECT_THROW(s.validate(), InputError);
}

TEST(Alleles, ComplementAndPalindrome) {
  EXPECT_EQ(gwas::complement('A'), 'T');
  EXPECT_EQ(gwas::complement('C'), 'G');
  EXPECT_TRUE(gwas::is_palindromic('A', 'T'));
  EXPECT_TRUE(gwas::is_palindromic('G', 'C'));
  EXPECT_FALSE(gwas::is_palindromic('A', 'G'));
}
