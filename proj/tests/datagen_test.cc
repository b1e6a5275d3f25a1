#include "qkm/datagen.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gtest/gtest.h"
#include "qkm/error.h"

namespace qkm {
namespace {

std::string Serialize(const Dataset& d) {
  std::ostringstream out;
  WriteDataset(out, d);
  return out.str();
}

TEST(GenerateTest, BalancedSizes) {
  MixtureSpec s;
  s.n = 100;
  s.k = 4;
  s.sigma = 0.05;
  s.seed = 1;
  const Dataset d = Generate(s);
  EXPECT_EQ(d.truth.cluster_sizes, (std::vector<std::size_t>{25, 25, 25, 25}));
  EXPECT_EQ(d.truth.outlier_count(), 0u);
}

TEST(GenerateTest, ImbalancedSizes) {
  MixtureSpec s;
  s.n = 100;
  s.k = 4;
  s.alpha = 2.0;
  s.sigma = 0.05;
  s.seed = 1;
  const Dataset d = Generate(s);
  EXPECT_EQ(*std::min_element(d.truth.cluster_sizes.begin(), d.truth.cluster_sizes.end()),
            13u);
  EXPECT_NEAR(RealizedAlpha(d.truth), 100.0 / 52.0, 1e-12);
  EXPECT_LE(RealizedAlpha(d.truth), 2.0);
}

TEST(GenerateTest, SameSeedSameBytes) {
  MixtureSpec s;
  s.n = 500;
  s.k = 3;
  s.p_o = 0.1;
  s.seed = 17;
  EXPECT_EQ(Serialize(Generate(s)), Serialize(Generate(s)));
  MixtureSpec t = s;
  t.seed = 18;
  EXPECT_NE(Serialize(Generate(s)), Serialize(Generate(t)));
}

TEST(GenerateTest, RealizedAlphaWithinSlack) {
  for (double alpha : {1.0, 1.5, 2.0, 3.0}) {
    for (double p_o : {0.0, 0.2}) {
      MixtureSpec s;
      s.n = 997;
      s.k = 5;
      s.alpha = alpha;
      s.p_o = p_o;
      s.seed = 3;
      const Dataset d = Generate(s);
      const std::size_t s_min = *std::min_element(d.truth.cluster_sizes.begin(),
                                                   d.truth.cluster_sizes.end());
      const double n_t = static_cast<double>(d.points.size() - d.truth.outlier_count());
      EXPECT_LE(n_t / (5.0 * static_cast<double>(s_min)),
                alpha + 5.0 / static_cast<double>(s_min));
    }
  }
}

TEST(GenerateTest, OutliersClearEveryThreshold) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    MixtureSpec s;
    s.n = 2000;
    s.k = 4;
    s.p_o = 0.25;
    s.seed = seed;
    const Dataset d = Generate(s);
    const auto sep = ComputeGamma(d.points, d.truth, 0.1);
    EXPECT_TRUE(sep.violations.empty());
    for (std::size_t i = 0; i < d.points.size(); ++i) {
      if (!d.truth.is_outlier(i)) continue;
      for (std::size_t c = 0; c < 4; ++c) {
        EXPECT_GT(std::sqrt(SquaredDistance(d.points.row(i),
                                            d.truth.true_centers->row(c))),
                  sep.thresholds[c]);
      }
    }
    ASSERT_TRUE(d.truth.beta.has_value());
    EXPECT_GE(*d.truth.beta, 0.1);
  }
}

TEST(GenerateTest, RejectsInfeasibleSpecs) {
  MixtureSpec s;
  s.alpha = 0.5;
  EXPECT_THROW(Generate(s), InvalidArgument);
  s = {};
  s.p_o = 1.0;
  EXPECT_THROW(Generate(s), InvalidArgument);
  s = {};
  s.sigma = 0.0;
  EXPECT_THROW(Generate(s), InvalidArgument);
  s = {};
  s.k = 0;
  EXPECT_THROW(Generate(s), InvalidArgument);
  s = {};
  s.n = 3;
  s.k = 4;
  EXPECT_THROW(Generate(s), InvalidArgument);
}

TEST(DatasetFileTest, RoundTripIsExact) {
  MixtureSpec s;
  s.n = 400;
  s.k = 3;
  s.d = 3;
  s.p_o = 0.1;
  s.seed = 5;
  const Dataset d = Generate(s);
  std::istringstream in(Serialize(d));
  const Dataset back = ReadDataset(in);
  EXPECT_EQ(back.points, d.points);
  EXPECT_EQ(back.truth.labels, d.truth.labels);
  EXPECT_EQ(back.truth.cluster_sizes, d.truth.cluster_sizes);
  EXPECT_EQ(*back.truth.true_centers, *d.truth.true_centers);
  EXPECT_EQ(back.truth.p_o, d.truth.p_o);
  EXPECT_EQ(back.info.seed, 5u);
  EXPECT_EQ(Serialize(back), Serialize(d));
}

TEST(DatasetFileTest, RejectsMalformedInput) {
  std::istringstream empty("");
  EXPECT_THROW(ReadDataset(empty), Error);
  std::istringstream short_rows(
      "{\"version\":1,\"n\":2,\"d\":2,\"K\":1,\"p_o\":0.0,\"seed\":0,"
      "\"prng\":\"x\",\"sigma\":1.0}\n0,0,0\n");
  EXPECT_THROW(ReadDataset(short_rows), Error);
  std::istringstream bad_field(
      "{\"version\":1,\"n\":1,\"d\":2,\"K\":1,\"p_o\":0.0,\"seed\":0,"
      "\"prng\":\"x\",\"sigma\":1.0}\n0,abc,0\n");
  EXPECT_THROW(ReadDataset(bad_field), Error);
}

TEST(GammaMarginTest, SingletonClusters) {
  const PointSet p = PointSet::FromRows({{0, 0}, {10, 0}});
  const GroundTruth t = MakeGroundTruth(p, {0, 1}, 2);
  EXPECT_TRUE(CheckGammaMargin(p, t, 2.0));
}

TEST(GammaMarginTest, BothQuantifierDirections) {
  const PointSet p = PointSet::FromRows({{0, 0}, {1, 0}, {2, 0}});
  const GroundTruth t = MakeGroundTruth(p, {0, 0, 1}, 2);
  EXPECT_TRUE(CheckGammaMargin(p, t, 2.0));
  EXPECT_FALSE(CheckGammaMargin(p, t, 4.0));
}

TEST(GammaMarginTest, SeparatedMixturesUsuallySatisfyMargin) {
  int holds = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    MixtureSpec s;
    s.n = 300;
    s.k = 3;
    s.min_center_separation = 20.0;
    s.seed = seed;
    const Dataset d = Generate(s);
    holds += CheckGammaMargin(d.points, d.truth, 1.5);
  }
  EXPECT_GE(holds, 99);
}

TEST(ComputeGammaTest, HandExample) {
  const PointSet p = PointSet::FromRows({{0, 0}, {2, 0}});
  const GroundTruth t = MakeGroundTruth(p, {0, 0}, 1);
  const auto r = ComputeGamma(p, t, 0.5);
  EXPECT_DOUBLE_EQ(r.gamma, 1.7071067811865475);
  EXPECT_DOUBLE_EQ(ComputeGamma(p, t, 1e-300).gamma, 1.0);
}

TEST(GroundTruthTest, BetaAndMembers) {
  // Cluster {(0,0),(2,0)}: radius 1, phi 2, |C| 2. Outlier at distance 3 has
  // gap 2, so beta = 4 * 2 / 2 = 4.
  const PointSet p = PointSet::FromRows({{0, 0}, {2, 0}, {4, 0}});
  const GroundTruth t = MakeGroundTruth(p, {0, 0, kOutlier}, 1);
  ASSERT_TRUE(t.beta.has_value());
  EXPECT_DOUBLE_EQ(*t.beta, 4.0);
  EXPECT_DOUBLE_EQ(t.p_o, 1.0 / 3.0);
  EXPECT_EQ(t.Members(), (std::vector<std::vector<std::size_t>>{{0, 1}}));
  EXPECT_EQ(t.NonOutliers(), (std::vector<std::size_t>{0, 1}));
  EXPECT_THROW(MakeGroundTruth(p, {0, 0, 0}, 2), InvalidArgument);
}

}  // namespace
}  // namespace qkm
