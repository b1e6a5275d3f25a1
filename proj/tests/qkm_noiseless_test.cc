#include "qkm/qkm_noiseless.h"

#include <algorithm>
#include <set>
#include <vector>

#include "gtest/gtest.h"
#include "qkm/datagen.h"
#include "qkm/error.h"
#include "qkm/metrics.h"
#include "qkm/rng.h"

namespace qkm {
namespace {

Dataset Mixture(std::size_t n, std::size_t k, std::uint64_t seed,
                double separation = 10.0, double alpha = 1.0) {
  MixtureSpec s;
  s.n = n;
  s.k = k;
  s.alpha = alpha;
  s.min_center_separation = separation;
  s.center_spread = 300.0;
  s.seed = seed;
  return Generate(s);
}

SeedConfig Config(std::size_t k, double delta, double eps) {
  SeedConfig c;
  c.k = k;
  c.delta = delta;
  c.eps = eps;
  return c;
}

TEST(SeedConfigTest, SamplesPerCluster) {
  EXPECT_EQ(Config(2, 0.5, 0.5).SamplesPerCluster(), 8u);
  EXPECT_EQ(Config(5, 0.1, 0.1).SamplesPerCluster(), 500u);
  EXPECT_EQ(Config(3, 0.2, 0.3).SamplesPerCluster(), 50u);
  EXPECT_THROW(Config(0, 0.1, 0.1).Validate(), InvalidArgument);
  EXPECT_THROW(Config(2, 1.0, 0.1).Validate(), InvalidArgument);
  EXPECT_THROW(Config(2, 0.1, 0.0).Validate(), InvalidArgument);
}

TEST(SeedTest, SingleClusterCostsOneQueryPerNewDraw) {
  const Dataset d = Mixture(300, 1, 1);
  OracleSession s(d.truth, {});
  Rng rng(2);
  std::uint64_t accepted = 0;
  SeedConfig cfg = Config(1, 0.2, 0.2);
  cfg.on_draw = [&](const DrawEvent& e) {
    EXPECT_EQ(e.cluster, 0);
    EXPECT_LE(e.queries, 1u);
    ++accepted;
  };
  const auto r = Seed(s, d.points, cfg, rng);
  EXPECT_EQ(accepted, r.stats.draws);
  EXPECT_EQ(r.stats.queries, r.stats.draws - 1 - r.stats.self_matches);
  EXPECT_EQ(s.query_count(), r.stats.queries);
  EXPECT_EQ(r.seeds.clusters[0].size(), r.stats.draws);
}

TEST(SeedTest, TwoBalancedClustersArePure) {
  const Dataset d = Mixture(400, 2, 3);
  for (std::uint64_t t = 0; t < 20; ++t) {
    OracleSession s(d.truth, {});
    Rng rng(t);
    const auto r = Seed(s, d.points, Config(2, 0.5, 0.5), rng);
    ASSERT_EQ(r.seeds.size(), 2u);
    std::set<int> labels;
    for (const auto& c : r.seeds.clusters) {
      EXPECT_GE(c.size(), 8u);
      for (std::size_t i : c) EXPECT_EQ(d.truth.labels[i], d.truth.labels[c[0]]);
      labels.insert(d.truth.labels[c[0]]);
    }
    EXPECT_EQ(labels.size(), 2u);
  }
}

TEST(SeedTest, PerDrawQueriesAndClusterCount) {
  const Dataset d = Mixture(2000, 6, 4, 10.0, 2.0);
  for (ProbeOrder order : {ProbeOrder::kCreation, ProbeOrder::kNearestCentroid}) {
    for (std::uint64_t t = 0; t < 10; ++t) {
      OracleSession s(d.truth, {});
      Rng rng(100 + t);
      SeedConfig cfg = Config(6, 0.3, 0.3);
      cfg.probe_order = order;
      std::set<int> labels_drawn;
      std::uint64_t sum = 0;
      cfg.on_draw = [&](const DrawEvent& e) {
        EXPECT_LE(e.queries, 6u);
        sum += e.queries;
        labels_drawn.insert(d.truth.labels[e.index]);
      };
      const auto r = Seed(s, d.points, cfg, rng);
      EXPECT_EQ(r.seeds.size(), labels_drawn.size());
      EXPECT_EQ(sum, s.query_count());
      EXPECT_EQ(r.stats.queries, s.query_count());
      for (const auto& c : r.seeds.clusters) {
        for (std::size_t i : c) ASSERT_EQ(d.truth.labels[i], d.truth.labels[c[0]]);
      }
    }
  }
}

TEST(SeedTest, InterleavedResetsDoNotChangeOutput) {
  const Dataset d = Mixture(1000, 3, 5);
  SeedConfig cfg = Config(3, 0.2, 0.2);
  OracleSession plain(d.truth, {});
  Rng rng_a(9);
  const auto a = Seed(plain, d.points, cfg, rng_a);

  OracleSession reset(d.truth, {});
  cfg.on_draw = [&](const DrawEvent& e) {
    if (e.draw % 7 == 0) reset.ResetCounters();
  };
  Rng rng_b(9);
  const auto b = Seed(reset, d.points, cfg, rng_b);
  EXPECT_EQ(a.seeds.clusters, b.seeds.clusters);
  EXPECT_EQ(a.stats.queries, b.stats.queries);
}

TEST(SeedTest, MoreThanKClustersIsAnError) {
  const Dataset d = Mixture(600, 3, 6);
  OracleSession s(d.truth, {});
  Rng rng(1);
  try {
    Seed(s, d.points, Config(2, 0.2, 0.2), rng);
    FAIL() << "expected SeedingError";
  } catch (const SeedingError& e) {
    EXPECT_EQ(e.partial().size(), 2u);
  }
}

TEST(SeedTest, DrawCapIsAnError) {
  const Dataset d = Mixture(600, 3, 6);
  OracleSession s(d.truth, {});
  Rng rng(1);
  SeedConfig cfg = Config(3, 0.1, 0.1);
  cfg.max_draws = 50;
  try {
    Seed(s, d.points, cfg, rng);
    FAIL() << "expected SeedingError";
  } catch (const SeedingError& e) {
    EXPECT_EQ(e.stats().draws, 50u);
  }
}

TEST(SeedTest, RejectsNoisyOracle) {
  const Dataset d = Mixture(100, 2, 1);
  OracleSession s(d.truth, {OracleMode::kNoisy, 0.1, 1});
  Rng rng(1);
  EXPECT_THROW(Seed(s, d.points, Config(2, 0.5, 0.5), rng), InvalidArgument);
}

TEST(EstimateCentersTest, Examples) {
  const Dataset d = Mixture(200, 2, 7);
  ClusterSeeds one;
  one.clusters = {{5}};
  one.representatives = {5};
  const auto c1 = EstimateCenters(one, d.points);
  EXPECT_EQ(c1.centers.row(0)[0], d.points.row(5)[0]);
  EXPECT_FALSE(c1.gamma.has_value());

  ClusterSeeds full;
  const auto members = d.truth.Members();
  full.clusters = members;
  full.representatives = {members[0][0], members[1][0]};
  EXPECT_EQ(EstimateCenters(full, d.points).centers, *d.truth.true_centers);
  EXPECT_THROW(EstimateCenters(ClusterSeeds{}, d.points), InvalidArgument);
}

TEST(EstimateCentersTest, RandomSeedsMeetCentroidFactor) {
  const Dataset d = Mixture(500, 1, 8);
  const PointSet& pts = d.points;
  const double phi_star = Potential(pts, *d.truth.true_centers);
  const double delta = 0.2;
  const std::size_t m = 10;
  Rng rng(3);
  int good = 0;
  for (int t = 0; t < 1000; ++t) {
    ClusterSeeds s;
    s.clusters.emplace_back();
    for (std::size_t j = 0; j < m; ++j) s.clusters[0].push_back(rng.UniformIndex(500));
    s.representatives = {s.clusters[0][0]};
    const double phi = Potential(pts, EstimateCenters(s, pts).centers);
    good += phi <= (1.0 + 1.0 / (delta * m)) * phi_star;
  }
  EXPECT_GE(good, 800);
}

TEST(RunNoiselessTest, SeparatedDataIsClassifiedExactly) {
  const Dataset d = Mixture(1000, 3, 9, 30.0);
  int exact = 0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    OracleSession s(d.truth, {});
    Rng rng(t);
    const auto out = RunNoiseless(s, d, Config(3, 0.2, 0.2), rng);
    exact += out.report.misclassification_ratio == 0.0;
    EXPECT_EQ(out.report.queries_total, s.query_count());
  }
  EXPECT_GE(exact, 95);
}

TEST(RunNoiselessTest, PotentialWithinOnePlusEps) {
  const Dataset d = Mixture(1000, 3, 9, 30.0);
  int good = 0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    OracleSession s(d.truth, {});
    Rng rng(1000 + t);
    const auto out = RunNoiseless(s, d, Config(3, 0.1, 0.1), rng);
    good += *out.report.potential_ratio <= 1.1;
    EXPECT_EQ(out.report.success, *out.report.potential_ratio <= 1.1);
  }
  EXPECT_GE(good, 90);
}

TEST(RunNoiselessTest, ReportFields) {
  const Dataset d = Mixture(500, 2, 10);
  OracleSession s(d.truth, {});
  Rng rng(1);
  const auto out = RunNoiseless(s, d, Config(2, 0.2, 0.2), rng);
  const auto& r = out.report;
  EXPECT_EQ(r.algorithm, "noiseless");
  EXPECT_EQ(r.config["m"], 50);
  EXPECT_DOUBLE_EQ(r.bound_values.at("dixie_queries"), 2.0 * r.bound_values.at("dixie_draws"));
  EXPECT_EQ(r.potential_reference_kind, "ground_truth_partition");
  EXPECT_GT(r.draws, 100u);
  EXPECT_EQ(out.assignment.labels.size(), 500u);
}

TEST(RunNoiselessTest, LargerSamplesDoNotRaiseMedianPotential) {
  const Dataset d = Mixture(1000, 2, 11, 6.0);
  auto median = [&](double eps) {
    std::vector<double> phi;
    for (std::uint64_t t = 0; t < 200; ++t) {
      OracleSession s(d.truth, {});
      Rng rng(t);
      phi.push_back(RunNoiseless(s, d, Config(2, 0.5, eps), rng).report.potential_achieved);
    }
    std::nth_element(phi.begin(), phi.begin() + 100, phi.end());
    return phi[100];
  };
  const double m8 = median(0.5), m16 = median(0.25), m32 = median(0.125);
  EXPECT_LE(m16, m8);
  EXPECT_LE(m32, m16);
}

}  // namespace
}  // namespace qkm
