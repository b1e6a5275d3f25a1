#include "qkm/qkm_outlier.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

#include "qkm/bounds.h"
#include "qkm/metrics.h"

namespace qkm {

PairSeedState Phase1PairSeed(
    OracleSession& session, std::size_t k, std::uint64_t max_draws, Rng& rng,
    const std::function<void(const DrawEvent&)>& on_draw) {
  if (session.noisy()) throw InvalidArgument("pair seeding needs a noiseless oracle");
  if (k == 0) throw InvalidArgument("K must be >= 1");
  const std::size_t n = session.size();
  if (n == 0) throw InvalidArgument("empty dataset");

  PairSeedState state;
  std::unordered_map<std::size_t, std::size_t> placed;  // index -> proto id
  std::vector<std::size_t> paired, singles;              // proto ids
  auto partial = [&] {
    ClusterSeeds s;
    for (const auto& c : state.proto_clusters) {
      s.clusters.push_back(c);
      s.representatives.push_back(c.front());
    }
    SeedStats st;
    st.draws = state.draws;
    st.queries = state.queries;
    return std::pair(s, st);
  };

  while (state.paired_count < k) {
    if (state.draws >= max_draws) {
      auto [s, st] = partial();
      throw SeedingError("max_draws=" + std::to_string(max_draws) +
                             " exceeded in pair seeding with " +
                             std::to_string(state.paired_count) + " pairs",
                         std::move(s), std::move(st));
    }
    const std::size_t x = rng.UniformIndex(n);
    ++state.draws;
    DrawEvent event{1, state.draws, x, 0, -1};
    if (auto it = placed.find(x); it != placed.end()) {
      ++state.repeat_draws;
      event.cluster = static_cast<int>(it->second);
      if (on_draw) on_draw(event);
      continue;
    }
    std::optional<std::size_t> hit;
    for (const auto* group : {&paired, &singles}) {
      for (std::size_t id : *group) {
        ++event.queries;
        if (session.Query(state.proto_clusters[id].front(), x) == Answer::kSame) {
          hit = id;
          break;
        }
      }
      if (hit) break;
    }
    state.queries += event.queries;
    if (hit) {
      auto& members = state.proto_clusters[*hit];
      members.push_back(x);
      if (members.size() == 2) {
        ++state.paired_count;
        singles.erase(std::find(singles.begin(), singles.end(), *hit));
        paired.insert(std::upper_bound(paired.begin(), paired.end(), *hit), *hit);
      }
      event.cluster = static_cast<int>(*hit);
    } else {
      event.cluster = static_cast<int>(state.proto_clusters.size());
      singles.push_back(state.proto_clusters.size());
      state.proto_clusters.push_back({x});
    }
    placed.emplace(x, static_cast<std::size_t>(event.cluster));
    if (on_draw) on_draw(event);
  }

  std::vector<std::vector<std::size_t>> kept;
  for (auto& c : state.proto_clusters) {
    if (c.size() >= 2) {
      kept.push_back(std::move(c));
    } else {
      state.discarded.push_back(c.front());
    }
  }
  state.proto_clusters = std::move(kept);
  return state;
}

SeedResult Phase2FilteredSeed(OracleSession& session, const PointSet& points,
                              const PairSeedState& pairs, const SeedConfig& cfg,
                              Rng& rng) {
  if (pairs.proto_clusters.size() != cfg.k) {
    throw InvalidArgument("phase 2 needs exactly K seed clusters");
  }
  SeedResult out;
  for (const auto& c : pairs.proto_clusters) {
    if (c.empty()) throw InvalidArgument("empty seed cluster");
    out.seeds.clusters.push_back(c);
    out.seeds.representatives.push_back(c.front());
  }
  out.stats = GrowSeeds(session, points, out.seeds, cfg, rng, false, 2);
  return out;
}

double EstimateGamma(const PointSet& points, const ClusterSeeds& seeds,
                     const PointSet& centers, double eps) {
  if (seeds.size() != centers.size()) {
    throw InvalidArgument("one center per seed cluster required");
  }
  double gamma = 0.0;
  for (std::size_t c = 0; c < seeds.size(); ++c) {
    double radius = 0.0, phi = 0.0;
    for (std::size_t i : seeds.clusters[c]) {
      const double sq = SquaredDistance(points.row(i), centers.row(c));
      radius = std::max(radius, std::sqrt(sq));
      phi += sq;
    }
    const double size = static_cast<double>(seeds.clusters[c].size());
    gamma = std::max(gamma, radius + std::sqrt(eps * phi / size));
  }
  return gamma;
}

RunOutput RunOutlier(OracleSession& session, const Dataset& dataset,
                     const SeedConfig& cfg, Rng& rng,
                     const OutlierRunOptions& options) {
  const std::size_t m = cfg.SamplesPerCluster();
  const GroundTruth& truth = dataset.truth;
  if (truth.beta && cfg.eps > *truth.beta * *truth.beta) {
    throw InvalidArgument("eps must be <= beta^2 for this dataset (beta=" +
                          std::to_string(*truth.beta) + ")");
  }
  if (options.gamma && !(*options.gamma >= 0.0)) {
    throw InvalidArgument("gamma must be nonnegative");
  }
  const std::uint64_t before = session.query_count();

  const PairSeedState pairs =
      Phase1PairSeed(session, cfg.k, cfg.max_draws, rng, cfg.on_draw);
  const std::uint64_t after_phase1 = session.query_count();
  SeedConfig phase2_cfg = cfg;
  phase2_cfg.max_draws = cfg.max_draws - std::min(cfg.max_draws, pairs.draws);
  SeedResult grown = Phase2FilteredSeed(session, dataset.points, pairs, phase2_cfg, rng);

  RunOutput out;
  out.centers = EstimateCenters(grown.seeds, dataset.points);
  const double gamma =
      options.gamma ? *options.gamma
                    : EstimateGamma(dataset.points, grown.seeds,
                                    out.centers.centers, cfg.eps);
  out.centers.gamma = gamma;
  out.assignment = Assign(dataset.points, out.centers);
  for (std::size_t c = 0; c < grown.seeds.size(); ++c) {
    for (std::size_t i : grown.seeds.clusters[c]) {
      out.assignment.labels[i] = static_cast<int>(c);
    }
  }
  for (std::size_t i : pairs.discarded) out.assignment.labels[i] = kOutlier;
  for (std::size_t i : grown.stats.discarded) out.assignment.labels[i] = kOutlier;

  const double alpha = RealizedAlpha(truth);
  ExperimentReport& r = out.report;
  r.algorithm = "outlier";
  r.config = {{"k", cfg.k},
              {"delta", cfg.delta},
              {"eps", cfg.eps},
              {"m", m},
              {"max_draws", cfg.max_draws},
              {"gamma_mode", options.gamma ? "fixed" : "auto"},
              {"n", dataset.points.size()},
              {"alpha_realized", alpha},
              {"p_o", truth.p_o}};
  r.draws = pairs.draws + grown.stats.draws;
  r.queries_phase1 = after_phase1 - before;
  r.queries_phase2 = session.query_count() - after_phase1;
  r.queries_total = *r.queries_phase1 + *r.queries_phase2;
  r.distinct_pairs = session.distinct_pair_count();
  r.gamma = gamma;
  r.SetPotentials(InlierPotential(dataset.points, truth, out.centers.centers),
                  ReferencePotential(dataset.points, truth));
  r.misclassification_ratio = MisclassificationRatio(
      truth.labels, out.assignment.labels, std::max(cfg.k, truth.num_clusters()));
  const OutlierScores scores = ScoreOutliers(truth.labels, out.assignment.labels);
  r.outlier_precision = scores.precision;
  r.outlier_recall = scores.recall;
  const bounds::QkmwolBound b =
      bounds::ThmQkmwol(alpha, cfg.k, cfg.delta, cfg.eps, truth.p_o);
  r.bound_values["qkmwol_phase1"] = b.phase1();
  r.bound_values["qkmwol_phase2"] = b.phase2();
  r.bound_values["qkmwol_total"] = b.total();
  r.extras["phase1_draws"] = static_cast<double>(pairs.draws);
  r.extras["phase2_draws"] = static_cast<double>(grown.stats.draws);
  r.extras["phase1_discarded"] = static_cast<double>(pairs.discarded.size());
  r.extras["phase2_discarded"] = static_cast<double>(grown.stats.discarded.size());
  r.extras["self_matches"] = static_cast<double>(grown.stats.self_matches);
  r.success = (r.potential_ratio ? *r.potential_ratio <= 1.0 + cfg.eps
                                 : r.potential_achieved == 0.0) &&
              scores.precision == 1.0 && scores.recall == 1.0;
  return out;
}

}  // namespace qkm
