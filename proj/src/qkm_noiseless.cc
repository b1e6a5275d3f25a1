#include "qkm/qkm_noiseless.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

#include "qkm/bounds.h"
#include "qkm/metrics.h"

namespace qkm {
namespace {

const char* ProbeOrderName(ProbeOrder order) {
  return order == ProbeOrder::kCreation ? "creation" : "nearest_centroid";
}

}  // namespace

std::size_t ClusterSeeds::MinClusterSize() const {
  std::size_t out = clusters.empty() ? 0 : clusters.front().size();
  for (const auto& c : clusters) out = std::min(out, c.size());
  return out;
}

void SeedConfig::Validate() const {
  if (k == 0) throw InvalidArgument("K must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must be in (0, 1)");
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("eps must be in (0, 1)");
}

std::size_t SeedConfig::SamplesPerCluster() const {
  Validate();
  const double m = static_cast<double>(k) / (delta * eps);
  return std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(m * (1.0 - 1e-12))));
}

SeedStats GrowSeeds(OracleSession& session, const PointSet& points,
                    ClusterSeeds& seeds, const SeedConfig& cfg, Rng& rng,
                    bool allow_new_clusters, int phase) {
  const std::size_t m = cfg.SamplesPerCluster();
  const std::size_t n = session.size();
  if (n == 0) throw InvalidArgument("empty dataset");
  const bool nearest = cfg.probe_order == ProbeOrder::kNearestCentroid;
  if (nearest && points.size() != n) {
    throw InvalidArgument("nearest-centroid probing needs the dataset points");
  }
  if (seeds.representatives.size() != seeds.clusters.size()) {
    throw InvalidArgument("every seed cluster needs a representative");
  }

  std::unordered_map<std::size_t, int> rep_cluster;
  std::size_t below = 0;
  std::vector<std::vector<double>> sums;
  for (std::size_t c = 0; c < seeds.size(); ++c) {
    rep_cluster.emplace(seeds.representatives[c], static_cast<int>(c));
    below += seeds.clusters[c].size() < m;
    if (nearest) {
      sums.emplace_back(points.dim(), 0.0);
      for (std::size_t i : seeds.clusters[c]) {
        for (std::size_t j = 0; j < points.dim(); ++j) sums[c][j] += points.row(i)[j];
      }
    }
  }

  SeedStats stats;
  std::vector<std::size_t> order;
  std::vector<double> dist;
  while (seeds.size() < cfg.k || below > 0) {
    if (stats.draws >= cfg.max_draws) {
      throw SeedingError("max_draws=" + std::to_string(cfg.max_draws) +
                             " exceeded with " + std::to_string(seeds.size()) +
                             " clusters",
                         seeds, stats);
    }
    const std::size_t x = rng.UniformIndex(n);
    ++stats.draws;
    DrawEvent event{phase, stats.draws, x, 0, -1};

    if (auto it = rep_cluster.find(x); it != rep_cluster.end()) {
      event.cluster = it->second;
      ++stats.self_matches;
    } else {
      order.resize(seeds.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      if (nearest) {
        dist.resize(seeds.size());
        const auto px = points.row(x);
        for (std::size_t c = 0; c < seeds.size(); ++c) {
          const double cnt = static_cast<double>(seeds.clusters[c].size());
          double sq = 0.0;
          for (std::size_t j = 0; j < px.size(); ++j) {
            const double t = px[j] - sums[c][j] / cnt;
            sq += t * t;
          }
          dist[c] = sq;
        }
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
          return dist[a] < dist[b];
        });
      }
      for (std::size_t c : order) {
        ++event.queries;
        if (session.Query(seeds.representatives[c], x) == Answer::kSame) {
          event.cluster = static_cast<int>(c);
          break;
        }
      }
      stats.queries += event.queries;
    }

    if (event.cluster >= 0) {
      auto& members = seeds.clusters[event.cluster];
      members.push_back(x);
      if (members.size() == m) --below;
      if (nearest) {
        for (std::size_t j = 0; j < points.dim(); ++j) {
          sums[event.cluster][j] += points.row(x)[j];
        }
      }
    } else if (allow_new_clusters) {
      if (seeds.size() >= cfg.k) {
        if (cfg.on_draw) cfg.on_draw(event);
        throw SeedingError("point " + std::to_string(x) +
                               " differs from all " + std::to_string(cfg.k) +
                               " clusters; the oracle reveals more than K",
                           seeds, stats);
      }
      event.cluster = static_cast<int>(seeds.size());
      seeds.clusters.push_back({x});
      seeds.representatives.push_back(x);
      rep_cluster.emplace(x, event.cluster);
      below += m > 1;
      if (nearest) sums.emplace_back(points.row(x).begin(), points.row(x).end());
    } else {
      stats.discarded.push_back(x);
    }
    if (cfg.on_draw) cfg.on_draw(event);
  }
  return stats;
}

SeedResult Seed(OracleSession& session, const PointSet& points,
                const SeedConfig& cfg, Rng& rng) {
  if (session.noisy()) throw InvalidArgument("seeding needs a noiseless oracle");
  SeedResult out;
  out.stats = GrowSeeds(session, points, out.seeds, cfg, rng, true, 0);
  return out;
}

CentroidSet EstimateCenters(const ClusterSeeds& seeds, const PointSet& points) {
  if (seeds.clusters.empty()) throw InvalidArgument("no seed clusters");
  CentroidSet out{PointSet(points.dim()), std::nullopt};
  for (const auto& c : seeds.clusters) {
    if (c.empty()) throw InvalidArgument("empty seed cluster");
    out.centers.Append(Centroid(points, c));
  }
  return out;
}

RunOutput RunNoiseless(OracleSession& session, const Dataset& dataset,
                       const SeedConfig& cfg, Rng& rng) {
  const std::size_t m = cfg.SamplesPerCluster();
  const double alpha = RealizedAlpha(dataset.truth);
  const std::uint64_t before = session.query_count();

  SeedResult seeded = Seed(session, dataset.points, cfg, rng);
  RunOutput out;
  out.centers = EstimateCenters(seeded.seeds, dataset.points);
  out.assignment = Assign(dataset.points, out.centers);

  ExperimentReport& r = out.report;
  r.algorithm = "noiseless";
  r.config = {{"k", cfg.k},
              {"delta", cfg.delta},
              {"eps", cfg.eps},
              {"m", m},
              {"max_draws", cfg.max_draws},
              {"probe_order", ProbeOrderName(cfg.probe_order)},
              {"n", dataset.points.size()},
              {"alpha_realized", alpha}};
  r.draws = seeded.stats.draws;
  r.queries_total = session.query_count() - before;
  r.distinct_pairs = session.distinct_pair_count();
  r.SetPotentials(InlierPotential(dataset.points, dataset.truth, out.centers.centers),
                  ReferencePotential(dataset.points, dataset.truth));
  r.misclassification_ratio = MisclassificationRatio(
      dataset.truth.labels, out.assignment.labels,
      std::max(cfg.k, dataset.truth.num_clusters()));
  const double dixie = bounds::DixieBound(alpha, cfg.k, m);
  r.bound_values["dixie_draws"] = dixie;
  r.bound_values["dixie_queries"] = static_cast<double>(cfg.k) * dixie;
  r.extras["self_matches"] = static_cast<double>(seeded.stats.self_matches);
  r.success = r.potential_ratio ? *r.potential_ratio <= 1.0 + cfg.eps
                                : r.potential_achieved == 0.0;
  return out;
}

}  // namespace qkm
