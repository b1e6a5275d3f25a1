#ifndef QKM_QKM_NOISELESS_H_
#define QKM_QKM_NOISELESS_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "qkm/datagen.h"
#include "qkm/error.h"
#include "qkm/geometry.h"
#include "qkm/oracle.h"
#include "qkm/report.h"
#include "qkm/rng.h"

namespace qkm {

// Clusters discovered by querying. Members are draws, so an index drawn
// twice appears twice in its cluster. representatives[i] is clusters[i][0].
struct ClusterSeeds {
  std::vector<std::vector<std::size_t>> clusters;
  std::vector<std::size_t> representatives;

  std::size_t size() const { return clusters.size(); }
  std::size_t MinClusterSize() const;
};

enum class ProbeOrder { kCreation, kNearestCentroid };

// One sampled point and the oracle queries it cost.
struct DrawEvent {
  int phase = 0;  // 0 for single-phase seeding, else 1 or 2
  std::uint64_t draw = 0;
  std::size_t index = 0;
  std::uint64_t queries = 0;
  int cluster = -1;  // joined or created cluster; -1 when discarded
};

struct SeedConfig {
  std::size_t k = 1;
  double delta = 0.1;
  double eps = 0.1;
  std::uint64_t max_draws = 10'000'000;
  ProbeOrder probe_order = ProbeOrder::kCreation;
  // Called after every draw.
  std::function<void(const DrawEvent&)> on_draw;

  // m = ceil(K / (delta * eps)). Throws InvalidArgument on a bad config.
  std::size_t SamplesPerCluster() const;
  void Validate() const;
};

struct SeedStats {
  std::uint64_t draws = 0;
  std::uint64_t queries = 0;
  // Draws equal to a representative; they join with no query.
  std::uint64_t self_matches = 0;
  // Draws answered DIFFERENT by every representative with no new cluster
  // allowed.
  std::vector<std::size_t> discarded;
};

// Raised when seeding cannot finish: the draw cap was hit, or the oracle
// revealed more clusters than K. Carries the seeds built so far.
class SeedingError : public AlgorithmError {
 public:
  SeedingError(const std::string& what, ClusterSeeds partial, SeedStats stats)
      : AlgorithmError(what),
        partial_(std::move(partial)),
        stats_(std::move(stats)) {}
  const ClusterSeeds& partial() const { return partial_; }
  const SeedStats& stats() const { return stats_; }

 private:
  ClusterSeeds partial_;
  SeedStats stats_;
};

struct SeedResult {
  ClusterSeeds seeds;
  SeedStats stats;
};

// Draws points uniformly with replacement and places each one by querying
// representatives until the first SAME. With allow_new_clusters a point
// rejected by all representatives opens a new cluster, otherwise it is
// discarded. Stops once there are K clusters of at least m members each.
// `seeds` holds the initial clusters and is updated in place. `points` is
// only read for the nearest-centroid probe order.
SeedStats GrowSeeds(OracleSession& session, const PointSet& points,
                    ClusterSeeds& seeds, const SeedConfig& cfg, Rng& rng,
                    bool allow_new_clusters, int phase);

// Algorithm 1 seeding from scratch under a noiseless oracle.
SeedResult Seed(OracleSession& session, const PointSet& points,
                const SeedConfig& cfg, Rng& rng);

// Mean of every seed cluster, in cluster order; gamma unset.
CentroidSet EstimateCenters(const ClusterSeeds& seeds, const PointSet& points);

struct RunOutput {
  CentroidSet centers;
  Assignment assignment;
  ExperimentReport report;
};

// Seed, estimate centers and assign every point to its nearest center.
RunOutput RunNoiseless(OracleSession& session, const Dataset& dataset,
                       const SeedConfig& cfg, Rng& rng);

}  // namespace qkm

#endif  // QKM_QKM_NOISELESS_H_
