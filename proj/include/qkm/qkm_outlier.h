#ifndef QKM_QKM_OUTLIER_H_
#define QKM_QKM_OUTLIER_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "qkm/qkm_noiseless.h"

namespace qkm {

// Proto-clusters built by pair seeding. Members are distinct indices.
struct PairSeedState {
  std::vector<std::vector<std::size_t>> proto_clusters;
  std::size_t paired_count = 0;
  std::uint64_t draws = 0;
  std::uint64_t queries = 0;
  // Draws that hit an index already placed; they cost no query.
  std::uint64_t repeat_draws = 0;
  // Singletons removed at the end of the phase.
  std::vector<std::size_t> discarded;
};

// Phase 1: draw with replacement and query each new index against the first
// member of every proto-cluster (paired ones first, then singletons, each in
// creation order) until K proto-clusters hold two members. Singletons are
// then discarded, leaving the K pairs in creation order. Throws SeedingError
// when max_draws is exceeded.
PairSeedState Phase1PairSeed(
    OracleSession& session, std::size_t k, std::uint64_t max_draws, Rng& rng,
    const std::function<void(const DrawEvent&)>& on_draw = {});

// Phase 2: grow the K pairs to m members each, querying every draw against
// the K representatives and dropping draws that match none.
SeedResult Phase2FilteredSeed(OracleSession& session, const PointSet& points,
                              const PairSeedState& pairs, const SeedConfig& cfg,
                              Rng& rng);

// max_i [max_{x in S_i} ||x - c_i|| + sqrt(eps phi(S_i; c_i) / |S_i|)].
double EstimateGamma(const PointSet& points, const ClusterSeeds& seeds,
                     const PointSet& centers, double eps);

struct OutlierRunOptions {
  // Unset means estimate from the seeds (EstimateGamma).
  std::optional<double> gamma;
};

// Phase 1, phase 2, centroids, then labels: seed members get their cluster,
// queried points rejected by every cluster become kOutlier, all others go to
// the nearest center within gamma.
RunOutput RunOutlier(OracleSession& session, const Dataset& dataset,
                     const SeedConfig& cfg, Rng& rng,
                     const OutlierRunOptions& options = {});

}  // namespace qkm

#endif  // QKM_QKM_OUTLIER_H_
