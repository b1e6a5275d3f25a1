#ifndef QKM_NOISY_RECOVERY_H_
#define QKM_NOISY_RECOVERY_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qkm/qkm_noiseless.h"

namespace qkm {

enum class ScaleMode { kPaper, kDesk };

const char* ScaleModeName(ScaleMode mode);
ScaleMode ParseScaleMode(const std::string& name);

// Constant factors of the noisy-recovery formulas. The functional forms do
// not change between presets.
struct NoisyConstants {
  double subgraph = 64.0;      // N = subgraph K^2 ln n / (1-2p_e)^4
  double sample = 128.0;       // M / ln M >= sample alpha K^2 / (2p_e-1)^4
  double vote = 16.0;          // c = vote / (1-2p_e)^2
  double degree_slack = 6.0;   // T(a) = p_e a + degree_slack sqrt(N ln n)/(1-2p_e)
  double overlap_slack = 2.0;  // theta(a) = 2p_e(1-p_e) a + overlap_slack sqrt(N ln n)

  static NoisyConstants Paper();
  static NoisyConstants Desk();
  static NoisyConstants For(ScaleMode mode);
};

struct NoisyParams {
  double p_e = 0.0;
  std::size_t k = 1;
  std::size_t n_total = 0;  // the n inside ln n
  std::size_t subgraph_size = 0;
  double c = 0.0;
  std::size_t min_cluster_size = 0;  // clusters below this stay unreturned
  NoisyConstants constants;
  ScaleMode scale_mode = ScaleMode::kDesk;

  // N = ceil(subgraph K^2 ln n / (1-2p_e)^4), c = vote/(1-2p_e)^2,
  // min_cluster_size = ceil(N / K).
  static NoisyParams Make(double p_e, std::size_t k, std::size_t n_total,
                          ScaleMode mode);
  static NoisyParams Make(double p_e, std::size_t k, std::size_t n_total,
                          const NoisyConstants& constants, ScaleMode mode);

  double DegreeThreshold(double a) const;   // T(a)
  double OverlapThreshold(double a) const;  // theta(a)
  std::size_t VoteCount() const;            // ceil(c ln n)
};

struct RecoveryResult {
  // Active clusters in the order they formed.
  std::vector<std::vector<std::size_t>> clusters;
  std::vector<std::size_t> unassigned;
  std::uint64_t queries = 0;
  std::uint64_t subgraph_queries = 0;
  std::uint64_t vote_queries = 0;
  std::size_t rounds = 0;
};

class RecoveryError : public AlgorithmError {
 public:
  RecoveryError(const std::string& what, RecoveryResult partial)
      : AlgorithmError(what), partial_(std::move(partial)) {}
  const RecoveryResult& partial() const { return partial_; }

 private:
  RecoveryResult partial_;
};

// Rounds of: fill V' to N unassigned candidates, query all pairs of V',
// merge vertices whose +1 neighbourhoods are large and nearly equal, keep
// merged groups of at least min_cluster_size as active clusters, then grow
// active clusters by majority votes over the candidates outside V'. Stops
// when no candidate is left outside V' or a round makes no progress.
RecoveryResult RecoverClusters(OracleSession& session,
                               std::span<const std::size_t> candidates,
                               const NoisyParams& params, Rng& rng);

struct NoisyRunOptions {
  ScaleMode scale_mode = ScaleMode::kDesk;
  std::optional<NoisyConstants> constants;  // overrides the preset
  std::optional<double> gamma;              // noisy-outlier only
};

// Sample M points, recover clusters, keep the K largest, assign every point
// to its nearest center.
RunOutput RunNoisy(OracleSession& session, const Dataset& dataset, std::size_t k,
                   double delta, double eps, double alpha, Rng& rng,
                   const NoisyRunOptions& options = {});

// As RunNoisy with outlier-aware M and N, followed by gamma-limited
// assignment.
RunOutput RunNoisyOutlier(OracleSession& session, const Dataset& dataset,
                          std::size_t k, double delta, double eps, double alpha,
                          double p_o, Rng& rng,
                          const NoisyRunOptions& options = {});

}  // namespace qkm

#endif  // QKM_NOISY_RECOVERY_H_
