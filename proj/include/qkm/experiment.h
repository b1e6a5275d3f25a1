#ifndef QKM_EXPERIMENT_H_
#define QKM_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qkm/datagen.h"
#include "qkm/noisy_recovery.h"
#include "qkm/qkm_noiseless.h"
#include "qkm/report.h"

namespace qkm {

enum class Algorithm { kNoiseless, kOutlier, kNoisy, kNoisyOutlier };

const char* AlgorithmName(Algorithm algorithm);
Algorithm ParseAlgorithm(const std::string& name);

struct TrialSpec {
  Algorithm algorithm = Algorithm::kNoiseless;
  std::optional<std::size_t> k;  // default: clusters in the dataset
  double delta = 0.1;
  double eps = 0.1;
  double p_e = 0.0;
  std::optional<double> gamma;  // outlier algorithms; unset = auto
  std::optional<double> alpha;  // default: realized alpha of the dataset
  std::optional<double> p_o;    // default: outlier fraction of the dataset
  std::uint64_t max_draws = 10'000'000;
  ProbeOrder probe_order = ProbeOrder::kCreation;
  ScaleMode scale_mode = ScaleMode::kDesk;
};

// Trial streams: the oracle noise uses DeriveSeed(trial_seed, 1) and the
// sampling RNG uses DeriveSeed(trial_seed, 2).
std::uint64_t OracleSeed(std::uint64_t trial_seed);
std::uint64_t SamplingSeed(std::uint64_t trial_seed);

// Runs one trial. qkm::Error is caught and reported in the row's error field.
ExperimentReport RunTrial(const Dataset& dataset, const TrialSpec& spec,
                          std::uint64_t trial_id, std::uint64_t trial_seed);

// Trial i uses seed + i. Rows come back in trial order for any job count.
std::vector<ExperimentReport> RunTrials(const Dataset& dataset,
                                        const TrialSpec& spec,
                                        std::uint64_t seed, std::size_t trials,
                                        std::size_t jobs);

// Calls fn(i) for i in [0, count) on up to `jobs` threads.
void ParallelFor(std::size_t count, std::size_t jobs,
                 const std::function<void(std::size_t)>& fn);

}  // namespace qkm

#endif  // QKM_EXPERIMENT_H_
