#include "qkm/experiment.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

#include "qkm/error.h"
#include "qkm/qkm_outlier.h"
#include "qkm/rng.h"

namespace qkm {

const char* AlgorithmName(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kNoiseless: return "noiseless";
    case Algorithm::kOutlier: return "outlier";
    case Algorithm::kNoisy: return "noisy";
    case Algorithm::kNoisyOutlier: return "noisy-outlier";
  }
  return "?";
}

Algorithm ParseAlgorithm(const std::string& name) {
  for (Algorithm a : {Algorithm::kNoiseless, Algorithm::kOutlier,
                      Algorithm::kNoisy, Algorithm::kNoisyOutlier}) {
    if (name == AlgorithmName(a)) return a;
  }
  throw InvalidArgument("unknown algorithm '" + name +
                        "' (noiseless, outlier, noisy, noisy-outlier)");
}

std::uint64_t OracleSeed(std::uint64_t trial_seed) { return DeriveSeed(trial_seed, 1); }
std::uint64_t SamplingSeed(std::uint64_t trial_seed) { return DeriveSeed(trial_seed, 2); }

ExperimentReport RunTrial(const Dataset& dataset, const TrialSpec& spec,
                          std::uint64_t trial_id, std::uint64_t trial_seed) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report;
  try {
    const bool noisy = spec.algorithm == Algorithm::kNoisy ||
                       spec.algorithm == Algorithm::kNoisyOutlier;
    OracleConfig oc;
    oc.mode = noisy ? OracleMode::kNoisy : OracleMode::kNoiseless;
    oc.p_e = noisy ? spec.p_e : 0.0;
    oc.seed = OracleSeed(trial_seed);
    OracleSession session(dataset.truth, oc);
    Rng rng(SamplingSeed(trial_seed));
    const std::size_t k = spec.k.value_or(dataset.truth.num_clusters());
    const double alpha = spec.alpha.value_or(RealizedAlpha(dataset.truth));

    SeedConfig cfg;
    cfg.k = k;
    cfg.delta = spec.delta;
    cfg.eps = spec.eps;
    cfg.max_draws = spec.max_draws;
    cfg.probe_order = spec.probe_order;
    NoisyRunOptions nopts;
    nopts.scale_mode = spec.scale_mode;
    nopts.gamma = spec.gamma;

    switch (spec.algorithm) {
      case Algorithm::kNoiseless:
        report = RunNoiseless(session, dataset, cfg, rng).report;
        break;
      case Algorithm::kOutlier:
        report = RunOutlier(session, dataset, cfg, rng, {spec.gamma}).report;
        break;
      case Algorithm::kNoisy:
        report = RunNoisy(session, dataset, k, spec.delta, spec.eps, alpha, rng,
                          nopts).report;
        break;
      case Algorithm::kNoisyOutlier:
        report = RunNoisyOutlier(session, dataset, k, spec.delta, spec.eps, alpha,
                                 spec.p_o.value_or(dataset.truth.p_o), rng, nopts)
                     .report;
        break;
    }
  } catch (const Error& e) {
    report = ExperimentReport{};
    report.algorithm = AlgorithmName(spec.algorithm);
    report.config = {{"k", spec.k.value_or(dataset.truth.num_clusters())},
                     {"delta", spec.delta},
                     {"eps", spec.eps},
                     {"n", dataset.points.size()}};
    if (spec.algorithm == Algorithm::kNoisy ||
        spec.algorithm == Algorithm::kNoisyOutlier) {
      report.scale_mode = ScaleModeName(spec.scale_mode);
    }
    report.error = e.what();
  }
  report.trial_id = trial_id;
  report.rng_seed = trial_seed;
  report.wall_time_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
  return report;
}

std::vector<ExperimentReport> RunTrials(const Dataset& dataset,
                                        const TrialSpec& spec,
                                        std::uint64_t seed, std::size_t trials,
                                        std::size_t jobs) {
  std::vector<ExperimentReport> rows(trials);
  ParallelFor(trials, jobs, [&](std::size_t i) {
    rows[i] = RunTrial(dataset, spec, i, seed + i);
  });
  return rows;
}

void ParallelFor(std::size_t count, std::size_t jobs,
                 const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace qkm
