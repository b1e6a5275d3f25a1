#ifndef QKM_ORACLE_H_
#define QKM_ORACLE_H_

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "qkm/datagen.h"

namespace qkm {

enum class Answer { kSame, kDifferent };

enum class OracleMode { kNoiseless, kNoisy };

struct OracleConfig {
  OracleMode mode = OracleMode::kNoiseless;
  double p_e = 0.0;  // flip probability, noisy mode only
  std::uint64_t seed = 0;
};

// Same-cluster oracle over a fixed ground truth.
//
// Noisy answers are ground XOR flip(seed, min(a,b), max(a,b)). Counters are
// atomic; Query may be called concurrently.
class OracleSession {
 public:
  static constexpr std::string_view kHashName = "splitmix64";

  // Keeps a reference to truth, which must outlive the session. Throws
  // InvalidArgument if p_e is outside [0, 1/2) in noisy mode.
  OracleSession(const GroundTruth& truth, OracleConfig config);

  // Throws InvalidArgument on a == b or an index out of range.
  Answer Query(std::size_t a, std::size_t b);

  // Answer without touching the counters.
  Answer Peek(std::size_t a, std::size_t b) const;
  Answer GroundAnswer(std::size_t a, std::size_t b) const;
  bool Flipped(std::size_t a, std::size_t b) const;

  void ResetCounters();

  std::uint64_t query_count() const { return query_count_.load(); }
  std::uint64_t distinct_pair_count() const {
    return distinct_pair_count_.load();
  }
  const OracleConfig& config() const { return config_; }
  bool noisy() const { return config_.mode == OracleMode::kNoisy; }
  std::size_t size() const { return truth_.size(); }
  const GroundTruth& truth() const { return truth_; }

 private:
  void CheckPair(std::size_t a, std::size_t b) const;
  bool MarkSeen(std::size_t lo, std::size_t hi);

  const GroundTruth& truth_;
  OracleConfig config_;
  std::uint64_t flip_threshold_ = 0;
  std::atomic<std::uint64_t> query_count_{0};
  std::atomic<std::uint64_t> distinct_pair_count_{0};

  // Seen-pair record: a triangular bitmap for small n, a hash set otherwise.
  std::mutex seen_mu_;
  std::vector<std::uint64_t> seen_bits_;
  std::unordered_set<std::uint64_t> seen_set_;
};

}  // namespace qkm

#endif  // QKM_ORACLE_H_
