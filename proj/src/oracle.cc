#include "qkm/oracle.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "qkm/error.h"
#include "qkm/rng.h"

namespace qkm {
namespace {

constexpr std::size_t kBitmapLimit = 16384;

std::uint64_t PairKey(std::uint64_t lo, std::uint64_t hi) {
  return (hi << 32) | lo;
}

}  // namespace

OracleSession::OracleSession(const GroundTruth& truth, OracleConfig config)
    : truth_(truth), config_(config) {
  if (config_.mode == OracleMode::kNoisy) {
    if (!(config_.p_e >= 0.0 && config_.p_e < 0.5)) {
      throw InvalidArgument("p_e must be in [0, 1/2)");
    }
    // flip iff hash < p_e * 2^64.
    flip_threshold_ = static_cast<std::uint64_t>(std::ldexp(config_.p_e, 64));
  }
}

void OracleSession::CheckPair(std::size_t a, std::size_t b) const {
  if (a == b) {
    throw InvalidArgument("self-query on index " + std::to_string(a));
  }
  if (a >= truth_.size() || b >= truth_.size()) {
    throw InvalidArgument("query index out of range");
  }
}

Answer OracleSession::GroundAnswer(std::size_t a, std::size_t b) const {
  CheckPair(a, b);
  const int la = truth_.labels[a];
  const int lb = truth_.labels[b];
  return (la != kOutlier && la == lb) ? Answer::kSame : Answer::kDifferent;
}

bool OracleSession::Flipped(std::size_t a, std::size_t b) const {
  if (config_.mode != OracleMode::kNoisy || flip_threshold_ == 0) return false;
  const std::uint64_t lo = std::min(a, b);
  const std::uint64_t hi = std::max(a, b);
  const std::uint64_t h =
      SplitMix64(SplitMix64(config_.seed ^ SplitMix64(lo)) + hi);
  return h < flip_threshold_;
}

Answer OracleSession::Peek(std::size_t a, std::size_t b) const {
  const Answer ground = GroundAnswer(a, b);
  if (!Flipped(a, b)) return ground;
  return ground == Answer::kSame ? Answer::kDifferent : Answer::kSame;
}

bool OracleSession::MarkSeen(std::size_t lo, std::size_t hi) {
  std::lock_guard<std::mutex> lock(seen_mu_);
  const std::size_t n = truth_.size();
  if (n <= kBitmapLimit) {
    if (seen_bits_.empty()) seen_bits_.assign((n * (n - 1) / 2 + 63) / 64, 0);
    const std::size_t bit = hi * (hi - 1) / 2 + lo;
    std::uint64_t& word = seen_bits_[bit / 64];
    const std::uint64_t mask = std::uint64_t{1} << (bit % 64);
    if (word & mask) return false;
    word |= mask;
    return true;
  }
  return seen_set_.insert(PairKey(lo, hi)).second;
}

Answer OracleSession::Query(std::size_t a, std::size_t b) {
  const Answer answer = Peek(a, b);
  query_count_.fetch_add(1);
  if (MarkSeen(std::min(a, b), std::max(a, b))) distinct_pair_count_.fetch_add(1);
  return answer;
}

void OracleSession::ResetCounters() {
  std::lock_guard<std::mutex> lock(seen_mu_);
  query_count_.store(0);
  distinct_pair_count_.store(0);
  seen_bits_.clear();
  seen_set_.clear();
}

}  // namespace qkm
