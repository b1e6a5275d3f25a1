#ifndef QKM_RNG_H_
#define QKM_RNG_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace qkm {

// SplitMix64 finalizer (Steele, Lea, Flood 2014). Stable, stateless 64-bit
// mixer used for seed derivation and persistent oracle noise.
constexpr std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent child seed for a named stream.
constexpr std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream) {
  return SplitMix64(SplitMix64(seed) ^ SplitMix64(stream + 0x632be59bd9b4e019ULL));
}

// Maps a 64-bit word to [0, 1) with 53 bits of precision.
constexpr double ToUnit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// mt19937_64 with hand-written distributions.
class Rng {
 public:
  static constexpr std::string_view kName = "mt19937_64+polar";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t Next() { return engine_(); }
  double Uniform01() { return ToUnit(engine_()); }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform01(); }
  // Unbiased integer in [0, bound) (Lemire's multiply-shift rejection).
  std::size_t UniformIndex(std::size_t bound);
  // Standard normal via the Marsaglia polar method.
  double Normal();
  double Exponential(double rate);

  // k distinct indices from [0, n) in draw order (partial Fisher-Yates).
  std::vector<std::size_t> SampleWithoutReplacement(std::size_t n,
                                                    std::size_t k);
  template <typename T>
  void Shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[UniformIndex(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace qkm

#endif  // QKM_RNG_H_
