#include "qkm/rng.h"

#include <cmath>
#include <numeric>

#include "qkm/error.h"

namespace qkm {

std::size_t Rng::UniformIndex(std::size_t bound) {
  if (bound == 0) throw InvalidArgument("UniformIndex bound must be > 0");
  const std::uint64_t range = bound;
  unsigned __int128 m =
      static_cast<unsigned __int128>(engine_()) * static_cast<unsigned __int128>(range);
  std::uint64_t low = static_cast<std::uint64_t>(m);
  if (low < range) {
    const std::uint64_t threshold = (0 - range) % range;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(engine_()) *
          static_cast<unsigned __int128>(range);
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::size_t>(m >> 64);
}

double Rng::Normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * Uniform01() - 1.0;
    v = 2.0 * Uniform01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  have_spare_ = true;
  return u * f;
}

double Rng::Exponential(double rate) {
  return -std::log(1.0 - Uniform01()) / rate;
}

std::vector<std::size_t> Rng::SampleWithoutReplacement(std::size_t n,
                                                       std::size_t k) {
  if (k > n) throw InvalidArgument("sample size exceeds population");
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(pool[i], pool[i + UniformIndex(n - i)]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace qkm
