// AVX2 variants. Built with -mavx2 and no FMA.

#include <immintrin.h>

#include <bit>

#include "qkm/kernels.h"

namespace qkm::kernels {
namespace {

void SqDistToCenter(const double* points, std::size_t n, std::size_t d,
                    const double* center, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const double* r0 = points + i * d;
    const double* r1 = r0 + d;
    const double* r2 = r1 + d;
    const double* r3 = r2 + d;
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = 0; j < d; ++j) {
      const __m256d x = _mm256_set_pd(r3[j], r2[j], r1[j], r0[j]);
      const __m256d t = _mm256_sub_pd(x, _mm256_set1_pd(center[j]));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(t, t));
    }
    _mm256_storeu_pd(out + i, acc);
  }
  for (; i < n; ++i) {
    const double* row = points + i * d;
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double t = row[j] - center[j];
      s += t * t;
    }
    out[i] = s;
  }
}

void AccumulateRows(const double* points, std::size_t d,
                    const std::size_t* idx, std::size_t count, double* sum) {
  std::size_t j = 0;
  for (; j + 4 <= d; j += 4) {
    __m256d acc = _mm256_loadu_pd(sum + j);
    for (std::size_t k = 0; k < count; ++k) {
      acc = _mm256_add_pd(acc, _mm256_loadu_pd(points + idx[k] * d + j));
    }
    _mm256_storeu_pd(sum + j, acc);
  }
  for (; j < d; ++j) {
    double s = sum[j];
    for (std::size_t k = 0; k < count; ++k) s += points[idx[k] * d + j];
    sum[j] = s;
  }
}

// Nibble-lookup popcount over 256-bit lanes.
std::uint64_t XorPopcount(const std::uint64_t* a, const std::uint64_t* b,
                          std::size_t words) {
  const __m256i lookup =
      _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4,  //
                       0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
  const __m256i low_mask = _mm256_set1_epi8(0x0f);
  __m256i acc = _mm256_setzero_si256();
  std::size_t w = 0;
  for (; w + 4 <= words; w += 4) {
    const __m256i va =
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + w));
    const __m256i vb =
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + w));
    const __m256i v = _mm256_xor_si256(va, vb);
    const __m256i lo = _mm256_and_si256(v, low_mask);
    const __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low_mask);
    const __m256i cnt = _mm256_add_epi8(_mm256_shuffle_epi8(lookup, lo),
                                        _mm256_shuffle_epi8(lookup, hi));
    acc = _mm256_add_epi64(acc, _mm256_sad_epu8(cnt, _mm256_setzero_si256()));
  }
  alignas(32) std::uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
  std::uint64_t total = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; w < words; ++w) total += std::popcount(a[w] ^ b[w]);
  return total;
}

}  // namespace

const KernelTable* Avx2Kernels() {
  static constexpr KernelTable kTable{Isa::kAvx2, &SqDistToCenter,
                                      &AccumulateRows, &XorPopcount};
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &kTable : nullptr;
}

}  // namespace qkm::kernels
