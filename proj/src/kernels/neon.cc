#include <arm_neon.h>

#include <bit>

#include "qkm/kernels.h"

namespace qkm::kernels {
namespace {

void SqDistToCenter(const double* points, std::size_t n, std::size_t d,
                    const double* center, double* out) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const double* r0 = points + i * d;
    const double* r1 = r0 + d;
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t j = 0; j < d; ++j) {
      float64x2_t x = vsetq_lane_f64(r1[j], vdupq_n_f64(r0[j]), 1);
      const float64x2_t t = vsubq_f64(x, vdupq_n_f64(center[j]));
      // vmulq + vaddq, never vfmaq: the scalar loop rounds after the multiply.
      acc = vaddq_f64(acc, vmulq_f64(t, t));
    }
    vst1q_f64(out + i, acc);
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
  for (; j + 2 <= d; j += 2) {
    float64x2_t acc = vld1q_f64(sum + j);
    for (std::size_t k = 0; k < count; ++k) {
      acc = vaddq_f64(acc, vld1q_f64(points + idx[k] * d + j));
    }
    vst1q_f64(sum + j, acc);
  }
  for (; j < d; ++j) {
    double s = sum[j];
    for (std::size_t k = 0; k < count; ++k) s += points[idx[k] * d + j];
    sum[j] = s;
  }
}

std::uint64_t XorPopcount(const std::uint64_t* a, const std::uint64_t* b,
                          std::size_t words) {
  std::uint64_t total = 0;
  std::size_t w = 0;
  for (; w + 2 <= words; w += 2) {
    const uint64x2_t v = veorq_u64(vld1q_u64(a + w), vld1q_u64(b + w));
    total += vaddvq_u8(vcntq_u8(vreinterpretq_u8_u64(v)));
  }
  for (; w < words; ++w) total += std::popcount(a[w] ^ b[w]);
  return total;
}

}  // namespace

const KernelTable* NeonKernels() {
  static constexpr KernelTable kTable{Isa::kNeon, &SqDistToCenter,
                                      &AccumulateRows, &XorPopcount};
  return &kTable;
}

}  // namespace qkm::kernels
