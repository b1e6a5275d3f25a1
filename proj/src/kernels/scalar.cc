#include <bit>

#include "qkm/kernels.h"

namespace qkm::kernels {
namespace {

void SqDistToCenter(const double* points, std::size_t n, std::size_t d,
                    const double* center, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
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
  for (std::size_t k = 0; k < count; ++k) {
    const double* row = points + idx[k] * d;
    for (std::size_t j = 0; j < d; ++j) sum[j] += row[j];
  }
}

std::uint64_t XorPopcount(const std::uint64_t* a, const std::uint64_t* b,
                          std::size_t words) {
  std::uint64_t total = 0;
  for (std::size_t w = 0; w < words; ++w) total += std::popcount(a[w] ^ b[w]);
  return total;
}

}  // namespace

const KernelTable& ScalarKernels() {
  static constexpr KernelTable kTable{Isa::kScalar, &SqDistToCenter,
                                      &AccumulateRows, &XorPopcount};
  return kTable;
}

}  // namespace qkm::kernels
