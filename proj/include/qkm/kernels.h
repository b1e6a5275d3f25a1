#ifndef QKM_KERNELS_H_
#define QKM_KERNELS_H_

#include <cstddef>
#include <cstdint>
#include <string_view>

// Data-parallel inner loops behind geometry and noisy recovery.
//
// Every variant is bit-identical to the scalar reference. Vector lanes run
// over independent points or coordinates, each adding in scalar order.
namespace qkm::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view IsaName(Isa isa);

struct KernelTable {
  Isa isa;

  // out[i] = sum_j (points[i*d + j] - center[j])^2 for i in [0, n).
  void (*sq_dist_to_center)(const double* points, std::size_t n,
                            std::size_t d, const double* center, double* out);

  // sum[j] += points[idx[k]*d + j] for k in [0, count), in k order.
  void (*accumulate_rows)(const double* points, std::size_t d,
                          const std::size_t* idx, std::size_t count,
                          double* sum);

  // popcount(a XOR b) over `words` 64-bit words.
  std::uint64_t (*xor_popcount)(const std::uint64_t* a, const std::uint64_t* b,
                                std::size_t words);
};

const KernelTable& ScalarKernels();

// Returns nullptr when the variant is not compiled in or the CPU lacks it.
const KernelTable* Avx2Kernels();
const KernelTable* NeonKernels();

// Best available table, chosen once on first use. The QKM_KERNELS
// environment variable ("scalar", "avx2", "neon") pins a specific variant.
const KernelTable& Active();

// Overrides the active table; returns false if `isa` is unavailable here.
bool ForceIsa(Isa isa);

}  // namespace qkm::kernels

#endif  // QKM_KERNELS_H_
