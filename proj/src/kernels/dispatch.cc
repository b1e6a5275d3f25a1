#include <atomic>
#include <cstdlib>
#include <string_view>

#include "qkm/kernels.h"

namespace qkm::kernels {

#if !(defined(__x86_64__) || defined(_M_X64))
const KernelTable* Avx2Kernels() { return nullptr; }
#endif
#if !(defined(__aarch64__) || defined(_M_ARM64))
const KernelTable* NeonKernels() { return nullptr; }
#endif

std::string_view IsaName(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
  }
  return "unknown";
}

namespace {

const KernelTable* Lookup(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return &ScalarKernels();
    case Isa::kAvx2:
      return Avx2Kernels();
    case Isa::kNeon:
      return NeonKernels();
  }
  return nullptr;
}

const KernelTable* Detect() {
  if (const char* env = std::getenv("QKM_KERNELS")) {
    const std::string_view want(env);
    for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
      if (want == IsaName(isa)) {
        if (const KernelTable* t = Lookup(isa)) return t;
      }
    }
  }
  if (const KernelTable* t = Avx2Kernels()) return t;
  if (const KernelTable* t = NeonKernels()) return t;
  return &ScalarKernels();
}

std::atomic<const KernelTable*>& Slot() {
  static std::atomic<const KernelTable*> slot{Detect()};
  return slot;
}

}  // namespace

const KernelTable& Active() { return *Slot().load(std::memory_order_acquire); }

bool ForceIsa(Isa isa) {
  const KernelTable* t = Lookup(isa);
  if (t == nullptr) return false;
  Slot().store(t, std::memory_order_release);
  return true;
}

}  // namespace qkm::kernels
