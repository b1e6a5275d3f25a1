#include "qkm/kernels.h"

#include <cstdint>
#include <cstring>
#include <random>
#include <vector>

#include "gtest/gtest.h"

namespace qkm::kernels {
namespace {

std::vector<const KernelTable*> Variants() {
  std::vector<const KernelTable*> v;
  if (const KernelTable* t = Avx2Kernels()) v.push_back(t);
  if (const KernelTable* t = NeonKernels()) v.push_back(t);
  return v;
}

bool SameBits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

TEST(KernelsTest, ScalarDistanceByHand) {
  const std::vector<double> pts = {0, 0, 3, 4, -1, 1};
  const double c[2] = {0, 0};
  double out[3];
  ScalarKernels().sq_dist_to_center(pts.data(), 3, 2, c, out);
  EXPECT_EQ(out[0], 0.0);
  EXPECT_EQ(out[1], 25.0);
  EXPECT_EQ(out[2], 2.0);
}

TEST(KernelsTest, ScalarXorPopcount) {
  const std::uint64_t a[2] = {0xFFull, 1};
  const std::uint64_t b[2] = {0x0Full, 0};
  EXPECT_EQ(ScalarKernels().xor_popcount(a, b, 2), 5u);
}

TEST(KernelsTest, VectorVariantsMatchScalarBitForBit) {
  std::mt19937_64 gen(42);
  std::normal_distribution<double> nd(0.0, 50.0);
  for (std::size_t d : {1u, 2u, 3u, 4u, 5u, 7u, 16u}) {
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 100u}) {
      std::vector<double> pts(n * d), c(d);
      for (double& x : pts) x = nd(gen);
      for (double& x : c) x = nd(gen);
      std::vector<double> ref(n), got(n);
      ScalarKernels().sq_dist_to_center(pts.data(), n, d, c.data(), ref.data());
      for (const KernelTable* t : Variants()) {
        t->sq_dist_to_center(pts.data(), n, d, c.data(), got.data());
        for (std::size_t i = 0; i < n; ++i) {
          ASSERT_TRUE(SameBits(ref[i], got[i])) << IsaName(t->isa) << " d=" << d;
        }
      }
      if (n == 0) continue;
      std::vector<std::size_t> idx(3 * n);
      for (auto& i : idx) i = gen() % n;
      std::vector<double> rs(d, 0.5), gs(d, 0.5);
      ScalarKernels().accumulate_rows(pts.data(), d, idx.data(), idx.size(), rs.data());
      for (const KernelTable* t : Variants()) {
        std::fill(gs.begin(), gs.end(), 0.5);
        t->accumulate_rows(pts.data(), d, idx.data(), idx.size(), gs.data());
        for (std::size_t j = 0; j < d; ++j) ASSERT_TRUE(SameBits(rs[j], gs[j]));
      }
    }
  }
}

TEST(KernelsTest, XorPopcountVariantsAgree) {
  std::mt19937_64 gen(7);
  for (std::size_t words : {0u, 1u, 3u, 4u, 9u, 64u}) {
    std::vector<std::uint64_t> a(words), b(words);
    for (auto& w : a) w = gen();
    for (auto& w : b) w = gen();
    const auto ref = ScalarKernels().xor_popcount(a.data(), b.data(), words);
    for (const KernelTable* t : Variants()) {
      EXPECT_EQ(t->xor_popcount(a.data(), b.data(), words), ref);
    }
  }
}

TEST(KernelsTest, ForceIsa) {
  const Isa before = Active().isa;
  ASSERT_TRUE(ForceIsa(Isa::kScalar));
  EXPECT_EQ(Active().isa, Isa::kScalar);
  if (Avx2Kernels() == nullptr) {
    EXPECT_FALSE(ForceIsa(Isa::kAvx2));
  }
  if (NeonKernels() == nullptr) {
    EXPECT_FALSE(ForceIsa(Isa::kNeon));
  }
  ASSERT_TRUE(ForceIsa(before));
}

}  // namespace
}  // namespace qkm::kernels
