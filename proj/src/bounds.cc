#include "qkm/bounds.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "qkm/error.h"
#include "qkm/rng.h"

namespace qkm::bounds {
namespace {

constexpr double kLn2 = std::numbers::ln2;

void CheckAlphaK(double alpha, std::size_t k) {
  if (!(alpha >= 1.0)) throw InvalidArgument("alpha must be ≥ 1");
  if (k == 0) throw InvalidArgument("K must be >= 1");
}

void CheckOutlierFraction(double p_o) {
  if (!(p_o >= 0.0 && p_o < 1.0)) throw InvalidArgument("p_o must be in [0, 1)");
}

void CheckUnitInterval(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) {
    throw InvalidArgument(std::string(name) + " must be in (0, 1)");
  }
}

void CheckNoise(double p_e) {
  if (!(p_e >= 0.0 && p_e < 0.5)) throw InvalidArgument("p_e must be in [0, 1/2)");
}

// Smallest integer >= `from` with M / ln M >= rhs, for from >= 3 where
// M / ln M is increasing.
std::uint64_t SmallestSatisfying(std::uint64_t from, double rhs) {
  auto ok = [rhs](std::uint64_t m) {
    const double md = static_cast<double>(m);
    return md / std::log(md) >= rhs;
  };
  if (ok(from)) return from;
  std::uint64_t lo = from;  // fails
  std::uint64_t hi = from * 2;
  while (!ok(hi)) {
    lo = hi;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

// Ceiling that ignores relative rounding noise below 1e-12.
std::uint64_t TolerantCeil(double v) {
  return static_cast<std::uint64_t>(std::ceil(v * (1.0 - 1e-12)));
}

double XLogXOverY(double x, double y) {
  if (x == 0.0) return 0.0;
  if (y == 0.0) return std::numeric_limits<double>::infinity();
  return x * std::log(x / y);
}

std::size_t SampleCategorical(std::span<const double> cumulative, Rng& rng) {
  const double u = rng.Uniform01() * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(it - cumulative.begin(), cumulative.size() - 1);
}

}  // namespace

double DixieBound(double alpha, std::size_t k, std::size_t m) {
  CheckAlphaK(alpha, k);
  if (m == 0) throw InvalidArgument("m must be >= 1");
  const double kd = static_cast<double>(k);
  return 2.0 * alpha * kd * (std::log(kd) + static_cast<double>(m) * kLn2);
}

QkmwolBound ThmQkmwol(double alpha, std::size_t k, double delta, double eps,
                      double p_o) {
  CheckAlphaK(alpha, k);
  CheckOutlierFraction(p_o);
  CheckUnitInterval(delta, "delta");
  CheckUnitInterval(eps, "eps");
  const double kd = static_cast<double>(k);
  const double q = 1.0 - p_o;
  QkmwolBound b;
  b.term1 = 2.0 * alpha * kd * kd / q * (std::log(kd) + 2.0 * kLn2);
  const double t = alpha * kd * p_o / q * (std::log(2.0 * kd) + 2.0 * kLn2);
  b.term2 = 2.0 * t * t;
  b.term3 = 2.0 * alpha * kd / q * (p_o + kd * q) *
            (std::log(kd) + (kd / (delta * eps) - 2.0) * kLn2);
  return b;
}

double PhaseTwoDraws(double alpha, std::size_t k, double p_o, double m) {
  CheckAlphaK(alpha, k);
  CheckOutlierFraction(p_o);
  const double kd = static_cast<double>(k);
  return 2.0 * alpha * kd / (1.0 - p_o) * (std::log(kd) + (m - 2.0) * kLn2);
}

ErlangBounds ErlangMaxMoments(double alpha, std::size_t k, double p_o,
                              std::size_t m) {
  CheckAlphaK(alpha, k);
  CheckOutlierFraction(p_o);
  const double kd = static_cast<double>(k);
  const double md = static_cast<double>(m);
  if (!(kd * std::exp2(md) >= std::numbers::e)) {
    throw InvalidArgument("K * 2^m must be >= e");
  }
  const double scale = 2.0 * alpha * kd / (1.0 - p_o);
  ErlangBounds b;
  b.ex = scale * (std::log(kd) + md * kLn2);
  const double root = scale * (std::log(2.0 * kd) + md * kLn2);
  b.ex2 = root * root;
  return b;
}

NoisyM NoisyMParams(double alpha, std::size_t k, double delta, double eps,
                    double p_e, double sample_constant) {
  CheckAlphaK(alpha, k);
  CheckUnitInterval(delta, "delta");
  CheckUnitInterval(eps, "eps");
  CheckNoise(p_e);
  const double kd = static_cast<double>(k);
  NoisyM out;
  out.rhs = sample_constant * alpha * kd * kd / std::pow(2.0 * p_e - 1.0, 4);
  out.m_tilde = std::max(6.0 * alpha * kd / (delta * eps),
                         8.0 * alpha * kd * std::log(3.0 * kd / delta));
  out.m = SmallestSatisfying(std::max<std::uint64_t>(TolerantCeil(out.m_tilde), 3),
                             out.rhs);
  return out;
}

NoisyOutlierParams NoisyOutlierParamsFor(double alpha, std::size_t k,
                                         double delta, double eps, double p_e,
                                         double p_o, double sample_constant,
                                         double subgraph_constant) {
  CheckAlphaK(alpha, k);
  CheckUnitInterval(delta, "delta");
  CheckUnitInterval(eps, "eps");
  CheckNoise(p_e);
  CheckOutlierFraction(p_o);
  const double kd = static_cast<double>(k);
  const double q = 1.0 - p_o;
  NoisyOutlierParams out;
  out.r = sample_constant * alpha * kd * kd / std::pow(2.0 * p_e - 1.0, 4);
  out.m_tilde = std::max({out.r * std::log(out.r), 8.0 * alpha * kd / (delta * eps),
                          8.0 * alpha * kd * std::log(4.0 * kd / delta)});
  out.m = 2.0 * out.m_tilde / q + std::log(4.0 / delta) / (2.0 * q * q);
  out.n0 = subgraph_constant * kd * kd * std::log(out.m) /
           std::pow(1.0 - 2.0 * p_e, 4);
  out.n = out.n0 + out.m - out.m_tilde;
  return out;
}

double NoisyOutlierNPrime(std::size_t k, double m, double delta, double p_e,
                          double p_o) {
  CheckNoise(p_e);
  CheckOutlierFraction(p_o);
  const double kd = static_cast<double>(k);
  const double s = (1.0 - 2.0 * p_e) * (1.0 - 2.0 * p_e);
  const double lm = std::log(m);
  return (128.0 * kd * kd * lm +
          4.0 * std::numbers::sqrt2 * s * kd *
              std::sqrt(lm * std::log(5.0 * kd / delta))) /
         (s * s * (1.0 - p_o));
}

double KlBernoulli(double x, double y) {
  if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0)) {
    throw InvalidArgument("KL arguments must be in [0, 1]");
  }
  return XLogXOverY(x, y) + XLogXOverY(1.0 - x, 1.0 - y);
}

double KlQuadraticBound(double x, double y) {
  if (!(x >= 0.0 && y <= 1.0)) throw InvalidArgument("KL arguments must be in [0, 1]");
  if (x > y) throw InvalidArgument("quadratic KL bound needs x <= y");
  if (y == 0.0) return 0.0;
  return (y - x) * (y - x) / (2.0 * y);
}

double HypergeomTailBound(std::size_t k, std::size_t m, double p_min) {
  return 1.0 - static_cast<double>(k) *
                   std::exp(-static_cast<double>(m) * p_min / 8.0);
}

double MinClusterThreshold(double n, double k, double eps) {
  if (!(n > 0.0 && k > 0.0 && eps >= 0.0)) {
    throw InvalidArgument("min cluster threshold needs positive inputs");
  }
  return n * eps * eps * eps / std::pow(k, 7);
}

std::vector<double> SkewedProbabilities(std::size_t k, double alpha) {
  CheckAlphaK(alpha, k);
  if (k == 1) return {1.0};
  const double p_min = 1.0 / (alpha * static_cast<double>(k));
  std::vector<double> probs(k, (1.0 - p_min) / static_cast<double>(k - 1));
  probs[0] = p_min;
  return probs;
}

std::vector<double> ErlangRates(std::size_t k, double alpha, double p_o) {
  CheckOutlierFraction(p_o);
  std::vector<double> rates = SkewedProbabilities(k, alpha);
  for (double& r : rates) r *= 1.0 - p_o;
  return rates;
}

MomentEstimate SimulateDoubleDixie(std::span<const double> probs,
                                   std::size_t m, std::size_t runs,
                                   std::uint64_t seed) {
  if (probs.empty() || m == 0) throw InvalidArgument("need types and m >= 1");
  std::vector<double> cumulative(probs.size());
  std::partial_sum(probs.begin(), probs.end(), cumulative.begin());
  Rng rng(seed);
  MomentEstimate est;
  std::vector<std::size_t> counts(probs.size());
  for (std::size_t r = 0; r < runs; ++r) {
    std::fill(counts.begin(), counts.end(), 0);
    std::size_t missing = probs.size();
    double draws = 0.0;
    while (missing > 0) {
      const std::size_t t = SampleCategorical(cumulative, rng);
      draws += 1.0;
      if (++counts[t] == m) --missing;
    }
    est.mean += draws;
    est.second_moment += draws * draws;
  }
  est.samples = runs;
  est.mean /= static_cast<double>(runs);
  est.second_moment /= static_cast<double>(runs);
  return est;
}

MomentEstimate SimulateErlangMax(std::span<const double> rates, std::size_t m,
                                 std::size_t draws, std::uint64_t seed) {
  if (rates.empty() || m == 0) throw InvalidArgument("need rates and m >= 1");
  Rng rng(seed);
  MomentEstimate est;
  for (std::size_t s = 0; s < draws; ++s) {
    double mx = 0.0;
    for (double rate : rates) {
      double x = 0.0;
      for (std::size_t j = 0; j < m; ++j) x += rng.Exponential(rate);
      mx = std::max(mx, x);
    }
    est.mean += mx;
    est.second_moment += mx * mx;
  }
  est.samples = draws;
  est.mean /= static_cast<double>(draws);
  est.second_moment /= static_cast<double>(draws);
  return est;
}

HypergeomResult HypergeomTailCheck(std::size_t n, std::span<const double> probs,
                                   std::size_t m, std::size_t trials,
                                   std::uint64_t seed) {
  if (probs.empty()) throw InvalidArgument("need at least one cluster");
  if (m > n) throw InvalidArgument("m must be <= n");
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("probs must sum to 1");
  HypergeomResult out;
  out.population.resize(probs.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    out.population[i] = static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * probs[i]));
    assigned += out.population[i];
  }
  // Rounding slack goes to the largest cluster.
  const std::size_t big = static_cast<std::size_t>(
      std::max_element(probs.begin(), probs.end()) - probs.begin());
  out.population[big] += n - assigned;
  const std::size_t small = static_cast<std::size_t>(
      std::min_element(probs.begin(), probs.end()) - probs.begin());
  out.p_min = probs[small];
  out.bound = HypergeomTailBound(probs.size(), m, out.p_min);
  const double target = static_cast<double>(m) * out.p_min / 2.0;

  Rng rng(seed);
  std::vector<std::size_t> remaining;
  std::size_t hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    remaining = out.population;
    std::size_t left = n;
    std::size_t s_min = 0;
    for (std::size_t j = 0; j < m; ++j) {
      std::size_t u = rng.UniformIndex(left);
      std::size_t c = 0;
      while (u >= remaining[c]) u -= remaining[c++];
      --remaining[c];
      --left;
      s_min += c == small;
    }
    hits += static_cast<double>(s_min) >= target;
  }
  out.empirical = static_cast<double>(hits) / static_cast<double>(trials);
  return out;
}

CentroidLemmaResult VerifyCentroidLemma(const PointSet& points, std::size_t m,
                                        double delta, std::size_t trials,
                                        std::uint64_t seed) {
  const std::size_t n = points.size();
  const std::size_t d = points.dim();
  if (m == 0 || m > n) throw InvalidArgument("m must be in [1, |A|]");
  CheckUnitInterval(delta, "delta");
  const std::vector<double> mean = Centroid(points);
  const double phi_star = Potential(points, PointSet(1, d, mean));
  const double md = static_cast<double>(m);
  CentroidLemmaResult out;
  out.loose_factor = 1.0 + 1.0 / (delta * md);
  const double shrink =
      n == 1 ? 0.0 : 1.0 - (md - 1.0) / static_cast<double>(n - 1);
  out.tight_factor = 1.0 + shrink / (delta * md);
  out.trials = trials;
  // phi(S; a) = phi*(S) + |S| ||a - c(S)||^2.
  const double slack = 1e-12 * phi_star;
  auto excess = [&](const std::vector<double>& sum) {
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double t = sum[j] / md - mean[j];
      sq += t * t;
    }
    return static_cast<double>(n) * sq;
  };

  Rng rng(seed);
  std::vector<char> taken(n, 0);
  std::vector<std::size_t> picked;
  picked.reserve(m);
  std::vector<double> with(d), without(d);
  std::size_t ok_with = 0, ok_loose = 0, ok_tight = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::fill(with.begin(), with.end(), 0.0);
    std::fill(without.begin(), without.end(), 0.0);
    for (std::size_t i : picked) taken[i] = 0;
    picked.clear();
    for (std::size_t j = 0; j < m; ++j) {
      // The without-replacement draw reuses the with-replacement index and
      // redraws among untaken points only on a repeat.
      const std::size_t a = rng.UniformIndex(n);
      std::size_t b = a;
      while (taken[b]) b = rng.UniformIndex(n);
      taken[b] = 1;
      picked.push_back(b);
      const auto ra = points.row(a);
      const auto rb = points.row(b);
      for (std::size_t c = 0; c < d; ++c) {
        with[c] += ra[c];
        without[c] += rb[c];
      }
    }
    const double ew = excess(with);
    const double eo = excess(without);
    ok_with += ew <= (out.loose_factor - 1.0) * phi_star + slack;
    ok_loose += eo <= (out.loose_factor - 1.0) * phi_star + slack;
    ok_tight += eo <= (out.tight_factor - 1.0) * phi_star + slack;
  }
  const double td = static_cast<double>(trials);
  out.with_replacement = static_cast<double>(ok_with) / td;
  out.without_replacement_loose = static_cast<double>(ok_loose) / td;
  out.without_replacement_tight = static_cast<double>(ok_tight) / td;
  return out;
}

std::vector<NamedPointSet> StandardPointSets() {
  constexpr std::size_t kCount = 200;
  std::vector<NamedPointSet> sets;
  {
    Rng rng(101);
    std::vector<double> c;
    for (std::size_t i = 0; i < kCount * 3; ++i) c.push_back(rng.Uniform01());
    sets.push_back({"uniform_cube", PointSet(kCount, 3, std::move(c))});
  }
  {
    Rng rng(102);
    std::vector<double> c;
    for (std::size_t i = 0; i < kCount; ++i) {
      const double shift = i < kCount / 2 ? 0.0 : 8.0;
      c.push_back(shift + rng.Normal());
      c.push_back(rng.Normal());
    }
    sets.push_back({"two_blob", PointSet(kCount, 2, std::move(c))});
  }
  {
    Rng rng(103);
    std::vector<double> c;
    for (std::size_t i = 0; i < kCount; ++i) {
      c.push_back(rng.Uniform(0.0, 10.0));
      c.push_back(0.01 * rng.Normal());
    }
    sets.push_back({"line", PointSet(kCount, 2, std::move(c))});
  }
  return sets;
}

}  // namespace qkm::bounds
