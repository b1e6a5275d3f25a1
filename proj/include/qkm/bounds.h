#ifndef QKM_BOUNDS_H_
#define QKM_BOUNDS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qkm/geometry.h"

// Closed-form query-complexity bounds and the simulators that check them.
// All logarithms are natural.
namespace qkm::bounds {

// Parameters shared by the bound formulas.
struct BoundInputs {
  double alpha = 1.0;
  std::size_t k = 1;
  std::size_t m = 1;
  double delta = 0.1;
  double eps = 0.1;
  double p_o = 0.0;
  double p_e = 0.0;
  std::size_t n = 0;

  double p_star() const { return 1.0 / (alpha * static_cast<double>(k)); }
};

// Draws needed to collect m copies of each of K coupon types whose smallest
// probability is 1/(alpha K): 2 alpha K (ln K + m ln 2).
double DixieBound(double alpha, std::size_t k, std::size_t m);

struct QkmwolBound {
  double term1 = 0.0;  // pair seeding of non-outliers
  double term2 = 0.0;  // outlier draws during pair seeding
  double term3 = 0.0;  // filtered second phase
  double phase1() const { return term1 + term2; }
  double phase2() const { return term3; }
  double total() const { return term1 + term2 + term3; }
};

// Expected query bound of the two-phase outlier algorithm. Throws on
// p_o outside [0, 1).
QkmwolBound ThmQkmwol(double alpha, std::size_t k, double delta, double eps,
                      double p_o);

// (2 alpha K / (1 - p_o)) (ln K + (m - 2) ln 2): expected draws to lift K
// pairs to m members each.
double PhaseTwoDraws(double alpha, std::size_t k, double p_o, double m);

struct ErlangBounds {
  double ex = 0.0;   // bound on E[max_i X_i]
  double ex2 = 0.0;  // bound on E[(max_i X_i)^2]
};

// X_i ~ Erlang(m, (1 - p_o)/(alpha K)). Throws unless K 2^m >= e.
ErlangBounds ErlangMaxMoments(double alpha, std::size_t k, double p_o,
                              std::size_t m);

struct NoisyM {
  double m_tilde = 0.0;
  std::uint64_t m = 0;
  double rhs = 0.0;  // c_S alpha K^2 / (2 p_e - 1)^4
};

// M_tilde = max{6 alpha K/(delta eps), 8 alpha K ln(3K/delta)}; M is the
// smallest integer >= max(M_tilde, 3) with M / ln M >= rhs.
NoisyM NoisyMParams(double alpha, std::size_t k, double delta, double eps,
                    double p_e, double sample_constant = 128.0);

struct NoisyOutlierParams {
  double r = 0.0;  // c_S alpha K^2 / (2 p_e - 1)^4
  double m_tilde = 0.0;
  double m = 0.0;
  double n0 = 0.0;  // c_N K^2 ln M / (1 - 2 p_e)^4
  double n = 0.0;   // n0 + M - M_tilde
};

NoisyOutlierParams NoisyOutlierParamsFor(double alpha, std::size_t k,
                                         double delta, double eps, double p_e,
                                         double p_o,
                                         double sample_constant = 128.0,
                                         double subgraph_constant = 64.0);

// Alternative subgraph size
// (128 K^2 ln M + 4 sqrt2 (1-2p_e)^2 K sqrt(ln M ln(5K/delta)))
//   / ((1-2p_e)^4 (1-p_o)).
double NoisyOutlierNPrime(std::size_t k, double m, double delta, double p_e,
                          double p_o);

// D(x || y) for Bernoulli distributions, with 0 ln 0 = 0.
double KlBernoulli(double x, double y);
// (y - x)^2 / (2y); a lower bound on D(x || y) for x <= y. Throws if x > y.
double KlQuadraticBound(double x, double y);

// 1 - K exp(-m p_min / 8).
double HypergeomTailBound(std::size_t k, std::size_t m, double p_min);

// n eps^3 / K^7.
double MinClusterThreshold(double n, double k, double eps);

// Type probabilities with the first type at 1/(alpha K) and the rest equal.
std::vector<double> SkewedProbabilities(std::size_t k, double alpha);

struct MomentEstimate {
  double mean = 0.0;
  double second_moment = 0.0;
  std::size_t samples = 0;
};

// Number of draws from `probs` until every type has been seen m times.
MomentEstimate SimulateDoubleDixie(std::span<const double> probs,
                                   std::size_t m, std::size_t runs,
                                   std::uint64_t seed);

// max_i X_i with X_i a sum of m exponentials of rate rates[i].
MomentEstimate SimulateErlangMax(std::span<const double> rates, std::size_t m,
                                 std::size_t draws, std::uint64_t seed);

// Rates (1 - p_o) / (alpha K) for the first cluster, the rest sharing the
// remaining mass, matching SkewedProbabilities scaled by 1 - p_o.
std::vector<double> ErlangRates(std::size_t k, double alpha, double p_o);

struct HypergeomResult {
  double empirical = 0.0;  // P{S_min >= m p_min / 2}
  double bound = 0.0;
  double p_min = 0.0;
  std::vector<std::size_t> population;
};

// Samples m of n points without replacement from clusters of sizes
// round(n probs_i); S_min counts the draws from the smallest cluster.
HypergeomResult HypergeomTailCheck(std::size_t n, std::span<const double> probs,
                                   std::size_t m, std::size_t trials,
                                   std::uint64_t seed);

struct CentroidLemmaResult {
  double loose_factor = 0.0;  // 1 + 1/(delta m)
  double tight_factor = 0.0;  // 1 + (1 - (m-1)/(|A|-1)) / (delta m)
  double with_replacement = 0.0;
  double without_replacement_loose = 0.0;
  double without_replacement_tight = 0.0;
  std::size_t trials = 0;
};

// Fraction of trials where phi(S; mean of an m-sample) stays within the
// lemma factor of phi*(S), sampling with and without replacement from the
// same random stream. Throws if m > |S|.
CentroidLemmaResult VerifyCentroidLemma(const PointSet& points, std::size_t m,
                                        double delta, std::size_t trials,
                                        std::uint64_t seed);

struct NamedPointSet {
  std::string name;
  PointSet points;
};

// Uniform cube, two blobs and a noisy line; 200 points each, fixed seeds.
std::vector<NamedPointSet> StandardPointSets();

}  // namespace qkm::bounds

#endif  // QKM_BOUNDS_H_
