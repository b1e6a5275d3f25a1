#ifndef QKM_VERIFY_H_
#define QKM_VERIFY_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

// Monte-Carlo and exhaustive checks of the bound formulas.
namespace qkm::verify {

struct VerifyOptions {
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  // Overrides; unset keeps each suite's default grid and trial count.
  std::optional<std::size_t> trials;
  std::optional<std::size_t> m;
  std::optional<double> delta;
  std::optional<std::size_t> k;
  std::optional<double> alpha;
  std::optional<double> p_o;
};

// One checked configuration.
struct Check {
  nlohmann::ordered_json evidence;
  bool passed = false;
};

struct SuiteResult {
  std::string suite;
  std::vector<Check> checks;
  bool passed() const;
};

inline const std::vector<std::string> kSuites = {"centroid", "kl", "hypergeom",
                                                 "dixie", "erlang"};

// Centroid lemma with and without replacement over the standard point sets.
// Default grid m in {5, 10, 50}, delta in {0.05, 0.1, 0.2}, 10^4 trials.
// A cell passes when both rates reach 1 - delta - 3 sigma_hat, with
// sigma_hat = sqrt(rate (1 - rate) / trials), and sampling without
// replacement does at least as well as with replacement at the same factor.
SuiteResult CentroidSuite(const VerifyOptions& options);

// KL(x || y) >= (y - x)^2 / (2y) on the 0.01 grid with x <= y, strict off
// the diagonal, plus the spot value at (0.1, 0.5).
SuiteResult KlSuite(const VerifyOptions& options);

// Empirical P{S_min >= m p_min / 2} >= 1 - K exp(-m p_min / 8) - 0.01.
SuiteResult HypergeomSuite(const VerifyOptions& options);

// Mean double-Dixie collection time <= 2 alpha K (ln K + m ln 2) for
// K in {2, 5, 10}, m in {2, 5, 50}, alpha in {1, 2}, 10^4 runs.
SuiteResult DixieSuite(const VerifyOptions& options);

// Simulated E[max X_i] and E[(max X_i)^2] below their bounds for
// K in {2, 4, 8}, m in {2, 5}, p_o in {0, 0.2}, 10^5 draws.
SuiteResult ErlangSuite(const VerifyOptions& options);

// Dispatches on a name in kSuites. Throws InvalidArgument otherwise.
SuiteResult RunSuite(const std::string& name, const VerifyOptions& options);

}  // namespace qkm::verify

#endif  // QKM_VERIFY_H_
