#include "qkm/verify.h"

#include <cmath>
#include <limits>

#include "qkm/bounds.h"
#include "qkm/error.h"
#include "qkm/experiment.h"
#include "qkm/rng.h"

namespace qkm::verify {
namespace {

using Json = nlohmann::ordered_json;

template <typename T>
std::vector<T> GridOr(const std::optional<T>& override, std::vector<T> grid) {
  if (override) return {*override};
  return grid;
}

std::uint64_t CellSeed(const VerifyOptions& o, std::uint64_t suite,
                       std::uint64_t cell) {
  return DeriveSeed(DeriveSeed(o.seed, suite), cell);
}

}  // namespace

bool SuiteResult::passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

SuiteResult CentroidSuite(const VerifyOptions& o) {
  const std::size_t trials = o.trials.value_or(10'000);
  const auto ms = GridOr<std::size_t>(o.m, {5, 10, 50});
  const auto deltas = GridOr<double>(o.delta, {0.05, 0.1, 0.2});
  const auto sets = bounds::StandardPointSets();
  struct Cell {
    std::size_t set, m;
    double delta;
  };
  std::vector<Cell> cells;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    for (std::size_t m : ms) {
      for (double d : deltas) cells.push_back({s, m, d});
    }
  }
  SuiteResult out{"centroid", std::vector<Check>(cells.size())};
  ParallelFor(cells.size(), o.jobs, [&](std::size_t i) {
    const Cell& c = cells[i];
    const auto r = bounds::VerifyCentroidLemma(sets[c.set].points, c.m, c.delta,
                                               trials, CellSeed(o, 1, i));
    // Floor 1 - delta - 3 sigma_hat, sigma_hat the binomial error of the rate.
    auto floor = [&](double rate) {
      return 1.0 - c.delta -
             3.0 * std::sqrt(rate * (1.0 - rate) / static_cast<double>(trials));
    };
    Check& check = out.checks[i];
    check.passed = r.with_replacement >= floor(r.with_replacement) &&
                   r.without_replacement_tight >= floor(r.without_replacement_tight) &&
                   r.without_replacement_loose >= r.with_replacement;
    check.evidence = Json{{"point_set", sets[c.set].name},
                          {"m", c.m},
                          {"delta", c.delta},
                          {"trials", trials},
                          {"loose_factor", r.loose_factor},
                          {"tight_factor", r.tight_factor},
                          {"rate_with_replacement", r.with_replacement},
                          {"rate_without_replacement_loose", r.without_replacement_loose},
                          {"rate_without_replacement_tight", r.without_replacement_tight},
                          {"required_with", floor(r.with_replacement)},
                          {"required_without", floor(r.without_replacement_tight)}};
  });
  return out;
}

SuiteResult KlSuite(const VerifyOptions&) {
  SuiteResult out{"kl", {}};
  std::size_t cells = 0, violations = 0;
  double min_gap = std::numeric_limits<double>::infinity();
  Json worst;
  for (int i = 1; i <= 99; ++i) {
    for (int j = i; j <= 99; ++j) {
      const double x = i / 100.0, y = j / 100.0;
      const double kl = bounds::KlBernoulli(x, y);
      const double quad = bounds::KlQuadraticBound(x, y);
      ++cells;
      const bool ok = i == j ? (kl == 0.0 && quad == 0.0) : kl > quad;
      if (!ok) {
        ++violations;
        worst = Json{{"x", x}, {"y", y}, {"kl", kl}, {"bound", quad}};
      }
      if (i != j) min_gap = std::min(min_gap, kl - quad);
    }
  }
  Check grid;
  grid.passed = violations == 0;
  grid.evidence = Json{{"check", "grid"},
                       {"cells", cells},
                       {"violations", violations},
                       {"min_gap_off_diagonal", min_gap}};
  if (!worst.is_null()) grid.evidence["violation"] = worst;
  out.checks.push_back(grid);

  Check spot;
  const double kl = bounds::KlBernoulli(0.1, 0.5);
  const double quad = bounds::KlQuadraticBound(0.1, 0.5);
  spot.passed = std::abs(kl - 0.36806420716849707) <= 1e-4 && kl >= quad;
  spot.evidence = Json{{"check", "spot"}, {"x", 0.1}, {"y", 0.5},
                       {"kl", kl}, {"bound", quad}, {"expected_kl", 0.3681}};
  out.checks.push_back(spot);
  return out;
}

SuiteResult HypergeomSuite(const VerifyOptions& o) {
  struct Cell {
    std::size_t n;
    std::vector<double> probs;
    std::size_t m;
  };
  std::vector<Cell> cells = {
      {10'000, {0.1, 0.2, 0.3, 0.4}, 400},
      {10'000, {1.0}, 100},
      {5'000, {0.2, 0.3, 0.5}, 200},
      {10'000, {0.05, 0.95}, 1000},
      {2'000, {0.25, 0.25, 0.25, 0.25}, 100},
  };
  if (o.m) {
    for (auto& c : cells) c.m = std::min(*o.m, c.n);
  }
  const std::size_t trials = o.trials.value_or(10'000);
  SuiteResult out{"hypergeom", std::vector<Check>(cells.size())};
  ParallelFor(cells.size(), o.jobs, [&](std::size_t i) {
    const Cell& c = cells[i];
    const auto r = bounds::HypergeomTailCheck(c.n, c.probs, c.m, trials,
                                              CellSeed(o, 3, i));
    Check& check = out.checks[i];
    check.passed = r.empirical >= r.bound - 0.01;
    check.evidence = Json{{"n", c.n},         {"probs", c.probs},
                          {"m", c.m},         {"trials", trials},
                          {"p_min", r.p_min}, {"empirical", r.empirical},
                          {"bound", r.bound}};
  });
  return out;
}

SuiteResult DixieSuite(const VerifyOptions& o) {
  const auto ks = GridOr<std::size_t>(o.k, {2, 5, 10});
  const auto ms = GridOr<std::size_t>(o.m, {2, 5, 50});
  const auto alphas = GridOr<double>(o.alpha, {1.0, 2.0});
  const std::size_t runs = o.trials.value_or(10'000);
  struct Cell {
    std::size_t k, m;
    double alpha;
  };
  std::vector<Cell> cells;
  for (std::size_t k : ks) {
    for (std::size_t m : ms) {
      for (double a : alphas) cells.push_back({k, m, a});
    }
  }
  SuiteResult out{"dixie", std::vector<Check>(cells.size())};
  ParallelFor(cells.size(), o.jobs, [&](std::size_t i) {
    const Cell& c = cells[i];
    const auto probs = bounds::SkewedProbabilities(c.k, c.alpha);
    const auto est = bounds::SimulateDoubleDixie(probs, c.m, runs, CellSeed(o, 4, i));
    const double bound = bounds::DixieBound(c.alpha, c.k, c.m);
    Check& check = out.checks[i];
    check.passed = est.mean <= bound;
    check.evidence = Json{{"k", c.k},         {"m", c.m},
                          {"alpha", c.alpha}, {"runs", runs},
                          {"mean", est.mean}, {"bound", bound}};
  });
  return out;
}

SuiteResult ErlangSuite(const VerifyOptions& o) {
  const auto ks = GridOr<std::size_t>(o.k, {2, 4, 8});
  const auto ms = GridOr<std::size_t>(o.m, {2, 5});
  const auto pos = GridOr<double>(o.p_o, {0.0, 0.2});
  const double alpha = o.alpha.value_or(1.0);
  const std::size_t draws = o.trials.value_or(100'000);
  struct Cell {
    std::size_t k, m;
    double p_o;
  };
  std::vector<Cell> cells;
  for (std::size_t k : ks) {
    for (std::size_t m : ms) {
      for (double p : pos) cells.push_back({k, m, p});
    }
  }
  SuiteResult out{"erlang", std::vector<Check>(cells.size())};
  ParallelFor(cells.size(), o.jobs, [&](std::size_t i) {
    const Cell& c = cells[i];
    const auto b = bounds::ErlangMaxMoments(alpha, c.k, c.p_o, c.m);
    const auto rates = bounds::ErlangRates(c.k, alpha, c.p_o);
    const auto est = bounds::SimulateErlangMax(rates, c.m, draws, CellSeed(o, 5, i));
    Check& check = out.checks[i];
    check.passed = est.mean <= b.ex && est.second_moment <= b.ex2;
    check.evidence = Json{{"k", c.k},
                          {"m", c.m},
                          {"p_o", c.p_o},
                          {"alpha", alpha},
                          {"draws", draws},
                          {"mean", est.mean},
                          {"ex_bound", b.ex},
                          {"second_moment", est.second_moment},
                          {"ex2_bound", b.ex2}};
  });
  return out;
}

SuiteResult RunSuite(const std::string& name, const VerifyOptions& options) {
  if (name == "centroid") return CentroidSuite(options);
  if (name == "kl") return KlSuite(options);
  if (name == "hypergeom") return HypergeomSuite(options);
  if (name == "dixie") return DixieSuite(options);
  if (name == "erlang") return ErlangSuite(options);
  throw InvalidArgument("unknown suite '" + name +
                        "' (centroid, kl, hypergeom, dixie, erlang, all)");
}

}  // namespace qkm::verify
