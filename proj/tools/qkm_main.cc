// qkm: dataset generation, algorithm trials, bound checks and formula
// evaluation for query-based K-means.
//
// Exit codes: 0 success, 1 algorithmic or statistical failure, 2 usage or
// validation error.

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "qkm/bounds.h"
#include "qkm/datagen.h"
#include "qkm/error.h"
#include "qkm/experiment.h"
#include "qkm/report.h"
#include "qkm/rng.h"
#include "qkm/verify.h"

namespace {

using Json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct GlobalFlags {
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string scale = "desk";
  std::string out = "-";
};

// Stdout unless a path is given.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw qkm::InvalidArgument("cannot open " + path + " for writing");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

struct GenFlags {
  qkm::MixtureSpec spec;
};

int CmdGen(const GlobalFlags& g, GenFlags f) {
  f.spec.seed = g.seed;
  const qkm::Dataset ds = qkm::Generate(f.spec);
  const bool to_stdout = g.out.empty() || g.out == "-";
  if (to_stdout) {
    qkm::WriteDataset(std::cout, ds);
  } else {
    qkm::WriteDatasetFile(g.out, ds);
  }
  const auto sep = qkm::ComputeGamma(ds.points, ds.truth, 0.1);
  Json summary{{"n", ds.points.size()},
               {"k", ds.truth.num_clusters()},
               {"d", ds.points.dim()},
               {"s_min", *std::min_element(ds.truth.cluster_sizes.begin(),
                                           ds.truth.cluster_sizes.end())},
               {"cluster_sizes", ds.truth.cluster_sizes},
               {"outliers", ds.truth.outlier_count()},
               {"alpha_realized", qkm::RealizedAlpha(ds.truth)},
               {"Gamma_0.1", sep.gamma},
               {"Gamma_0.1_max", sep.max_threshold()},
               {"separation_violations", sep.violations.size()},
               {"beta", ds.truth.beta ? Json(*ds.truth.beta) : Json(nullptr)},
               {"prng", ds.info.prng},
               {"seed", ds.info.seed}};
  (to_stdout ? std::cerr : std::cout) << summary.dump() << "\n";
  return kExitOk;
}

struct RunFlags {
  std::string algorithm;
  std::string dataset;
  std::optional<std::size_t> k;
  double delta = 0.1;
  double eps = 0.1;
  std::size_t trials = 1;
  double p_e = 0.0;
  std::string gamma = "auto";
  std::optional<double> alpha;
  std::optional<double> p_o;
  std::uint64_t max_draws = 10'000'000;
  std::string probe_order = "creation";
  std::string csv;
};

std::optional<double> ParseGamma(const std::string& text, const qkm::Dataset& ds) {
  if (text == "auto") return std::nullopt;
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "known") {
    // Largest per-cluster separation threshold of the true clusters at 0.1.
    return qkm::ComputeGamma(ds.points, ds.truth, 0.1).max_threshold();
  }
  double v = 0.0;
  std::size_t used = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !(v >= 0.0)) {
    throw qkm::InvalidArgument(
        "gamma must be 'auto', 'known', 'inf' or a nonnegative number");
  }
  return v;
}

int CmdRun(const GlobalFlags& g, const RunFlags& f) {
  const qkm::Dataset ds = qkm::ReadDatasetFile(f.dataset);
  qkm::TrialSpec spec;
  spec.algorithm = qkm::ParseAlgorithm(f.algorithm);
  spec.k = f.k;
  spec.delta = f.delta;
  spec.eps = f.eps;
  spec.p_e = f.p_e;
  spec.gamma = ParseGamma(f.gamma, ds);
  spec.alpha = f.alpha;
  spec.p_o = f.p_o;
  spec.max_draws = f.max_draws;
  if (f.probe_order == "creation") {
    spec.probe_order = qkm::ProbeOrder::kCreation;
  } else if (f.probe_order == "nearest_centroid") {
    spec.probe_order = qkm::ProbeOrder::kNearestCentroid;
  } else {
    throw qkm::InvalidArgument("probe order must be creation or nearest_centroid");
  }
  spec.scale_mode = qkm::ParseScaleMode(g.scale);
  if (spec.alpha && !(*spec.alpha >= 1.0)) {
    throw qkm::InvalidArgument("alpha must be ≥ 1");
  }
  if (!(f.delta > 0.0 && f.delta < 1.0)) throw qkm::InvalidArgument("delta must be in (0, 1)");
  if (!(f.eps > 0.0 && f.eps < 1.0)) throw qkm::InvalidArgument("eps must be in (0, 1)");
  if (!(f.p_e >= 0.0 && f.p_e < 0.5)) throw qkm::InvalidArgument("p_e must be in [0, 1/2)");
  if (f.trials == 0) throw qkm::InvalidArgument("trials must be >= 1");

  const auto rows = qkm::RunTrials(ds, spec, g.seed, f.trials, g.jobs);
  Sink sink(g.out);
  std::size_t errored = 0;
  for (const auto& r : rows) {
    sink.stream() << qkm::ToJson(r).dump() << "\n";
    errored += r.error.has_value();
  }
  sink.stream() << qkm::Aggregate(rows).dump() << "\n";
  sink.stream().flush();
  if (!f.csv.empty()) {
    std::ofstream csv(f.csv, std::ios::binary);
    if (!csv) throw qkm::InvalidArgument("cannot open " + f.csv + " for writing");
    csv << qkm::CsvHeader() << "\n";
    for (const auto& r : rows) csv << qkm::ToCsvRow(r) << "\n";
  }
  if (errored == rows.size()) {
    std::cerr << "all " << rows.size() << " trials failed: "
              << rows.front().error.value_or("") << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

struct VerifyFlags {
  std::string suite;
  qkm::verify::VerifyOptions options;
};

int CmdVerify(const GlobalFlags& g, VerifyFlags f) {
  f.options.seed = g.seed;
  f.options.jobs = g.jobs;
  std::vector<std::string> suites;
  if (f.suite == "all") {
    suites = qkm::verify::kSuites;
  } else {
    suites = {f.suite};
  }
  Sink sink(g.out);
  bool all_passed = true;
  for (const auto& name : suites) {
    const auto result = qkm::verify::RunSuite(name, f.options);
    for (const auto& c : result.checks) {
      Json row{{"suite", name}, {"passed", c.passed}, {"evidence", c.evidence}};
      sink.stream() << row.dump() << "\n";
      if (!c.passed) std::cerr << "FAILED " << name << ": " << c.evidence.dump() << "\n";
    }
    sink.stream() << Json{{"suite", name},
                          {"summary", true},
                          {"checks", result.checks.size()},
                          {"passed", result.passed()}}
                         .dump()
                  << "\n";
    all_passed &= result.passed();
  }
  return all_passed ? kExitOk : kExitFailure;
}

struct BoundsFlags {
  std::string formula = "all";
  double alpha = 1.0;
  std::size_t k = 2;
  std::size_t m = 2;
  double delta = 0.1;
  double eps = 0.1;
  double p_o = 0.0;
  double p_e = 0.25;
  double n = 1e6;
  double x = 0.1;
  double y = 0.5;
};

int CmdBounds(const GlobalFlags& g, const BoundsFlags& f) {
  namespace b = qkm::bounds;
  const qkm::ScaleMode mode = qkm::ParseScaleMode(g.scale);
  Json out;
  out["inputs"] = {{"alpha", f.alpha}, {"k", f.k},     {"m", f.m},
                   {"delta", f.delta}, {"eps", f.eps}, {"p_o", f.p_o},
                   {"p_e", f.p_e},     {"n", f.n},     {"x", f.x},
                   {"y", f.y}};
  const bool all = f.formula == "all";
  bool known = all;
  auto want = [&](const char* name) {
    const bool hit = all || f.formula == name;
    known |= hit;
    return hit;
  };
  if (want("dixie")) out["dixie"] = b::DixieBound(f.alpha, f.k, f.m);
  if (want("qkmwol")) {
    const auto q = b::ThmQkmwol(f.alpha, f.k, f.delta, f.eps, f.p_o);
    out["qkmwol"] = {{"term1", q.term1}, {"term2", q.term2}, {"term3", q.term3},
                     {"phase1", q.phase1()}, {"phase2", q.phase2()},
                     {"total", q.total()}};
  }
  if (want("erlang")) {
    const auto e = b::ErlangMaxMoments(f.alpha, f.k, f.p_o, f.m);
    out["erlang"] = {{"ex", e.ex}, {"ex2", e.ex2}};
  }
  if (want("noisy-m")) {
    const auto nm = b::NoisyMParams(f.alpha, f.k, f.delta, f.eps, f.p_e);
    out["noisy_m"] = {{"M_tilde", nm.m_tilde}, {"M", nm.m}, {"rhs", nm.rhs}};
  }
  if (want("noisy-outlier")) {
    const auto p = b::NoisyOutlierParamsFor(f.alpha, f.k, f.delta, f.eps, f.p_e, f.p_o);
    out["noisy_outlier"] = {{"M_tilde", p.m_tilde}, {"M", p.m}, {"N", p.n},
                            {"N0", p.n0},
                            {"N_prime", b::NoisyOutlierNPrime(f.k, p.m, f.delta,
                                                              f.p_e, f.p_o)}};
  }
  if (want("noisy-params")) {
    const auto p = qkm::NoisyParams::Make(f.p_e, f.k,
                                          static_cast<std::size_t>(f.n), mode);
    out["noisy_params"] = {{"scale_mode", qkm::ScaleModeName(mode)},
                           {"N", p.subgraph_size},
                           {"c", p.c},
                           {"min_cluster_size", p.min_cluster_size},
                           {"votes", p.VoteCount()},
                           {"T(N)", p.DegreeThreshold(static_cast<double>(p.subgraph_size))},
                           {"theta(N)", p.OverlapThreshold(static_cast<double>(p.subgraph_size))}};
  }
  if (want("kl")) {
    out["kl"] = {{"kl", b::KlBernoulli(f.x, f.y)},
                 {"quadratic_bound", b::KlQuadraticBound(f.x, f.y)}};
  }
  if (want("hypergeom")) {
    out["hypergeom"] = b::HypergeomTailBound(f.k, f.m, 1.0 / (f.alpha * f.k));
  }
  if (want("min-cluster")) {
    out["min_cluster"] = b::MinClusterThreshold(f.n, static_cast<double>(f.k), f.eps);
  }
  if (!known) throw qkm::InvalidArgument("unknown formula '" + f.formula + "'");
  Sink sink(g.out);
  sink.stream() << out.dump() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Query-based K-means experiments"};
  app.require_subcommand(1);
  GlobalFlags g;
  app.add_option("--seed", g.seed, "Base seed; trial i uses seed+i");
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--scale", g.scale, "Noisy-recovery constants")
      ->check(CLI::IsMember({"paper", "desk"}));
  app.add_option("--out", g.out, "Output path ('-' for stdout)");

  GenFlags gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a Gaussian-mixture dataset");
  gen_cmd->fallthrough();
  gen_cmd->add_option("--n", gen.spec.n, "Points")->required();
  gen_cmd->add_option("--k", gen.spec.k, "Clusters")->required();
  gen_cmd->add_option("--d", gen.spec.d, "Dimension");
  gen_cmd->add_option("--alpha", gen.spec.alpha, "Imbalance (>= 1)");
  gen_cmd->add_option("--po", gen.spec.p_o, "Outlier fraction");
  gen_cmd->add_option("--sigma", gen.spec.sigma, "Per-cluster standard deviation");
  gen_cmd->add_option("--spread", gen.spec.center_spread, "Center cube side");
  gen_cmd->add_option("--min-sep", gen.spec.min_center_separation,
                      "Minimum center distance in sigmas");
  gen_cmd->add_option("--sep-eps", gen.spec.separation_eps,
                      "eps of the outlier separation thresholds");

  RunFlags run;
  auto* run_cmd = app.add_subcommand("run", "Run algorithm trials on a dataset");
  run_cmd->fallthrough();
  run_cmd->add_option("algorithm", run.algorithm, "noiseless|outlier|noisy|noisy-outlier")
      ->required()
      ->check(CLI::IsMember({"noiseless", "outlier", "noisy", "noisy-outlier"}));
  run_cmd->add_option("dataset", run.dataset, "Dataset file")->required();
  run_cmd->add_option("--k", run.k, "Clusters (default: from dataset)");
  run_cmd->add_option("--delta", run.delta, "Failure probability");
  run_cmd->add_option("--eps", run.eps, "Approximation slack");
  run_cmd->add_option("--trials", run.trials, "Independent trials");
  run_cmd->add_option("--pe", run.p_e, "Oracle flip probability");
  run_cmd->add_option("--gamma", run.gamma, "auto, known, inf or a radius");
  run_cmd->add_option("--alpha", run.alpha, "Imbalance used in formulas");
  run_cmd->add_option("--po", run.p_o, "Outlier fraction used in formulas");
  run_cmd->add_option("--max-draws", run.max_draws, "Draw cap per trial");
  run_cmd->add_option("--probe-order", run.probe_order, "creation|nearest_centroid");
  run_cmd->add_option("--csv", run.csv, "Also write CSV rows here");

  VerifyFlags ver;
  auto* ver_cmd = app.add_subcommand("verify", "Monte-Carlo checks of the bounds");
  ver_cmd->fallthrough();
  ver_cmd->add_option("suite", ver.suite, "centroid|kl|hypergeom|dixie|erlang|all")
      ->required()
      ->check(CLI::IsMember({"centroid", "kl", "hypergeom", "dixie", "erlang", "all"}));
  ver_cmd->add_option("--trials", ver.options.trials, "Trials per configuration");
  ver_cmd->add_option("--m", ver.options.m, "Sample size / copies");
  ver_cmd->add_option("--delta", ver.options.delta, "delta");
  ver_cmd->add_option("--k", ver.options.k, "Clusters / coupon types");
  ver_cmd->add_option("--alpha", ver.options.alpha, "Imbalance");
  ver_cmd->add_option("--po", ver.options.p_o, "Outlier fraction");

  BoundsFlags bf;
  auto* b_cmd = app.add_subcommand("bounds", "Evaluate bound formulas as JSON");
  b_cmd->fallthrough();
  b_cmd->add_option("formula", bf.formula,
                    "all|dixie|qkmwol|erlang|noisy-m|noisy-outlier|noisy-params|kl|"
                    "hypergeom|min-cluster");
  b_cmd->add_option("--alpha", bf.alpha, "alpha");
  b_cmd->add_option("--k", bf.k, "K");
  b_cmd->add_option("--m", bf.m, "m");
  b_cmd->add_option("--delta", bf.delta, "delta");
  b_cmd->add_option("--eps", bf.eps, "eps");
  b_cmd->add_option("--po", bf.p_o, "p_o");
  b_cmd->add_option("--pe", bf.p_e, "p_e");
  b_cmd->add_option("--n", bf.n, "n");
  b_cmd->add_option("--x", bf.x, "KL x");
  b_cmd->add_option("--y", bf.y, "KL y");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen_cmd) return CmdGen(g, gen);
    if (*run_cmd) return CmdRun(g, run);
    if (*ver_cmd) return CmdVerify(g, ver);
    if (*b_cmd) return CmdBounds(g, bf);
  } catch (const qkm::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const qkm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
