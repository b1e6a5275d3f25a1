// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "qkm/bounds.h"
#include "qkm/datagen.h"
#include "qkm/experiment.h"
#include "qkm/noisy_recovery.h"
#include "qkm/oracle.h"
#include "qkm/qkm_outlier.h"
#include "qkm/rng.h"
#include "qkm/verify.h"

namespace {

using qkm::Dataset;
using qkm::MixtureSpec;
using qkm::TrialSpec;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string Fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

std::size_t Jobs() {
  if (const char* j = std::getenv("QKM_JOBS")) return std::max(1, std::atoi(j));
  return 1;
}

double Mean(const std::vector<qkm::ExperimentReport>& rows,
            const std::function<double(const qkm::ExperimentReport&)>& f) {
  double s = 0.0;
  for (const auto& r : rows) s += f(r);
  return s / static_cast<double>(rows.size());
}

std::size_t Errors(const std::vector<qkm::ExperimentReport>& rows) {
  return std::count_if(rows.begin(), rows.end(),
                       [](const auto& r) { return r.error.has_value(); });
}

Dataset NoiselessData() {
  MixtureSpec s;
  s.n = 10'000;
  s.k = 5;
  s.d = 2;
  s.alpha = 1.0;
  s.min_center_separation = 30.0;
  s.center_spread = 300.0;
  s.seed = 1001;
  return qkm::Generate(s);
}

std::vector<qkm::ExperimentReport> NoiselessRows(const Dataset& data,
                                                 double delta, double eps,
                                                 std::uint64_t seed) {
  TrialSpec spec;
  spec.algorithm = qkm::Algorithm::kNoiseless;
  spec.delta = delta;
  spec.eps = eps;
  return qkm::RunTrials(data, spec, seed, 200, Jobs());
}

Outcome Criterion1() {
  const auto start = std::chrono::steady_clock::now();
  const Dataset data = NoiselessData();
  const auto rows = NoiselessRows(data, 0.1, 0.1, 1);
  std::size_t good = 0;
  for (const auto& r : rows) {
    good += !r.error && r.potential_ratio && *r.potential_ratio <= 1.1;
  }
  const double frac = static_cast<double>(good) / static_cast<double>(rows.size());
  const double secs = Seconds(start);
  return {frac >= 0.90 - 0.03 && secs < 120.0,
          Fmt("fraction ratio<=1.1 = %.4f (need >= 0.87), errors %zu, %.1fs (< 120s)",
              frac, Errors(rows), secs)};
}

Outcome Criterion2() {
  const Dataset data = NoiselessData();
  const std::array<std::pair<double, double>, 3> grid = {
      {{0.2, 0.2}, {0.1, 0.2}, {0.1, 0.1}}};
  std::vector<double> xs, ys;
  bool ok = true;
  double mean_at_001 = 0.0;
  for (const auto& [delta, eps] : grid) {
    const auto rows = NoiselessRows(data, delta, eps, 1);
    ok = ok && Errors(rows) == 0;
    const double q = Mean(rows, [](const auto& r) {
      return static_cast<double>(r.queries_total);
    });
    xs.push_back(std::log(1.0 / (delta * eps)));
    ys.push_back(std::log(q));
    if (delta * eps < 0.015) mean_at_001 = q;
  }
  const double bound = 5.0 * qkm::bounds::DixieBound(1.0, 5, 500);
  const double xm = std::accumulate(xs.begin(), xs.end(), 0.0) / 3.0;
  const double ym = std::accumulate(ys.begin(), ys.end(), 0.0) / 3.0;
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < 3; ++i) {
    sxy += (xs[i] - xm) * (ys[i] - ym);
    sxx += (xs[i] - xm) * (xs[i] - xm);
  }
  const double slope = sxy / sxx;
  ok = ok && mean_at_001 <= bound && slope <= 1.15;
  return {ok, Fmt("mean queries %.1f <= K*dixie_bound(1,5,500) = %.1f, "
                  "log-log slope %.4f (<= 1.15)",
                  mean_at_001, bound, slope)};
}

Outcome Criterion3() {
  const auto start = std::chrono::steady_clock::now();
  bool ok = true;
  std::string worst;
  double worst_margin = -1.0;
  for (double alpha : {1.0, 2.0}) {
    for (std::size_t k : {2, 4}) {
      for (double p_o : {0.0, 0.1, 0.3}) {
        MixtureSpec s;
        s.n = 5000;
        s.k = k;
        s.alpha = alpha;
        s.p_o = p_o;
        s.seed = 2000 + static_cast<std::uint64_t>(k * 100 + alpha * 10 + p_o * 10);
        const Dataset data = qkm::Generate(s);
        TrialSpec spec;
        spec.algorithm = qkm::Algorithm::kOutlier;
        spec.delta = 0.2;
        spec.eps = 0.2;
        spec.gamma = qkm::ComputeGamma(data.points, data.truth, 0.1).max_threshold();
        const auto rows = qkm::RunTrials(data, spec, 7, 100, Jobs());
        const double mean_q = Mean(rows, [](const auto& r) {
          return static_cast<double>(r.queries_total);
        });
        const double bound =
            qkm::bounds::ThmQkmwol(qkm::RealizedAlpha(data.truth), k, 0.2, 0.2,
                                   data.truth.p_o)
                .total();
        bool perfect = Errors(rows) == 0;
        for (const auto& r : rows) {
          perfect = perfect && r.outlier_precision == 1.0 && r.outlier_recall == 1.0;
        }
        const double margin = mean_q / bound;
        if (!perfect || mean_q > bound || margin > worst_margin) {
          worst_margin = std::max(worst_margin, margin);
          worst = Fmt("alpha=%g K=%zu p_o=%g: mean queries %.1f vs bound %.1f, "
                      "precision/recall all 1: %s",
                      alpha, k, p_o, mean_q, bound, perfect ? "yes" : "no");
        }
        ok = ok && perfect && mean_q <= bound;
      }
    }
  }
  const double secs = Seconds(start);
  ok = ok && secs < 300.0;
  return {ok, "12 configs, 100 trials each; tightest " + worst +
                  Fmt("; %.1fs (< 300s)", secs)};
}

Outcome SuiteOutcome(const std::string& name, const char* budget_label,
                     double budget_secs) {
  const auto start = std::chrono::steady_clock::now();
  qkm::verify::VerifyOptions o;
  o.seed = 12345;
  o.jobs = Jobs();
  const auto r = qkm::verify::RunSuite(name, o);
  std::size_t failed = 0;
  std::string first;
  for (const auto& c : r.checks) {
    if (!c.passed) {
      if (failed++ == 0) first = c.evidence.dump();
    }
  }
  const double secs = Seconds(start);
  std::string detail = Fmt("%zu/%zu cells pass, %.1fs", r.checks.size() - failed,
                           r.checks.size(), secs);
  if (budget_label) detail += budget_label;
  if (failed) detail += "; first failure " + first;
  return {failed == 0 && secs < budget_secs, detail};
}

Outcome Criterion4() { return SuiteOutcome("dixie", " (< 60s)", 60.0); }
Outcome Criterion5() { return SuiteOutcome("centroid", nullptr, 1e9); }
Outcome Criterion6() { return SuiteOutcome("kl", nullptr, 1e9); }
Outcome Criterion7() { return SuiteOutcome("hypergeom", nullptr, 1e9); }
Outcome Criterion10() { return SuiteOutcome("erlang", nullptr, 1e9); }

// Exact recovery of every true cluster from all n points.
bool ExactRecovery(const qkm::RecoveryResult& r, const qkm::GroundTruth& truth) {
  if (r.clusters.size() != truth.num_clusters() || !r.unassigned.empty()) {
    return false;
  }
  std::vector<bool> used(truth.num_clusters(), false);
  for (const auto& c : r.clusters) {
    const int label = truth.labels[c.front()];
    if (label < 0 || used[label]) return false;
    used[label] = true;
    if (c.size() != truth.cluster_sizes[label]) return false;
    for (std::size_t i : c) {
      if (truth.labels[i] != label) return false;
    }
  }
  return true;
}

Outcome Criterion8() {
  MixtureSpec s;
  s.n = 2000;
  s.k = 4;
  s.seed = 3001;
  const Dataset data = qkm::Generate(s);
  std::vector<std::size_t> all(data.points.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const std::map<double, double> required = {
      {0.0, 1.0}, {0.05, 0.9}, {0.1, 0.9}, {0.2, 0.7}};
  bool ok = true;
  std::string detail;
  for (const auto& [p_e, need] : required) {
    const auto params =
        qkm::NoisyParams::Make(p_e, 4, data.points.size(), qkm::ScaleMode::kDesk);
    std::vector<int> exact(50, 0);
    qkm::ParallelFor(50, Jobs(), [&](std::size_t t) {
      const std::uint64_t seed = 500 + t;
      qkm::OracleSession session(
          data.truth, {qkm::OracleMode::kNoisy, p_e, qkm::OracleSeed(seed)});
      qkm::Rng rng(qkm::SamplingSeed(seed));
      try {
        exact[t] = ExactRecovery(qkm::RecoverClusters(session, all, params, rng),
                                 data.truth);
      } catch (const qkm::Error&) {
        exact[t] = 0;
      }
    });
    const double rate = std::accumulate(exact.begin(), exact.end(), 0) / 50.0;
    ok = ok && rate >= need;
    detail += Fmt("%sp_e=%g: %.2f (need >= %.2f)", detail.empty() ? "" : ", ",
                  p_e, rate, need);
  }
  return {ok, "desk mode, exact recovery rate " + detail};
}

// Independent evaluators: 50-digit arithmetic and a plain integer scan.
using Big = boost::multiprecision::cpp_bin_float_50;

struct RefM {
  Big m_tilde;
  std::uint64_t m;
};

RefM ReferenceNoisyM(double alpha, std::size_t k, double delta, double eps,
                     double p_e) {
  const Big a(alpha), kk(static_cast<double>(k)), d(delta), e(eps), pe(p_e);
  const Big m_tilde =
      std::max(Big(6) * a * kk / (d * e), Big(8) * a * kk * log(Big(3) * kk / d));
  const Big rhs = Big(128) * a * kk * kk / pow(Big(2) * pe - 1, 4);
  // Smallest integer M >= max(M_tilde, 3) with M / ln M >= rhs. M / ln M is
  // increasing from e on, so bisect on the integers.
  Big start = ceil(m_tilde - Big(1e-9) * m_tilde);
  if (start < 3) start = 3;
  std::uint64_t lo = start.convert_to<std::uint64_t>();
  auto fits = [&](std::uint64_t m) {
    const Big bm(m);
    return bm / log(bm) >= rhs;
  };
  if (fits(lo)) return {m_tilde, lo};
  std::uint64_t hi = lo;
  while (!fits(hi)) hi *= 2;
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    (fits(mid) ? hi : lo) = mid;
  }
  // Confirm by scanning the neighbourhood one integer at a time.
  for (std::uint64_t m = hi > 64 ? hi - 64 : 3; m < hi; ++m) {
    if (m >= start && fits(m)) return {m_tilde, m};
  }
  return {m_tilde, hi};
}

bool RelClose(double got, const Big& want) {
  const Big diff = abs(Big(got) - want);
  return diff <= Big(1e-9) * abs(want);
}

Outcome Criterion9() {
  std::mt19937_64 gen(90210);
  std::uniform_real_distribution<double> alpha_d(1.0, 3.0), de_d(0.05, 0.5),
      pe_d(0.0, 0.35), po_d(0.0, 0.4);
  std::uniform_int_distribution<int> k_d(1, 6);
  std::size_t mismatches = 0;
  std::string first;
  for (int t = 0; t < 20; ++t) {
    const double alpha = alpha_d(gen), delta = de_d(gen), eps = de_d(gen);
    const double p_e = pe_d(gen), p_o = po_d(gen);
    const std::size_t k = static_cast<std::size_t>(k_d(gen));
    const auto got = qkm::bounds::NoisyMParams(alpha, k, delta, eps, p_e);
    const RefM want = ReferenceNoisyM(alpha, k, delta, eps, p_e);

    const auto op = qkm::bounds::NoisyOutlierParamsFor(alpha, k, delta, eps, p_e, p_o);
    const Big a(alpha), kk(static_cast<double>(k)), d(delta), e(eps), pe(p_e),
        po(p_o);
    const Big r = Big(128) * a * kk * kk / pow(Big(2) * pe - 1, 4);
    const Big mt = std::max({r * log(r), Big(8) * a * kk / (d * e),
                             Big(8) * a * kk * log(Big(4) * kk / d)});
    const Big q = 1 - po;
    const Big m = Big(2) * mt / q + log(Big(4) / d) / (Big(2) * q * q);
    const Big n = Big(64) * kk * kk * log(m) / pow(1 - Big(2) * pe, 4) + m - mt;

    const bool ok = got.m == want.m && RelClose(got.m_tilde, want.m_tilde) &&
                    RelClose(op.m_tilde, mt) && RelClose(op.m, m) &&
                    RelClose(op.n, n);
    if (!ok && mismatches++ == 0) {
      first = Fmt("alpha=%g K=%zu delta=%g eps=%g p_e=%g p_o=%g: M %llu vs %llu",
                  alpha, k, delta, eps, p_e, p_o,
                  static_cast<unsigned long long>(got.m),
                  static_cast<unsigned long long>(want.m));
    }
  }
  std::string detail = Fmt("%zu/20 tuples match (integers exact, reals 1e-9 rel)",
                           20 - mismatches);
  if (mismatches) detail += "; first mismatch " + first;
  return {mismatches == 0, detail};
}

Outcome Criterion11() {
  const auto start = std::chrono::steady_clock::now();
  MixtureSpec s;
  s.n = 8000;
  s.k = 3;
  s.p_o = 0.2;
  s.seed = 4001;
  const Dataset data = qkm::Generate(s);
  TrialSpec spec;
  spec.algorithm = qkm::Algorithm::kNoisyOutlier;
  spec.delta = 0.2;
  spec.eps = 0.2;
  spec.p_e = 0.1;
  spec.scale_mode = qkm::ScaleMode::kDesk;
  const auto rows = qkm::RunTrials(data, spec, 11, 50, Jobs());
  std::size_t good = 0;
  for (const auto& r : rows) {
    if (r.error || !r.potential_ratio) continue;
    const auto it = r.extras.find("outliers_in_clusters");
    good += *r.potential_ratio <= 1.2 && it != r.extras.end() && it->second == 0.0;
  }
  const double frac = static_cast<double>(good) / 50.0;
  const double secs = Seconds(start);
  return {frac >= 0.75 && secs < 600.0,
          Fmt("fraction with ratio<=1.2 and no outliers in clusters = %.2f "
              "(need >= 0.75), errors %zu, %.1fs (< 600s)",
              frac, Errors(rows), secs)};
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string StripWallTime(const std::string& text) {
  static const std::regex wall("\"wall_time_ms\":[-+0-9.eE]+");
  return std::regex_replace(text, wall, "\"wall_time_ms\":0");
}

Outcome Criterion12() {
  const std::string bin = QKM_BINARY;
  const std::string dir = QKM_SCRATCH_DIR;
  const std::vector<std::string> commands = {
      "gen --n 3000 --k 3 --po 0.1 --seed 77 --out {out}",
      "run noiseless {data} --trials 5 --seed 5 --out {out}",
      "run outlier {data} --delta 0.2 --eps 0.2 --gamma known --trials 5 --seed 5 --out {out}",
      "run noisy {data} --pe 0.1 --delta 0.3 --eps 0.3 --trials 3 --seed 5 --out {out}",
      "run noisy-outlier {data} --pe 0.1 --delta 0.3 --eps 0.3 --trials 2 --seed 5 --out {out}",
      "--jobs 3 run noiseless {data} --trials 5 --seed 5 --out {out}",
      "verify kl --out {out}",
      "verify dixie --k 5 --m 2 --trials 2000 --seed 3 --out {out}",
      "verify centroid --m 10 --delta 0.1 --trials 2000 --seed 3 --out {out}",
      "bounds all --out {out}",
  };
  const std::string data = dir + "/determinism_data.csv";
  std::size_t identical = 0;
  std::string first_diff;
  for (std::size_t c = 0; c < commands.size(); ++c) {
    std::string outputs[2];
    for (int rep = 0; rep < 2; ++rep) {
      std::string cmd = commands[c];
      const std::string out =
          c == 0 ? Fmt("%s/gen_%d.csv", dir.c_str(), rep)
                 : Fmt("%s/cmd%zu_%d.jsonl", dir.c_str(), c, rep);
      cmd = std::regex_replace(cmd, std::regex("\\{out\\}"), out);
      cmd = std::regex_replace(cmd, std::regex("\\{data\\}"), data);
      const std::string line = bin + " " + cmd + " > /dev/null 2>&1";
      const int rc = std::system(line.c_str());
      outputs[rep] = "exit " + std::to_string(rc) + "\n" + StripWallTime(ReadFile(out));
      if (c == 0 && rep == 0) {
        std::ofstream(data, std::ios::binary) << ReadFile(out);
      }
    }
    if (outputs[0] == outputs[1] && !outputs[0].empty()) {
      ++identical;
    } else if (first_diff.empty()) {
      first_diff = commands[c];
    }
  }
  std::string detail = Fmt("%zu/%zu commands byte-identical across reruns",
                           identical, commands.size());
  if (!first_diff.empty()) detail += "; differs: " + first_diff;
  return {identical == commands.size(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, Outcome (*)()>> criteria = {
      {1, Criterion1},  {2, Criterion2},   {3, Criterion3},   {4, Criterion4},
      {5, Criterion5},  {6, Criterion6},   {7, Criterion7},   {8, Criterion8},
      {9, Criterion9},  {10, Criterion10}, {11, Criterion11}, {12, Criterion12},
  };
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& [id, fn] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) {
      continue;
    }
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.passed;
    std::cout << (o.passed ? "PASS" : "FAIL") << " criterion " << id << ": "
              << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
