#include "qkm/noisy_recovery.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qkm/bounds.h"
#include "qkm/kernels.h"
#include "qkm/metrics.h"
#include "qkm/qkm_outlier.h"

namespace qkm {
namespace {

std::size_t CeilTolerant(double v) {
  return static_cast<std::size_t>(std::ceil(v * (1.0 - 1e-12)));
}

// Disjoint-set forest with union by size.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t Find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void Union(std::size_t a, std::size_t b) {
    a = Find(a);
    b = Find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

double NoiseLevel(const OracleSession& session) {
  return session.noisy() ? session.config().p_e : 0.0;
}

// The k largest clusters, ties kept in formation order.
std::vector<std::vector<std::size_t>> LargestClusters(
    std::vector<std::vector<std::size_t>> clusters, std::size_t k) {
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  clusters.resize(std::min(k, clusters.size()));
  return clusters;
}

ClusterSeeds AsSeeds(const std::vector<std::vector<std::size_t>>& clusters) {
  ClusterSeeds s;
  for (const auto& c : clusters) {
    s.clusters.push_back(c);
    s.representatives.push_back(c.front());
  }
  return s;
}

struct NoisyCore {
  std::vector<std::vector<std::size_t>> clusters;  // K largest, global ids
  RecoveryResult recovery;
  NoisyParams params;
  std::size_t sample_size = 0;
};

NoisyCore SampleAndRecover(OracleSession& session, const Dataset& dataset,
                           std::size_t k, std::size_t sample_size,
                           const NoisyParams& params, Rng& rng) {
  const std::size_t n = dataset.points.size();
  if (sample_size > n) {
    throw AlgorithmError("M=" + std::to_string(sample_size) + " exceeds n=" +
                         std::to_string(n) + " (" +
                         ScaleModeName(params.scale_mode) + " constants)");
  }
  NoisyCore core;
  core.params = params;
  core.sample_size = sample_size;
  const std::vector<std::size_t> sample = rng.SampleWithoutReplacement(n, sample_size);
  core.recovery = RecoverClusters(session, sample, params, rng);
  if (core.recovery.clusters.size() < k) {
    throw RecoveryError("recovered " + std::to_string(core.recovery.clusters.size()) +
                            " clusters, need K=" + std::to_string(k),
                        core.recovery);
  }
  core.clusters = LargestClusters(core.recovery.clusters, k);
  return core;
}

void FillCommon(ExperimentReport& r, const OracleSession& session,
                const Dataset& dataset, const NoisyCore& core, std::uint64_t queries,
                const RunOutput& out, std::size_t k) {
  r.scale_mode = ScaleModeName(core.params.scale_mode);
  r.draws = core.sample_size;
  r.queries_total = queries;
  r.distinct_pairs = session.distinct_pair_count();
  r.SetPotentials(InlierPotential(dataset.points, dataset.truth, out.centers.centers),
                  ReferencePotential(dataset.points, dataset.truth));
  r.misclassification_ratio =
      MisclassificationRatio(dataset.truth.labels, out.assignment.labels,
                             std::max(k, dataset.truth.num_clusters()));
  r.bound_values["subgraph_size"] = static_cast<double>(core.params.subgraph_size);
  r.extras["rounds"] = static_cast<double>(core.recovery.rounds);
  r.extras["recovered_clusters"] = static_cast<double>(core.recovery.clusters.size());
  r.extras["subgraph_queries"] = static_cast<double>(core.recovery.subgraph_queries);
  r.extras["vote_queries"] = static_cast<double>(core.recovery.vote_queries);
  r.extras["min_cluster_size"] = static_cast<double>(core.params.min_cluster_size);
  r.extras["vote_count"] = static_cast<double>(core.params.VoteCount());
}

nlohmann::ordered_json ConfigEcho(std::size_t k, double delta, double eps,
                                  double alpha, double p_e, std::size_t n) {
  return {{"k", k},     {"delta", delta}, {"eps", eps},
          {"alpha", alpha}, {"p_e", p_e}, {"n", n},
          {"subgraph_policy", "retain_unassigned_and_top_up"}};
}

}  // namespace

const char* ScaleModeName(ScaleMode mode) {
  return mode == ScaleMode::kPaper ? "paper" : "desk";
}

ScaleMode ParseScaleMode(const std::string& name) {
  if (name == "paper") return ScaleMode::kPaper;
  if (name == "desk") return ScaleMode::kDesk;
  throw InvalidArgument("scale must be 'paper' or 'desk', got '" + name + "'");
}

NoisyConstants NoisyConstants::Paper() { return {64.0, 128.0, 16.0, 6.0, 2.0}; }

NoisyConstants NoisyConstants::Desk() { return {1.0, 2.0, 4.0, 0.5, 1.0}; }

NoisyConstants NoisyConstants::For(ScaleMode mode) {
  return mode == ScaleMode::kPaper ? Paper() : Desk();
}

NoisyParams NoisyParams::Make(double p_e, std::size_t k, std::size_t n_total,
                              ScaleMode mode) {
  return Make(p_e, k, n_total, NoisyConstants::For(mode), mode);
}

NoisyParams NoisyParams::Make(double p_e, std::size_t k, std::size_t n_total,
                              const NoisyConstants& constants, ScaleMode mode) {
  if (!(p_e >= 0.0 && p_e < 0.5)) throw InvalidArgument("p_e must be in [0, 1/2)");
  if (k == 0) throw InvalidArgument("K must be >= 1");
  if (n_total == 0) throw InvalidArgument("n must be >= 1");
  NoisyParams p;
  p.p_e = p_e;
  p.k = k;
  p.n_total = n_total;
  p.constants = constants;
  p.scale_mode = mode;
  const double gap = 1.0 - 2.0 * p_e;
  const double kd = static_cast<double>(k);
  p.subgraph_size = std::max<std::size_t>(
      1, CeilTolerant(constants.subgraph * kd * kd *
                      std::log(static_cast<double>(n_total)) / std::pow(gap, 4)));
  p.c = constants.vote / (gap * gap);
  p.min_cluster_size = std::max<std::size_t>(
      1, CeilTolerant(static_cast<double>(p.subgraph_size) / kd));
  return p;
}

double NoisyParams::DegreeThreshold(double a) const {
  const double slack = std::sqrt(static_cast<double>(subgraph_size) *
                                 std::log(static_cast<double>(n_total)));
  return p_e * a + constants.degree_slack * slack / (1.0 - 2.0 * p_e);
}

double NoisyParams::OverlapThreshold(double a) const {
  const double slack = std::sqrt(static_cast<double>(subgraph_size) *
                                 std::log(static_cast<double>(n_total)));
  return 2.0 * p_e * (1.0 - p_e) * a + constants.overlap_slack * slack;
}

std::size_t NoisyParams::VoteCount() const {
  return std::max<std::size_t>(
      1, CeilTolerant(c * std::log(static_cast<double>(n_total))));
}

RecoveryResult RecoverClusters(OracleSession& session,
                               std::span<const std::size_t> candidates,
                               const NoisyParams& params, Rng& rng) {
  if (candidates.empty()) throw InvalidArgument("empty candidate set");
  const std::size_t nc = candidates.size();
  const std::size_t target = params.subgraph_size;
  const std::size_t max_rounds =
      (nc * params.k + target - 1) / target + 1;
  const auto& kernels = kernels::Active();
  const std::uint64_t before = session.query_count();

  RecoveryResult result;
  std::vector<std::vector<std::size_t>> active;  // local ids
  std::vector<std::size_t> vprime;               // local ids
  std::vector<std::size_t> pool(nc);             // unassigned, outside V'
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  std::vector<std::size_t> tested_upto(nc, 0);
  bool vprime_changed = true;

  std::vector<std::uint64_t> bits;
  std::vector<std::size_t> degree;
  while (true) {
    // Phase 1: top V' up to N with random unassigned candidates.
    std::size_t added = 0;
    while (vprime.size() < target && !pool.empty()) {
      const std::size_t pick = rng.UniformIndex(pool.size());
      vprime.push_back(pool[pick]);
      pool[pick] = pool.back();
      pool.pop_back();
      ++added;
    }
    vprime_changed |= added > 0;
    if (!vprime_changed || vprime.empty()) break;
    if (result.rounds == max_rounds) {
      result.queries = session.query_count() - before;
      throw RecoveryError("no termination within " + std::to_string(max_rounds) +
                              " rounds",
                          result);
    }
    ++result.rounds;

    const std::size_t a = vprime.size();
    const std::size_t words = (a + 63) / 64;
    bits.assign(a * words, 0);
    for (std::size_t i = 0; i < a; ++i) {
      for (std::size_t j = i + 1; j < a; ++j) {
        ++result.subgraph_queries;
        if (session.Query(candidates[vprime[i]], candidates[vprime[j]]) ==
            Answer::kSame) {
          bits[i * words + j / 64] |= std::uint64_t{1} << (j % 64);
          bits[j * words + i / 64] |= std::uint64_t{1} << (i % 64);
        }
      }
    }

    // Phase 2: merge high-degree vertices with similar +1 neighbourhoods.
    const double t_deg = params.DegreeThreshold(static_cast<double>(a));
    const double t_overlap = params.OverlapThreshold(static_cast<double>(a));
    std::vector<std::size_t> strong;
    const std::vector<std::uint64_t> empty_row(words, 0);
    for (std::size_t i = 0; i < a; ++i) {
      const std::uint64_t deg =
          kernels.xor_popcount(&bits[i * words], empty_row.data(), words);
      if (static_cast<double>(deg) >= t_deg) strong.push_back(i);
    }
    UnionFind uf(a);
    for (std::size_t x = 0; x < strong.size(); ++x) {
      for (std::size_t y = x + 1; y < strong.size(); ++y) {
        const std::size_t u = strong[x], v = strong[y];
        if (uf.Find(u) == uf.Find(v)) continue;
        const std::uint64_t diff =
            kernels.xor_popcount(&bits[u * words], &bits[v * words], words);
        if (static_cast<double>(diff) <= t_overlap) uf.Union(u, v);
      }
    }
    std::vector<std::vector<std::size_t>> groups(a);
    for (std::size_t u : strong) groups[uf.Find(u)].push_back(u);
    std::vector<char> leaves(a, 0);
    std::size_t formed = 0;
    // Components in order of their smallest member.
    std::vector<std::size_t> roots;
    for (std::size_t u : strong) {
      const std::size_t r = uf.Find(u);
      if (!groups[r].empty() && groups[r].front() == u) roots.push_back(r);
    }
    for (std::size_t r : roots) {
      if (groups[r].size() < params.min_cluster_size) continue;
      std::vector<std::size_t> cluster;
      for (std::size_t u : groups[r]) {
        cluster.push_back(vprime[u]);
        leaves[u] = 1;
      }
      active.push_back(std::move(cluster));
      ++formed;
    }
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < a; ++i) {
      if (!leaves[i]) kept.push_back(vprime[i]);
    }
    vprime = std::move(kept);
    vprime_changed = false;

    // Phase 3: majority votes for every unassigned vertex outside V'.
    std::size_t joined = 0;
    const std::size_t votes_wanted = params.VoteCount();
    std::vector<std::size_t> still;
    for (std::size_t v : pool) {
      bool placed = false;
      for (std::size_t c = tested_upto[v]; c < active.size() && !placed; ++c) {
        const auto& members = active[c];
        const std::size_t votes = std::min(votes_wanted, members.size());
        std::size_t same = 0;
        for (std::size_t pick : rng.SampleWithoutReplacement(members.size(), votes)) {
          ++result.vote_queries;
          same += session.Query(candidates[members[pick]], candidates[v]) ==
                  Answer::kSame;
        }
        if (2 * same > votes) {
          active[c].push_back(v);
          placed = true;
          ++joined;
        }
      }
      tested_upto[v] = active.size();
      if (!placed) still.push_back(v);
    }
    pool = std::move(still);
    if (pool.empty()) break;
    if (formed == 0 && joined == 0 && added == 0) break;
    vprime_changed |= formed > 0;
  }

  for (const auto& c : active) {
    std::vector<std::size_t> global;
    global.reserve(c.size());
    for (std::size_t v : c) global.push_back(candidates[v]);
    result.clusters.push_back(std::move(global));
  }
  for (std::size_t v : vprime) result.unassigned.push_back(candidates[v]);
  for (std::size_t v : pool) result.unassigned.push_back(candidates[v]);
  std::sort(result.unassigned.begin(), result.unassigned.end());
  result.queries = session.query_count() - before;
  return result;
}

RunOutput RunNoisy(OracleSession& session, const Dataset& dataset, std::size_t k,
                   double delta, double eps, double alpha, Rng& rng,
                   const NoisyRunOptions& options) {
  const double p_e = NoiseLevel(session);
  const NoisyConstants consts =
      options.constants.value_or(NoisyConstants::For(options.scale_mode));
  const bounds::NoisyM nm =
      bounds::NoisyMParams(alpha, k, delta, eps, p_e, consts.sample);
  const std::uint64_t before = session.query_count();
  const NoisyParams params = NoisyParams::Make(
      p_e, k, static_cast<std::size_t>(std::max<std::uint64_t>(nm.m, 1)), consts,
      options.scale_mode);
  const NoisyCore core = SampleAndRecover(session, dataset, k, nm.m, params, rng);

  RunOutput out;
  out.centers = EstimateCenters(AsSeeds(core.clusters), dataset.points);
  out.assignment = Assign(dataset.points, out.centers);

  ExperimentReport& r = out.report;
  r.algorithm = "noisy";
  r.config = ConfigEcho(k, delta, eps, alpha, p_e, dataset.points.size());
  FillCommon(r, session, dataset, core, session.query_count() - before, out, k);
  r.bound_values["M_tilde"] = nm.m_tilde;
  r.bound_values["M"] = static_cast<double>(nm.m);
  const double md = static_cast<double>(nm.m);
  r.bound_values["query_envelope"] = md * static_cast<double>(k * k) *
                                     std::log(md) / std::pow(1.0 - 2.0 * p_e, 4);
  r.success = r.potential_ratio ? *r.potential_ratio <= 1.0 + eps
                                : r.potential_achieved == 0.0;
  return out;
}

RunOutput RunNoisyOutlier(OracleSession& session, const Dataset& dataset,
                          std::size_t k, double delta, double eps, double alpha,
                          double p_o, Rng& rng, const NoisyRunOptions& options) {
  const double p_e = NoiseLevel(session);
  const NoisyConstants consts =
      options.constants.value_or(NoisyConstants::For(options.scale_mode));
  const bounds::NoisyOutlierParams op = bounds::NoisyOutlierParamsFor(
      alpha, k, delta, eps, p_e, p_o, consts.sample, consts.subgraph);
  if (options.gamma && !(*options.gamma >= 0.0)) {
    throw InvalidArgument("gamma must be nonnegative");
  }
  const std::size_t sample_size = std::max<std::size_t>(1, CeilTolerant(op.m));
  NoisyParams params =
      NoisyParams::Make(p_e, k, sample_size, consts, options.scale_mode);
  params.subgraph_size = std::max<std::size_t>(1, CeilTolerant(op.n));
  params.min_cluster_size = std::max<std::size_t>(
      1, CeilTolerant(op.n0 / static_cast<double>(k)));
  const std::uint64_t before = session.query_count();
  const NoisyCore core = SampleAndRecover(session, dataset, k, sample_size, params, rng);

  RunOutput out;
  const ClusterSeeds seeds = AsSeeds(core.clusters);
  out.centers = EstimateCenters(seeds, dataset.points);
  const double gamma =
      options.gamma ? *options.gamma
                    : EstimateGamma(dataset.points, seeds, out.centers.centers, eps);
  out.centers.gamma = gamma;
  out.assignment = Assign(dataset.points, out.centers);
  std::size_t contaminated = 0;
  for (std::size_t c = 0; c < core.clusters.size(); ++c) {
    for (std::size_t i : core.clusters[c]) {
      out.assignment.labels[i] = static_cast<int>(c);
      contaminated += dataset.truth.is_outlier(i);
    }
  }

  ExperimentReport& r = out.report;
  r.algorithm = "noisy-outlier";
  r.config = ConfigEcho(k, delta, eps, alpha, p_e, dataset.points.size());
  r.config["p_o"] = p_o;
  r.config["gamma_mode"] = options.gamma ? "fixed" : "auto";
  FillCommon(r, session, dataset, core, session.query_count() - before, out, k);
  r.gamma = gamma;
  const OutlierScores scores = ScoreOutliers(dataset.truth.labels, out.assignment.labels);
  r.outlier_precision = scores.precision;
  r.outlier_recall = scores.recall;
  r.bound_values["M_tilde"] = op.m_tilde;
  r.bound_values["M"] = op.m;
  r.bound_values["N"] = op.n;
  r.bound_values["N0"] = op.n0;
  r.extras["outliers_in_clusters"] = static_cast<double>(contaminated);
  r.success = (r.potential_ratio ? *r.potential_ratio <= 1.0 + eps
                                 : r.potential_achieved == 0.0) &&
              contaminated == 0;
  return out;
}

}  // namespace qkm
