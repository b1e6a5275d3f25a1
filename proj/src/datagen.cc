#include "qkm/datagen.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "qkm/error.h"
#include "qkm/rng.h"

namespace qkm {
namespace {

constexpr int kFormatVersion = 1;
constexpr int kMaxPlacementAttempts = 100000;

// Per-cluster radius max ||y - c_i|| and potential phi(C_i; c_i).
struct ClusterShape {
  std::vector<double> radius;
  std::vector<double> phi;
};

ClusterShape Shapes(const PointSet& points, const GroundTruth& truth) {
  const PointSet& centers = *truth.true_centers;
  ClusterShape s{std::vector<double>(truth.num_clusters(), 0.0),
                 std::vector<double>(truth.num_clusters(), 0.0)};
  for (std::size_t i = 0; i < points.size(); ++i) {
    const int l = truth.labels[i];
    if (l == kOutlier) continue;
    const double sq = SquaredDistance(points.row(i), centers.row(l));
    s.phi[l] += sq;
    s.radius[l] = std::max(s.radius[l], std::sqrt(sq));
  }
  return s;
}

void AppendDouble(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

double ParseDouble(std::string_view field, std::size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw InvalidArgument("dataset line " + std::to_string(line_no) +
                          ": cannot parse number '" + std::string(field) + "'");
  }
  return v;
}

std::vector<std::size_t> AllocateSizes(const MixtureSpec& spec,
                                       std::size_t n_t) {
  const double exact_min =
      static_cast<double>(n_t) / (spec.alpha * static_cast<double>(spec.k));
  if (exact_min < 1.0) {
    throw InvalidArgument(
        "infeasible mixture: n(1-p_o)/(alpha*K) must be >= 1 (got " +
        std::to_string(exact_min) + ")");
  }
  std::size_t s_min = static_cast<std::size_t>(std::ceil(exact_min - 1e-12));
  if (spec.k == 1) return {n_t};
  if (n_t - s_min < (spec.k - 1) * s_min) s_min = n_t / spec.k;
  std::vector<std::size_t> sizes(spec.k, 0);
  sizes[0] = s_min;
  const std::size_t rest = n_t - s_min;
  const std::size_t base = rest / (spec.k - 1);
  const std::size_t extra = rest % (spec.k - 1);
  for (std::size_t c = 1; c < spec.k; ++c) {
    sizes[c] = base + (c - 1 < extra ? 1 : 0);
  }
  return sizes;
}

void Validate(const MixtureSpec& spec) {
  if (spec.n == 0) throw InvalidArgument("n must be >= 1");
  if (spec.k == 0) throw InvalidArgument("K must be >= 1");
  if (spec.d == 0) throw InvalidArgument("d must be >= 1");
  if (!(spec.alpha >= 1.0)) throw InvalidArgument("alpha must be ≥ 1");
  if (spec.alpha > static_cast<double>(spec.n) / static_cast<double>(spec.k)) {
    throw InvalidArgument("alpha must be <= n/K");
  }
  if (!(spec.p_o >= 0.0 && spec.p_o < 1.0)) {
    throw InvalidArgument("p_o must be in [0, 1)");
  }
  if (!(spec.sigma > 0.0)) throw InvalidArgument("sigma must be > 0");
  if (!(spec.center_spread > 0.0)) {
    throw InvalidArgument("center_spread must be > 0");
  }
  if (!(spec.separation_eps > 0.0 && spec.separation_eps < 1.0)) {
    throw InvalidArgument("separation eps must be in (0, 1)");
  }
}

}  // namespace

std::size_t GroundTruth::outlier_count() const {
  return static_cast<std::size_t>(
      std::count(labels.begin(), labels.end(), kOutlier));
}

std::vector<std::vector<std::size_t>> GroundTruth::Members() const {
  std::vector<std::vector<std::size_t>> out(num_clusters());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != kOutlier) out[labels[i]].push_back(i);
  }
  return out;
}

std::vector<std::size_t> GroundTruth::NonOutliers() const {
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != kOutlier) out.push_back(i);
  }
  return out;
}

GroundTruth MakeGroundTruth(const PointSet& points, std::vector<int> labels,
                            std::size_t num_clusters) {
  if (labels.size() != points.size()) {
    throw InvalidArgument("label count does not match point count");
  }
  if (num_clusters == 0) throw InvalidArgument("K must be >= 1");
  GroundTruth truth;
  truth.labels = std::move(labels);
  truth.cluster_sizes.assign(num_clusters, 0);
  for (int l : truth.labels) {
    if (l == kOutlier) continue;
    if (l < 0 || static_cast<std::size_t>(l) >= num_clusters) {
      throw InvalidArgument("label out of range: " + std::to_string(l));
    }
    ++truth.cluster_sizes[l];
  }
  for (std::size_t c = 0; c < num_clusters; ++c) {
    if (truth.cluster_sizes[c] == 0) {
      throw InvalidArgument("cluster " + std::to_string(c) + " has no points");
    }
  }
  truth.p_o = static_cast<double>(truth.outlier_count()) /
              static_cast<double>(truth.labels.size());

  PointSet centers(points.dim());
  for (const auto& members : truth.Members()) {
    centers.Append(Centroid(points, members));
  }
  truth.true_centers = std::move(centers);

  if (truth.outlier_count() > 0) {
    const ClusterShape shape = Shapes(points, truth);
    double beta = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (truth.labels[i] != kOutlier) continue;
      for (std::size_t c = 0; c < num_clusters; ++c) {
        const double gap =
            std::sqrt(SquaredDistance(points.row(i), truth.true_centers->row(c))) -
            shape.radius[c];
        if (gap <= 0.0) {
          beta = 0.0;
          continue;
        }
        if (shape.phi[c] > 0.0) {
          beta = std::min(beta, gap * gap *
                                    static_cast<double>(truth.cluster_sizes[c]) /
                                    shape.phi[c]);
        }
      }
    }
    truth.beta = beta;
  }
  return truth;
}

double RealizedAlpha(const GroundTruth& truth) {
  const std::size_t s_min =
      *std::min_element(truth.cluster_sizes.begin(), truth.cluster_sizes.end());
  const double n_t = static_cast<double>(truth.size() - truth.outlier_count());
  return n_t / (static_cast<double>(truth.num_clusters()) *
                static_cast<double>(s_min));
}

Dataset Generate(const MixtureSpec& spec) {
  Validate(spec);
  const std::size_t n_o = static_cast<std::size_t>(
      std::llround(spec.p_o * static_cast<double>(spec.n)));
  const std::size_t n_t = spec.n - n_o;
  if (n_t < spec.k) {
    throw InvalidArgument("infeasible mixture: fewer non-outliers than clusters");
  }
  const std::vector<std::size_t> sizes = AllocateSizes(spec, n_t);

  Rng rng(spec.seed);
  const double min_sep = spec.min_center_separation * spec.sigma;
  PointSet means(spec.d);
  std::vector<double> candidate(spec.d);
  for (std::size_t c = 0; c < spec.k; ++c) {
    int attempts = 0;
    for (;;) {
      if (++attempts > kMaxPlacementAttempts) {
        throw InvalidArgument(
            "infeasible mixture: cannot place centers at pairwise distance >= " +
            std::to_string(min_sep) + " inside a cube of side " +
            std::to_string(spec.center_spread));
      }
      for (double& v : candidate) v = rng.Uniform(0.0, spec.center_spread);
      bool ok = true;
      for (std::size_t p = 0; p < means.size() && ok; ++p) {
        ok = std::sqrt(SquaredDistance(candidate, means.row(p))) >= min_sep;
      }
      if (ok) break;
    }
    means.Append(candidate);
  }

  std::vector<double> coords;
  coords.reserve(spec.n * spec.d);
  std::vector<int> labels;
  labels.reserve(spec.n);
  for (std::size_t c = 0; c < spec.k; ++c) {
    const auto mu = means.row(c);
    for (std::size_t s = 0; s < sizes[c]; ++s) {
      for (std::size_t j = 0; j < spec.d; ++j) {
        coords.push_back(mu[j] + spec.sigma * rng.Normal());
      }
      labels.push_back(static_cast<int>(c));
    }
  }

  Dataset out;
  if (n_o > 0) {
    const PointSet inliers(n_t, spec.d, coords);
    const GroundTruth partial = MakeGroundTruth(
        inliers, std::vector<int>(labels.begin(), labels.end()), spec.k);
    const SeparationReport sep =
        ComputeGamma(inliers, partial, spec.separation_eps);
    const double radius = 2.0 * sep.max_threshold();
    const PointSet& centers = *partial.true_centers;
    std::vector<double> dir(spec.d);
    for (std::size_t o = 0; o < n_o; ++o) {
      int attempts = 0;
      for (;;) {
        if (++attempts > kMaxPlacementAttempts) {
          throw InvalidArgument(
              "infeasible mixture: cannot place separated outliers; increase "
              "center_spread or lower sigma");
        }
        const std::size_t anchor = rng.UniformIndex(spec.k);
        double norm2 = 0.0;
        for (double& v : dir) {
          v = rng.Normal();
          norm2 += v * v;
        }
        if (norm2 == 0.0) continue;
        const double scale = radius / std::sqrt(norm2);
        for (std::size_t j = 0; j < spec.d; ++j) {
          candidate[j] = centers.row(anchor)[j] + scale * dir[j];
        }
        // The anchor must be the nearest center (within rounding).
        bool ok = true;
        for (std::size_t c = 0; c < spec.k && ok; ++c) {
          ok = std::sqrt(SquaredDistance(candidate, centers.row(c))) >=
               radius * (1.0 - 1e-12);
        }
        if (ok) break;
      }
      coords.insert(coords.end(), candidate.begin(), candidate.end());
      labels.push_back(kOutlier);
    }
  }

  out.points = PointSet(spec.n, spec.d, std::move(coords));
  out.truth = MakeGroundTruth(out.points, std::move(labels), spec.k);
  out.info = DatasetInfo{kFormatVersion, spec.seed, std::string(Rng::kName),
                         spec.sigma};
  return out;
}

bool CheckGammaMargin(const PointSet& points, const GroundTruth& truth,
                      double gamma) {
  if (!truth.true_centers) {
    throw InvalidArgument("gamma-margin check needs true centers");
  }
  const std::size_t k = truth.num_clusters();
  const ClusterShape shape = Shapes(points, truth);
  // For cluster i: gamma * max_{x in C_i} ||x - c_i|| < min_{y not in C_i}
  // ||y - c_i|| covers every (x, y) pair of the quantifier.
  for (std::size_t c = 0; c < k; ++c) {
    const auto center = truth.true_centers->row(c);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const int l = truth.labels[i];
      if (l == kOutlier || static_cast<std::size_t>(l) == c) continue;
      const double dist = std::sqrt(SquaredDistance(points.row(i), center));
      if (!(gamma * shape.radius[c] < dist)) return false;
    }
  }
  return true;
}

double SeparationReport::max_threshold() const {
  return thresholds.empty()
             ? 0.0
             : *std::max_element(thresholds.begin(), thresholds.end());
}

SeparationReport ComputeGamma(const PointSet& points, const GroundTruth& truth,
                              double eps) {
  if (truth.num_clusters() == 0 || !truth.true_centers) {
    throw InvalidArgument("separation needs at least one cluster with center");
  }
  const ClusterShape shape = Shapes(points, truth);
  SeparationReport report;
  for (std::size_t c = 0; c < truth.num_clusters(); ++c) {
    report.thresholds.push_back(
        shape.radius[c] +
        std::sqrt(eps * shape.phi[c] /
                  static_cast<double>(truth.cluster_sizes[c])));
  }
  report.gamma =
      *std::min_element(report.thresholds.begin(), report.thresholds.end());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (truth.labels[i] != kOutlier) continue;
    for (std::size_t c = 0; c < truth.num_clusters(); ++c) {
      const double dist =
          std::sqrt(SquaredDistance(points.row(i), truth.true_centers->row(c)));
      if (!(dist > report.thresholds[c])) {
        report.violations.push_back(i);
        break;
      }
    }
  }
  return report;
}

void WriteDataset(std::ostream& out, const Dataset& dataset) {
  const PointSet& pts = dataset.points;
  nlohmann::ordered_json header;
  header["version"] = dataset.info.version;
  header["n"] = pts.size();
  header["d"] = pts.dim();
  header["K"] = dataset.truth.num_clusters();
  header["p_o"] = dataset.truth.p_o;
  header["seed"] = dataset.info.seed;
  header["prng"] = dataset.info.prng;
  header["sigma"] = dataset.info.sigma;
  std::string buf = header.dump();
  buf.push_back('\n');
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (double v : pts.row(i)) {
      AppendDouble(buf, v);
      buf.push_back(',');
    }
    buf += std::to_string(dataset.truth.labels[i]);
    buf.push_back('\n');
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

Dataset ReadDataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("empty dataset file");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("bad dataset header: ") + e.what());
  }
  for (const char* key : {"version", "n", "d", "K"}) {
    if (!header.contains(key)) {
      throw InvalidArgument(std::string("dataset header lacks '") + key + "'");
    }
  }
  Dataset out;
  out.info.version = header["version"].get<int>();
  if (out.info.version != kFormatVersion) {
    throw InvalidArgument("unsupported dataset version " +
                          std::to_string(out.info.version));
  }
  out.info.seed = header.value("seed", std::uint64_t{0});
  out.info.prng = header.value("prng", std::string());
  out.info.sigma = header.value("sigma", 0.0);
  const auto n = header["n"].get<std::size_t>();
  const auto d = header["d"].get<std::size_t>();
  const auto k = header["K"].get<std::size_t>();

  std::vector<double> coords;
  coords.reserve(n * d);
  std::vector<int> labels;
  labels.reserve(n);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::string_view rest(line);
    std::size_t fields = 0;
    for (;;) {
      const std::size_t comma = rest.find(',');
      const std::string_view field = rest.substr(0, comma);
      if (comma == std::string_view::npos) {
        if (fields != d) {
          throw InvalidArgument("dataset line " + std::to_string(line_no) +
                                ": expected " + std::to_string(d + 1) +
                                " fields");
        }
        labels.push_back(static_cast<int>(ParseDouble(field, line_no)));
        break;
      }
      coords.push_back(ParseDouble(field, line_no));
      ++fields;
      rest.remove_prefix(comma + 1);
    }
  }
  if (labels.size() != n) {
    throw InvalidArgument("dataset header says n=" + std::to_string(n) +
                          " but file has " + std::to_string(labels.size()) +
                          " rows");
  }
  out.points = PointSet(n, d, std::move(coords));
  out.truth = MakeGroundTruth(out.points, std::move(labels), k);
  return out;
}

void WriteDatasetFile(const std::string& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open " + path + " for writing");
  WriteDataset(out, dataset);
  if (!out) throw InvalidArgument("write failed: " + path);
}

Dataset ReadDatasetFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path);
  return ReadDataset(in);
}

}  // namespace qkm
