#ifndef QKM_DATAGEN_H_
#define QKM_DATAGEN_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qkm/geometry.h"

namespace qkm {

// Hidden clustering of a dataset: X = X_t ∪ X_o.
struct GroundTruth {
  std::vector<int> labels;                  // [0, K) or kOutlier
  std::optional<PointSet> true_centers;     // centroid of each true cluster
  std::vector<std::size_t> cluster_sizes;   // K positive entries
  double p_o = 0.0;                         // outlier_count / n
  // Largest separation parameter b such that every outlier is beyond
  // r_i + sqrt(b * phi_i / |C_i|) for every cluster i. Unset without outliers.
  std::optional<double> beta;

  std::size_t num_clusters() const { return cluster_sizes.size(); }
  std::size_t size() const { return labels.size(); }
  std::size_t outlier_count() const;
  bool is_outlier(std::size_t i) const { return labels[i] == kOutlier; }
  std::vector<std::vector<std::size_t>> Members() const;
  std::vector<std::size_t> NonOutliers() const;
};

// Derives sizes, centroids, p_o and beta from per-point labels. Throws
// InvalidArgument if some cluster index in [0, K) has no points.
GroundTruth MakeGroundTruth(const PointSet& points, std::vector<int> labels,
                            std::size_t num_clusters);

// alpha realized by the non-outlier clusters: n_t / (K * s_min).
double RealizedAlpha(const GroundTruth& truth);

struct MixtureSpec {
  std::size_t n = 1000;
  std::size_t k = 4;
  std::size_t d = 2;
  double alpha = 1.0;
  double p_o = 0.0;
  double sigma = 1.0;
  double center_spread = 100.0;
  // Minimum pairwise distance between Gaussian means, in units of sigma.
  double min_center_separation = 10.0;
  // eps used for the separation thresholds that outliers must clear.
  double separation_eps = 0.1;
  std::uint64_t seed = 0;
};

struct DatasetInfo {
  int version = 1;
  std::uint64_t seed = 0;
  std::string prng;
  double sigma = 0.0;
};

struct Dataset {
  PointSet points;
  GroundTruth truth;
  DatasetInfo info;
};

// Gaussian mixture with the smallest cluster pinned at
// ceil(n_t / (alpha K)) points and outliers on a shell of radius
// 2 * max_i Gamma_i(separation_eps) around their nearest true center.
// Deterministic in spec.seed. Throws InvalidArgument naming the violated
// constraint when the MixtureSpec is infeasible.
Dataset Generate(const MixtureSpec& spec);

// gamma-margin: for all i != j, x in C_i, y in C_j:
// gamma * ||x - c_i|| < ||y - c_i||. Outliers are not part of any cluster.
bool CheckGammaMargin(const PointSet& points, const GroundTruth& truth,
                      double gamma);

struct SeparationReport {
  // Gamma(eps) = min_i thresholds[i].
  double gamma = 0.0;
  // thresholds[i] = max_{y in C_i} ||y - c_i|| + sqrt(eps * phi(C_i) / |C_i|).
  std::vector<double> thresholds;
  // Outliers closer to some center c_i than thresholds[i].
  std::vector<std::size_t> violations;

  double max_threshold() const;
};

SeparationReport ComputeGamma(const PointSet& points, const GroundTruth& truth,
                              double eps);

// Dataset file: one JSON header line followed by n CSV rows
// "x_1,...,x_d,label" (label -1 for outliers). Doubles are written in
// shortest round-trip form, so a write/read cycle is bit-exact.
void WriteDataset(std::ostream& out, const Dataset& dataset);
Dataset ReadDataset(std::istream& in);
void WriteDatasetFile(const std::string& path, const Dataset& dataset);
Dataset ReadDatasetFile(const std::string& path);

}  // namespace qkm

#endif  // QKM_DATAGEN_H_
