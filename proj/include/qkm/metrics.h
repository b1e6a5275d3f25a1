#ifndef QKM_METRICS_H_
#define QKM_METRICS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "qkm/datagen.h"
#include "qkm/geometry.h"

namespace qkm {

// Maximum-weight perfect matching on a square matrix (Hungarian method,
// O(k^3)). Returns match[row] = column.
std::vector<int> MaxWeightMatching(
    const std::vector<std::vector<double>>& weight);

// Fraction of points whose predicted label disagrees with the truth under
// the best one-to-one relabeling of cluster indices. kOutlier only matches
// kOutlier. Predicted cluster labels must lie in [0, k).
double MisclassificationRatio(std::span<const int> truth,
                              std::span<const int> predicted, std::size_t k);

struct OutlierScores {
  double precision = 1.0;  // 1.0 when nothing was declared an outlier
  double recall = 1.0;     // 1.0 when there are no true outliers
  std::size_t true_positives = 0;
  std::size_t predicted = 0;
  std::size_t actual = 0;
};

OutlierScores ScoreOutliers(std::span<const int> truth,
                            std::span<const int> predicted);

// phi(X_t; centroids of the true clusters). Upper bound on the optimal
// potential of the non-outlier points.
double ReferencePotential(const PointSet& points, const GroundTruth& truth);

// phi(X_t; centers), restricted to non-outlier points.
double InlierPotential(const PointSet& points, const GroundTruth& truth,
                       const PointSet& centers);

}  // namespace qkm

#endif  // QKM_METRICS_H_
