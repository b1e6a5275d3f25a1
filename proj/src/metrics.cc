#include "qkm/metrics.h"

#include <algorithm>
#include <limits>

#include "qkm/error.h"

namespace qkm {

std::vector<int> MaxWeightMatching(
    const std::vector<std::vector<double>>& weight) {
  const std::size_t k = weight.size();
  if (k == 0) return {};
  for (const auto& row : weight) {
    if (row.size() != k) throw InvalidArgument("matching matrix not square");
  }
  // Shortest augmenting path formulation on costs -w, 1-based potentials.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(k + 1, 0.0), v(k + 1, 0.0), minv(k + 1);
  std::vector<std::size_t> p(k + 1, 0), way(k + 1, 0);
  std::vector<char> used(k + 1);
  for (std::size_t i = 1; i <= k; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= k; ++j) {
        if (used[j]) continue;
        const double cur = -weight[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= k; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> match(k, -1);
  for (std::size_t j = 1; j <= k; ++j) {
    match[p[j] - 1] = static_cast<int>(j - 1);
  }
  return match;
}

double MisclassificationRatio(std::span<const int> truth,
                              std::span<const int> predicted, std::size_t k) {
  if (truth.size() != predicted.size()) {
    throw InvalidArgument("label vectors differ in length");
  }
  if (truth.empty()) return 0.0;
  std::vector<std::vector<double>> confusion(k, std::vector<double>(k, 0.0));
  std::size_t outlier_hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i];
    const int p = predicted[i];
    if (t == kOutlier || p == kOutlier) {
      if (t == p) ++outlier_hits;
      continue;
    }
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= k ||
        static_cast<std::size_t>(p) >= k) {
      throw InvalidArgument("label outside [0, k)");
    }
    confusion[t][p] += 1.0;
  }
  const std::vector<int> match = MaxWeightMatching(confusion);
  double correct = static_cast<double>(outlier_hits);
  for (std::size_t t = 0; t < k; ++t) correct += confusion[t][match[t]];
  return 1.0 - correct / static_cast<double>(truth.size());
}

OutlierScores ScoreOutliers(std::span<const int> truth,
                            std::span<const int> predicted) {
  if (truth.size() != predicted.size()) {
    throw InvalidArgument("label vectors differ in length");
  }
  OutlierScores s;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool t = truth[i] == kOutlier;
    const bool p = predicted[i] == kOutlier;
    s.actual += t;
    s.predicted += p;
    s.true_positives += t && p;
  }
  if (s.predicted > 0) {
    s.precision = static_cast<double>(s.true_positives) /
                  static_cast<double>(s.predicted);
  }
  if (s.actual > 0) {
    s.recall =
        static_cast<double>(s.true_positives) / static_cast<double>(s.actual);
  }
  return s;
}

double InlierPotential(const PointSet& points, const GroundTruth& truth,
                       const PointSet& centers) {
  if (truth.outlier_count() == 0) return Potential(points, centers);
  return Potential(points.Subset(truth.NonOutliers()), centers);
}

double ReferencePotential(const PointSet& points, const GroundTruth& truth) {
  if (!truth.true_centers) {
    throw InvalidArgument("reference potential needs true centers");
  }
  return InlierPotential(points, truth, *truth.true_centers);
}

}  // namespace qkm
