#ifndef QKM_GEOMETRY_H_
#define QKM_GEOMETRY_H_

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace qkm {

// Label value for points declared (or known to be) outliers. Never a valid
// cluster index.
inline constexpr int kOutlier = -1;

// n points in R^d stored row-major. Coordinates are always finite.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::size_t dim) : dim_(dim) {}
  // Throws InvalidArgument if coords.size() != n*dim, dim == 0 or any
  // coordinate is NaN/Inf.
  PointSet(std::size_t n, std::size_t dim, std::vector<double> coords);

  static PointSet FromRows(
      std::initializer_list<std::initializer_list<double>> rows);

  std::size_t size() const { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  bool empty() const { return coords_.empty(); }

  std::span<const double> row(std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  const double* data() const { return coords_.data(); }
  const std::vector<double>& coords() const { return coords_; }

  void Append(std::span<const double> point);
  PointSet Subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const PointSet&, const PointSet&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
};

// K centers plus an optional outlier-rejection radius.
struct CentroidSet {
  PointSet centers;
  std::optional<double> gamma;

  std::size_t size() const { return centers.size(); }
};

struct Assignment {
  std::vector<int> labels;  // in [0, K) or kOutlier
};

struct NearestResult {
  std::vector<int> index;         // lowest index among equidistant centers
  std::vector<double> sq_dist;    // squared distance to that center
};

double SquaredDistance(std::span<const double> a, std::span<const double> b);

// For every point, the closest center and its squared distance.
NearestResult Nearest(const PointSet& points, const PointSet& centers);

// phi(X; C) = sum_x min_c ||x - c||^2, accumulated in point order. Ignores
// centers.gamma.
double Potential(const PointSet& points, const CentroidSet& centers);
double Potential(const PointSet& points, const PointSet& centers);

// Coordinatewise mean; throws on an empty selection.
std::vector<double> Centroid(const PointSet& points);
std::vector<double> Centroid(const PointSet& points,
                             std::span<const std::size_t> indices);

// Nearest-center labels; points farther than centers.gamma become kOutlier.
Assignment Assign(const PointSet& points, const CentroidSet& centers);

}  // namespace qkm

#endif  // QKM_GEOMETRY_H_
