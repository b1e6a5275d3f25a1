#include "qkm/geometry.h"

#include <cmath>
#include <limits>
#include <string>

#include "qkm/error.h"
#include "qkm/kernels.h"

namespace qkm {
namespace {

void CheckFinite(std::span<const double> coords) {
  for (double v : coords) {
    if (!std::isfinite(v)) throw InvalidArgument("non-finite coordinate");
  }
}

void CheckDims(const PointSet& points, const PointSet& centers) {
  if (centers.empty()) throw InvalidArgument("empty center set");
  if (!points.empty() && points.dim() != centers.dim()) {
    throw InvalidArgument("dimension mismatch: points have d=" +
                          std::to_string(points.dim()) + ", centers have d=" +
                          std::to_string(centers.dim()));
  }
}

}  // namespace

PointSet::PointSet(std::size_t n, std::size_t dim, std::vector<double> coords)
    : dim_(dim), coords_(std::move(coords)) {
  if (dim_ == 0) throw InvalidArgument("dimension must be >= 1");
  if (coords_.size() != n * dim_) {
    throw InvalidArgument("coordinate count does not equal n*d");
  }
  CheckFinite(coords_);
}

PointSet PointSet::FromRows(
    std::initializer_list<std::initializer_list<double>> rows) {
  if (rows.size() == 0) throw InvalidArgument("no rows");
  PointSet out(rows.begin()->size());
  for (const auto& r : rows) {
    out.Append(std::span<const double>(r.begin(), r.size()));
  }
  return out;
}

void PointSet::Append(std::span<const double> point) {
  if (dim_ == 0) dim_ = point.size();
  if (point.size() != dim_ || dim_ == 0) {
    throw InvalidArgument("appended point has wrong dimension");
  }
  CheckFinite(point);
  coords_.insert(coords_.end(), point.begin(), point.end());
}

PointSet PointSet::Subset(std::span<const std::size_t> indices) const {
  PointSet out(dim_);
  out.coords_.reserve(indices.size() * dim_);
  for (std::size_t i : indices) {
    const auto r = row(i);
    out.coords_.insert(out.coords_.end(), r.begin(), r.end());
  }
  return out;
}

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("dimension mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double t = a[j] - b[j];
    s += t * t;
  }
  return s;
}

NearestResult Nearest(const PointSet& points, const PointSet& centers) {
  CheckDims(points, centers);
  const std::size_t n = points.size();
  const auto& k = kernels::Active();
  NearestResult out;
  out.index.assign(n, 0);
  out.sq_dist.assign(n, std::numeric_limits<double>::infinity());
  std::vector<double> dist(n);
  // Sweep centers in index order; strict < keeps the lowest index on ties.
  for (std::size_t c = 0; c < centers.size(); ++c) {
    k.sq_dist_to_center(points.data(), n, points.dim(), centers.row(c).data(),
                        dist.data());
    for (std::size_t i = 0; i < n; ++i) {
      if (dist[i] < out.sq_dist[i]) {
        out.sq_dist[i] = dist[i];
        out.index[i] = static_cast<int>(c);
      }
    }
  }
  return out;
}

double Potential(const PointSet& points, const PointSet& centers) {
  const NearestResult nearest = Nearest(points, centers);
  double total = 0.0;
  for (double v : nearest.sq_dist) total += v;
  return total;
}

double Potential(const PointSet& points, const CentroidSet& centers) {
  return Potential(points, centers.centers);
}

std::vector<double> Centroid(const PointSet& points,
                             std::span<const std::size_t> indices) {
  if (indices.empty()) throw InvalidArgument("centroid of an empty set");
  std::vector<double> sum(points.dim(), 0.0);
  kernels::Active().accumulate_rows(points.data(), points.dim(),
                                    indices.data(), indices.size(),
                                    sum.data());
  const double count = static_cast<double>(indices.size());
  for (double& v : sum) v /= count;
  return sum;
}

std::vector<double> Centroid(const PointSet& points) {
  std::vector<std::size_t> all(points.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return Centroid(points, all);
}

Assignment Assign(const PointSet& points, const CentroidSet& centers) {
  if (centers.gamma && !(*centers.gamma >= 0.0)) {
    throw InvalidArgument("gamma must be nonnegative");
  }
  NearestResult nearest = Nearest(points, centers.centers);
  Assignment out{std::move(nearest.index)};
  if (centers.gamma && std::isfinite(*centers.gamma)) {
    for (std::size_t i = 0; i < out.labels.size(); ++i) {
      if (std::sqrt(nearest.sq_dist[i]) > *centers.gamma) {
        out.labels[i] = kOutlier;
      }
    }
  }
  return out;
}

}  // namespace qkm
