#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "erfit/simd/kernels.hpp"

namespace erfit::knn {

// Exact max-norm neighbor queries on a small-dimensional point cloud.
//
// Points are sorted along the first coordinate; a query only visits the
// contiguous slab of points whose first coordinate is within range, and the
// per-slab distance work goes through the SIMD kernels. Intended for the
// 1-3 dimensional clouds the estimators build, where slabs stay narrow.
class PointCloud {
 public:
  // Each span is one coordinate of all N points; all spans must have equal length.
  explicit PointCloud(std::span<const std::span<const double>> coordinates,
                      const simd::KernelSet& kernels = simd::active_kernels());

  std::size_t size() const noexcept { return n_; }
  std::size_t dims() const noexcept { return dims_; }

  // Max-norm distance from point `row` to its k-th nearest other point.
  double kth_neighbor_distance(std::size_t row, unsigned k) const;

  // Number of other points strictly closer than `radius` to point `row`.
  std::size_t count_within(std::size_t row, double radius) const;

 private:
  const double* axis() const noexcept { return sorted_.data(); }

  std::size_t n_ = 0;
  std::size_t dims_ = 0;
  std::vector<double> sorted_;         // dims_ x n_, coordinate-major, sorted by coordinate 0
  std::vector<const double*> cols_;    // cols_[d] = sorted_.data() + d * n_
  std::vector<std::size_t> position_;  // original row -> sorted position
  const simd::KernelSet* kernels_;
};

}  // namespace erfit::knn
