#include "erfit/knn.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <numeric>

#include "erfit/errors.hpp"

namespace erfit::knn {

namespace {

constexpr std::size_t kChunk = 16;

// The k smallest distances seen so far, ascending.
class SmallestK {
 public:
  explicit SmallestK(unsigned k) : k_(k), best_(k, std::numeric_limits<double>::infinity()) {}

  bool full() const noexcept { return filled_ == k_; }
  double worst() const noexcept { return best_[k_ - 1]; }

  void offer(double d) {
    if (d >= best_[k_ - 1]) {
      if (!full()) ++filled_;  // only reachable when d is +inf
      return;
    }
    std::size_t i = k_ - 1;
    while (i > 0 && best_[i - 1] > d) {
      best_[i] = best_[i - 1];
      --i;
    }
    best_[i] = d;
    if (!full()) ++filled_;
  }

 private:
  unsigned k_;
  unsigned filled_ = 0;
  std::vector<double> best_;
};

}  // namespace

PointCloud::PointCloud(std::span<const std::span<const double>> coordinates, const simd::KernelSet& kernels)
    : kernels_(&kernels) {
  if (coordinates.empty()) throw InvalidInput("point cloud needs at least one coordinate");
  dims_ = coordinates.size();
  n_ = coordinates[0].size();
  for (const auto& c : coordinates) {
    if (c.size() != n_) throw ShapeError("point cloud coordinates differ in length");
  }

  std::vector<std::size_t> order(n_);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto& key = coordinates[0];
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });

  sorted_.resize(dims_ * n_);
  position_.resize(n_);
  for (std::size_t p = 0; p < n_; ++p) {
    position_[order[p]] = p;
    for (std::size_t d = 0; d < dims_; ++d) sorted_[d * n_ + p] = coordinates[d][order[p]];
  }
  cols_.resize(dims_);
  for (std::size_t d = 0; d < dims_; ++d) cols_[d] = sorted_.data() + d * n_;
}

double PointCloud::kth_neighbor_distance(std::size_t row, unsigned k) const {
  if (k == 0 || k >= n_) throw InsufficientData("k-th neighbor needs 1 <= k < N");
  const std::size_t pos = position_[row];
  std::array<double, 8> q_small{};
  std::vector<double> q_large;
  double* q = q_small.data();
  if (dims_ > q_small.size()) {
    q_large.resize(dims_);
    q = q_large.data();
  }
  for (std::size_t d = 0; d < dims_; ++d) q[d] = cols_[d][pos];

  const double* ax = axis();
  SmallestK best(k);
  std::array<double, kChunk> dist{};

  std::size_t right = pos + 1;  // next unvisited on the right
  std::size_t left = pos;       // points [0, left) unvisited on the left
  bool go_right = right < n_;
  bool go_left = left > 0;
  while (go_right || go_left) {
    if (go_right) {
      if (best.full() && ax[right] - q[0] >= best.worst()) {
        go_right = false;
      } else {
        const std::size_t end = std::min(right + kChunk, n_);
        kernels_->chebyshev_distances(cols_.data(), dims_, right, end, q, dist.data());
        for (std::size_t j = 0; j < end - right; ++j) best.offer(dist[j]);
        right = end;
        go_right = right < n_;
      }
    }
    if (go_left) {
      if (best.full() && q[0] - ax[left - 1] >= best.worst()) {
        go_left = false;
      } else {
        const std::size_t begin = left > kChunk ? left - kChunk : 0;
        kernels_->chebyshev_distances(cols_.data(), dims_, begin, left, q, dist.data());
        for (std::size_t j = 0; j < left - begin; ++j) best.offer(dist[j]);
        left = begin;
        go_left = left > 0;
      }
    }
  }
  return best.worst();
}

std::size_t PointCloud::count_within(std::size_t row, double radius) const {
  const std::size_t pos = position_[row];
  const double* ax = axis();
  const double q0 = ax[pos];
  // Rounded subtraction is monotone, so both predicates partition the sorted
  // axis exactly at the |a - q0| < radius boundary.
  const double* lo = std::partition_point(ax, ax + pos, [&](double a) { return q0 - a >= radius; });
  const double* hi = std::partition_point(ax + pos, ax + n_, [&](double a) { return a - q0 < radius; });
  const auto begin = static_cast<std::size_t>(lo - ax);
  const auto end = static_cast<std::size_t>(hi - ax);
  const std::size_t self = radius > 0.0 ? 1 : 0;
  if (dims_ == 1) return end - begin - self;

  std::array<double, 8> q_small{};
  std::vector<double> q_large;
  double* q = q_small.data();
  if (dims_ > q_small.size()) {
    q_large.resize(dims_);
    q = q_large.data();
  }
  for (std::size_t d = 0; d < dims_; ++d) q[d] = cols_[d][pos];
  return kernels_->count_within(cols_.data(), dims_, begin, end, q, radius) - self;
}

}  // namespace erfit::knn
