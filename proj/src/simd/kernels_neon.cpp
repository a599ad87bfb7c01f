#include <arm_neon.h>

#include <cmath>

#include "erfit/simd/kernels.hpp"

namespace erfit::simd {

namespace {

inline float64x2_t chebyshev2(const double* const* cols, std::size_t dims, std::size_t j, const double* query) {
  float64x2_t acc = vdupq_n_f64(0.0);
  for (std::size_t d = 0; d < dims; ++d) {
    const float64x2_t diff = vabdq_f64(vld1q_f64(cols[d] + j), vdupq_n_f64(query[d]));
    acc = vmaxq_f64(acc, diff);
  }
  return acc;
}

inline double chebyshev1(const double* const* cols, std::size_t dims, std::size_t j, const double* query) {
  double acc = 0.0;
  for (std::size_t d = 0; d < dims; ++d) {
    const double diff = std::fabs(cols[d][j] - query[d]);
    acc = diff > acc ? diff : acc;
  }
  return acc;
}

void chebyshev_distances_neon(const double* const* cols, std::size_t dims, std::size_t begin,
                              std::size_t end, const double* query, double* out) {
  std::size_t j = begin;
  for (; j + 2 <= end; j += 2) vst1q_f64(out + (j - begin), chebyshev2(cols, dims, j, query));
  for (; j < end; ++j) out[j - begin] = chebyshev1(cols, dims, j, query);
}

std::size_t count_within_neon(const double* const* cols, std::size_t dims, std::size_t begin,
                              std::size_t end, const double* query, double radius) {
  const float64x2_t r = vdupq_n_f64(radius);
  uint64x2_t total = vdupq_n_u64(0);
  std::size_t j = begin;
  for (; j + 2 <= end; j += 2) {
    // Lanes are all-ones (== -1 as signed) when inside; subtracting counts them.
    total = vsubq_u64(total, vcltq_f64(chebyshev2(cols, dims, j, query), r));
  }
  std::size_t n = static_cast<std::size_t>(vgetq_lane_u64(total, 0) + vgetq_lane_u64(total, 1));
  for (; j < end; ++j) n += chebyshev1(cols, dims, j, query) < radius;
  return n;
}

}  // namespace

namespace detail {
const KernelSet* neon_kernels() {
  static const KernelSet k{"neon", chebyshev_distances_neon, count_within_neon};
  return &k;
}
}  // namespace detail

}  // namespace erfit::simd
