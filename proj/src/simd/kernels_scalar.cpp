#include <cmath>

#include "erfit/simd/kernels.hpp"

namespace erfit::simd {

namespace {

void chebyshev_distances_scalar(const double* const* cols, std::size_t dims, std::size_t begin,
                                std::size_t end, const double* query, double* out) {
  for (std::size_t j = begin; j < end; ++j) {
    double acc = 0.0;
    for (std::size_t d = 0; d < dims; ++d) {
      const double diff = std::fabs(cols[d][j] - query[d]);
      acc = diff > acc ? diff : acc;
    }
    out[j - begin] = acc;
  }
}

std::size_t count_within_scalar(const double* const* cols, std::size_t dims, std::size_t begin,
                                std::size_t end, const double* query, double radius) {
  std::size_t n = 0;
  for (std::size_t j = begin; j < end; ++j) {
    double acc = 0.0;
    for (std::size_t d = 0; d < dims; ++d) {
      const double diff = std::fabs(cols[d][j] - query[d]);
      acc = diff > acc ? diff : acc;
    }
    n += acc < radius;
  }
  return n;
}

}  // namespace

const KernelSet& scalar_kernels() {
  static const KernelSet k{"scalar", chebyshev_distances_scalar, count_within_scalar};
  return k;
}

}  // namespace erfit::simd
