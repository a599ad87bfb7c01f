// Compiled with -mavx2; only reached after a runtime CPU check.
#include <immintrin.h>

#include <cmath>

#include "erfit/simd/kernels.hpp"

namespace erfit::simd {

namespace {

inline __m256d abs_pd(__m256d v) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v); }

// max(diff, acc) with the same operand order as the scalar `diff > acc ? diff : acc`.
inline __m256d chebyshev4(const double* const* cols, std::size_t dims, std::size_t j, const double* query) {
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t d = 0; d < dims; ++d) {
    const __m256d diff = abs_pd(_mm256_sub_pd(_mm256_loadu_pd(cols[d] + j), _mm256_set1_pd(query[d])));
    acc = _mm256_max_pd(acc, diff);
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

void chebyshev_distances_avx2(const double* const* cols, std::size_t dims, std::size_t begin,
                              std::size_t end, const double* query, double* out) {
  std::size_t j = begin;
  for (; j + 4 <= end; j += 4) _mm256_storeu_pd(out + (j - begin), chebyshev4(cols, dims, j, query));
  for (; j < end; ++j) out[j - begin] = chebyshev1(cols, dims, j, query);
}

std::size_t count_within_avx2(const double* const* cols, std::size_t dims, std::size_t begin,
                              std::size_t end, const double* query, double radius) {
  const __m256d r = _mm256_set1_pd(radius);
  std::size_t n = 0;
  std::size_t j = begin;
  for (; j + 8 <= end; j += 8) {
    const __m256d a = chebyshev4(cols, dims, j, query);
    const __m256d b = chebyshev4(cols, dims, j + 4, query);
    const int ma = _mm256_movemask_pd(_mm256_cmp_pd(a, r, _CMP_LT_OQ));
    const int mb = _mm256_movemask_pd(_mm256_cmp_pd(b, r, _CMP_LT_OQ));
    n += static_cast<std::size_t>(__builtin_popcount(static_cast<unsigned>(ma | (mb << 4))));
  }
  for (; j + 4 <= end; j += 4) {
    const __m256d a = chebyshev4(cols, dims, j, query);
    n += static_cast<std::size_t>(
        __builtin_popcount(static_cast<unsigned>(_mm256_movemask_pd(_mm256_cmp_pd(a, r, _CMP_LT_OQ)))));
  }
  for (; j < end; ++j) n += chebyshev1(cols, dims, j, query) < radius;
  return n;
}

}  // namespace

namespace detail {
const KernelSet* avx2_kernels() {
  static const KernelSet k{"avx2", chebyshev_distances_avx2, count_within_avx2};
  return &k;
}
}  // namespace detail

}  // namespace erfit::simd
