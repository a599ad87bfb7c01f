#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

// Inner loops of the nearest-neighbor searches behind the information
// estimators. Points are stored column-major: `cols[d][j]` is coordinate d of
// point j. Every variant must return bit-identical results to the scalar
// reference; only max, abs, subtraction and comparisons are involved, all of
// which are exact lane-wise.
namespace erfit::simd {

// out[j - begin] = max_d |cols[d][j] - query[d]| for j in [begin, end).
using ChebyshevDistanceFn = void (*)(const double* const* cols, std::size_t dims, std::size_t begin,
                                     std::size_t end, const double* query, double* out);

// Number of j in [begin, end) with max_d |cols[d][j] - query[d]| < radius.
using CountWithinFn = std::size_t (*)(const double* const* cols, std::size_t dims, std::size_t begin,
                                      std::size_t end, const double* query, double radius);

struct KernelSet {
  std::string_view name;
  ChebyshevDistanceFn chebyshev_distances;
  CountWithinFn count_within;
};

const KernelSet& scalar_kernels();

// Compiled-in variants the running CPU supports, scalar first.
std::vector<const KernelSet*> available_kernels();

// Widest supported variant. ERFIT_SIMD=<name> in the environment selects a
// specific one (falls back to scalar if unknown or unsupported).
const KernelSet& active_kernels();

// Looks up a supported variant by name; nullptr if absent.
const KernelSet* find_kernels(std::string_view name);

namespace detail {
const KernelSet* avx2_kernels();
const KernelSet* neon_kernels();
}  // namespace detail

}  // namespace erfit::simd
