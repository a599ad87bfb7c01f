#include <doctest.h>

#include <cstring>
#include <limits>
#include <random>

#include "erfit/simd/kernels.hpp"

using namespace erfit;

namespace {

struct Cloud {
  std::vector<std::vector<double>> cols;
  std::vector<const double*> ptrs;
};

Cloud random_cloud(std::size_t dims, std::size_t n, std::uint64_t seed, bool with_ties) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Cloud c;
  c.cols.assign(dims, std::vector<double>(n));
  for (auto& col : c.cols) {
    for (auto& v : col) v = with_ties ? std::round(g(rng) * 4) / 4 : g(rng);
  }
  for (auto& col : c.cols) c.ptrs.push_back(col.data());
  return c;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar kernel computes max-norm distances") {
  std::vector<double> c0{0, 1, -2}, c1{0, 3, 1};
  const double* cols[] = {c0.data(), c1.data()};
  const double q[] = {0.5, 0.5};
  double out[3];
  simd::scalar_kernels().chebyshev_distances(cols, 2, 0, 3, q, out);
  CHECK(out[0] == 0.5);
  CHECK(out[1] == 2.5);
  CHECK(out[2] == 2.5);
  CHECK(simd::scalar_kernels().count_within(cols, 2, 0, 3, q, 2.5) == 1);
  CHECK(simd::scalar_kernels().count_within(cols, 2, 0, 3, q, 2.5000001) == 3);
  CHECK(simd::scalar_kernels().count_within(cols, 2, 1, 1, q, 10) == 0);
}

TEST_CASE("every available variant matches the scalar reference bit for bit") {
  const auto& ref = simd::scalar_kernels();
  const auto variants = simd::available_kernels();
  REQUIRE(!variants.empty());
  CHECK(variants.front() == &ref);
  for (const auto* ks : variants) {
    CAPTURE(std::string(ks->name));
    for (std::size_t dims = 1; dims <= 5; ++dims) {
      for (bool ties : {false, true}) {
        const auto cloud = random_cloud(dims, 203, dims * 31 + ties, ties);
        for (std::size_t q = 0; q < 203; q += 17) {
          std::vector<double> query(dims);
          for (std::size_t d = 0; d < dims; ++d) query[d] = cloud.cols[d][q];
          // Odd offsets exercise the unaligned head and the remainder tail.
          for (std::size_t begin : {0u, 1u, 3u}) {
            for (std::size_t end : {std::size_t{203}, std::size_t{200}, begin + 5, begin}) {
              std::vector<double> a(end - begin), b(end - begin);
              ref.chebyshev_distances(cloud.ptrs.data(), dims, begin, end, query.data(), a.data());
              ks->chebyshev_distances(cloud.ptrs.data(), dims, begin, end, query.data(), b.data());
              for (std::size_t j = 0; j < a.size(); ++j) CHECK(same_bits(a[j], b[j]));
              for (double r : {0.0, 0.25, 0.5, 1.0, a.empty() ? 1.0 : a[a.size() / 2]}) {
                CHECK(ref.count_within(cloud.ptrs.data(), dims, begin, end, query.data(), r) ==
                      ks->count_within(cloud.ptrs.data(), dims, begin, end, query.data(), r));
              }
            }
          }
        }
      }
    }
  }
}

TEST_CASE("variants agree on signed zeros and huge values") {
  std::vector<double> c0{0.0, -0.0, 1e308, -1e308, 5e-324, 3.0, -3.0, 7.0, 0.25};
  const double* cols[] = {c0.data()};
  const double q[] = {-0.0};
  std::vector<double> a(c0.size()), b(c0.size());
  simd::scalar_kernels().chebyshev_distances(cols, 1, 0, c0.size(), q, a.data());
  for (const auto* ks : simd::available_kernels()) {
    ks->chebyshev_distances(cols, 1, 0, c0.size(), q, b.data());
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(a[j] == b[j]);
  }
}

TEST_CASE("lookup by name") {
  CHECK(simd::find_kernels("scalar") == &simd::scalar_kernels());
  CHECK(simd::find_kernels("no-such-variant") == nullptr);
  const auto& active = simd::active_kernels();
  CHECK(simd::find_kernels(active.name) == &active);
}

}  // TEST_SUITE
