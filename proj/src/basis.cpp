#include "erfit/basis.hpp"

#include <limits>
#include <numeric>

#include "erfit/errors.hpp"

namespace erfit::basis {

namespace {

double ipow(double base, unsigned e) {
  double r = 1.0;
  while (e) {
    if (e & 1u) r *= base;
    base *= base;
    e >>= 1u;
  }
  return r;
}

// Appends every exponent vector with the given total degree, in descending
// lexicographic order, to `out`.
void compositions(std::size_t d, unsigned degree, std::vector<unsigned>& prefix,
                  std::vector<TermDescriptor>& out) {
  const std::size_t pos = prefix.size();
  if (pos + 1 == d) {
    prefix.push_back(degree);
    out.push_back(TermDescriptor::monomial(prefix));
    prefix.pop_back();
    return;
  }
  for (unsigned e = degree + 1; e-- > 0;) {
    prefix.push_back(e);
    compositions(d, degree - e, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

unsigned TermDescriptor::total_degree() const noexcept {
  return std::accumulate(exponents.begin(), exponents.end(), 0u);
}

double TermDescriptor::evaluate(std::span<const double> state) const {
  if (!is_monomial()) return evaluator(state);
  if (state.size() != exponents.size()) {
    throw ShapeError("term expects " + std::to_string(exponents.size()) + " state variables, got " +
                     std::to_string(state.size()));
  }
  double v = 1.0;
  for (std::size_t j = 0; j < exponents.size(); ++j) {
    if (exponents[j]) v *= ipow(state[j], exponents[j]);
  }
  return v;
}

std::uint64_t count_library_columns(std::size_t d, unsigned max_degree) {
  if (d == 0) throw InvalidInput("library needs at least one state variable");
  // C(d+m, m) = prod_{i=1..m} (d+i)/i; every partial product is itself a
  // binomial coefficient, so the division is exact.
  unsigned __int128 c = 1;
  constexpr auto limit = static_cast<unsigned __int128>(std::numeric_limits<std::int64_t>::max());
  for (unsigned i = 1; i <= max_degree; ++i) {
    c = c * (static_cast<unsigned __int128>(d) + i) / i;
    if (c > limit) {
      throw CapacityError("library size C(" + std::to_string(d + max_degree) + ", " +
                          std::to_string(max_degree) + ") exceeds the platform index range");
    }
  }
  return static_cast<std::uint64_t>(c);
}

std::vector<TermDescriptor> polynomial_terms(std::size_t d, unsigned max_degree) {
  const auto k = count_library_columns(d, max_degree);
  std::vector<TermDescriptor> out;
  out.reserve(k);
  std::vector<unsigned> prefix;
  prefix.reserve(d);
  for (unsigned g = 0; g <= max_degree; ++g) compositions(d, g, prefix, out);
  return out;
}

BasisLibrary build_polynomial_library(const Matrix& x, unsigned max_degree) {
  if (x.rows() < 1 || x.cols() < 1) throw InvalidInput("library needs at least one row and one column");
  const auto k = count_library_columns(static_cast<std::size_t>(x.cols()), max_degree);
  const auto cells = static_cast<unsigned __int128>(k) * static_cast<unsigned __int128>(x.rows());
  if (cells > static_cast<unsigned __int128>(std::numeric_limits<Index>::max())) {
    throw CapacityError("library matrix with " + std::to_string(k) + " columns and " +
                        std::to_string(x.rows()) + " rows is too large");
  }
  auto terms = polynomial_terms(static_cast<std::size_t>(x.cols()), max_degree);

  BasisLibrary lib;
  lib.source_dims = static_cast<std::size_t>(x.cols());
  lib.phi.resize(x.rows(), static_cast<Index>(terms.size()));
  for (std::size_t j = 0; j < terms.size(); ++j) {
    auto col = lib.phi.col(static_cast<Index>(j));
    col.setOnes();
    const auto& e = terms[j].exponents;
    for (std::size_t v = 0; v < e.size(); ++v) {
      if (e[v] == 0) continue;
      for (Index i = 0; i < x.rows(); ++i) col(i) *= ipow(x(i, static_cast<Index>(v)), e[v]);
    }
  }
  lib.terms = std::move(terms);
  return lib;
}

BasisLibrary build_library(const Matrix& x, std::vector<TermDescriptor> terms) {
  BasisLibrary lib;
  lib.source_dims = static_cast<std::size_t>(x.cols());
  lib.phi.resize(x.rows(), static_cast<Index>(terms.size()));
  std::vector<double> row(static_cast<std::size_t>(x.cols()));
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index v = 0; v < x.cols(); ++v) row[static_cast<std::size_t>(v)] = x(i, v);
    for (std::size_t j = 0; j < terms.size(); ++j) lib.phi(i, static_cast<Index>(j)) = terms[j].evaluate(row);
  }
  linalg::require_finite(lib.phi, "user basis evaluation");
  lib.terms = std::move(terms);
  return lib;
}

Vector evaluate_terms(std::span<const TermDescriptor> terms, std::span<const double> state) {
  Vector row(static_cast<Index>(terms.size()));
  for (std::size_t j = 0; j < terms.size(); ++j) row(static_cast<Index>(j)) = terms[j].evaluate(state);
  return row;
}

std::string render_term(const TermDescriptor& t, std::span<const std::string> var_names) {
  if (!t.is_monomial()) return t.label;
  if (var_names.size() != t.exponents.size()) {
    throw ShapeError("render_term: " + std::to_string(var_names.size()) + " names for " +
                     std::to_string(t.exponents.size()) + " variables");
  }
  std::string out;
  for (std::size_t j = 0; j < t.exponents.size(); ++j) {
    if (t.exponents[j] == 0) continue;
    if (!out.empty()) out += '*';
    out += var_names[j];
    if (t.exponents[j] > 1) out += '^' + std::to_string(t.exponents[j]);
  }
  return out.empty() ? "1" : out;
}

std::vector<std::string> default_var_names(std::size_t d) {
  std::vector<std::string> names;
  names.reserve(d);
  for (std::size_t j = 0; j < d; ++j) names.push_back("x" + std::to_string(j + 1));
  return names;
}

}  // namespace erfit::basis
