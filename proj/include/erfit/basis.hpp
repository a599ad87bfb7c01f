#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "erfit/linalg.hpp"

namespace erfit::basis {

using TermEvaluator = std::function<double(std::span<const double>)>;

// One column of the candidate library. Monomials carry an exponent per state
// variable (all zeros is the constant 1). User-supplied terms carry a label
// and an evaluator instead and leave `exponents` empty.
struct TermDescriptor {
  std::vector<unsigned> exponents;
  std::string label;
  TermEvaluator evaluator;

  static TermDescriptor monomial(std::vector<unsigned> exponents) { return {std::move(exponents), {}, {}}; }
  static TermDescriptor custom(std::string label, TermEvaluator fn) {
    return {{}, std::move(label), std::move(fn)};
  }

  bool is_monomial() const noexcept { return !evaluator; }
  unsigned total_degree() const noexcept;
  double evaluate(std::span<const double> state) const;

  friend bool operator==(const TermDescriptor& a, const TermDescriptor& b) {
    return a.exponents == b.exponents && a.label == b.label;
  }
};

struct BasisLibrary {
  Matrix phi;                          // N x K
  std::vector<TermDescriptor> terms;   // K entries, column order
  std::size_t source_dims = 0;

  Index size() const noexcept { return phi.cols(); }
};

// C(d + max_degree, max_degree). Throws CapacityError if it does not fit.
std::uint64_t count_library_columns(std::size_t d, unsigned max_degree);

// All monomials in d variables of total degree <= max_degree, graded by
// degree, descending lexicographic within a degree: 1, x1, x2, x1^2, x1x2, x2^2.
std::vector<TermDescriptor> polynomial_terms(std::size_t d, unsigned max_degree);

// Phi(X) for the full polynomial library of the given degree.
BasisLibrary build_polynomial_library(const Matrix& x, unsigned max_degree);

// Plug-in seam for non-polynomial bases: evaluates each user term row-wise.
BasisLibrary build_library(const Matrix& x, std::vector<TermDescriptor> terms);

// Row vector [term_0(state), ..., term_{K-1}(state)].
Vector evaluate_terms(std::span<const TermDescriptor> terms, std::span<const double> state);

// "x^2*y" style text; the constant renders as "1".
std::string render_term(const TermDescriptor& t, std::span<const std::string> var_names);

// x1, x2, ... used when no names are given.
std::vector<std::string> default_var_names(std::size_t d);

}  // namespace erfit::basis
