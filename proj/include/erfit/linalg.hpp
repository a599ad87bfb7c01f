#pragma once

#include <optional>
#include <span>
#include <string_view>

#include <Eigen/Dense>

namespace erfit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

namespace linalg {

// Throws InvalidInput naming `what` if any entry is NaN or infinite.
void require_finite(const Matrix& m, std::string_view what);

// max(rows, cols) * unit roundoff.
double default_rank_tolerance(Index rows, Index cols);

// Moore-Penrose pseudoinverse via SVD. Singular values at or below
// rank_tol * sigma_max are treated as zero.
Matrix pseudoinverse(const Matrix& a, std::optional<double> rank_tol = std::nullopt);

// Minimum-norm least-squares solution of phi * beta = y.
Matrix ls_solve(const Matrix& phi, const Matrix& y);

// Result of projecting a target onto the span of a column subset. An empty
// projection (no columns selected) is a distinct value, not an N x 0 matrix:
// estimators treat it as "condition on nothing".
class Projection {
 public:
  static Projection none(Index rows) { return Projection(rows); }
  explicit Projection(Matrix values) : rows_(values.rows()), values_(std::move(values)) {}

  bool empty() const noexcept { return !values_.has_value(); }
  Index rows() const noexcept { return rows_; }
  // Precondition: !empty().
  const Matrix& values() const { return *values_; }

 private:
  explicit Projection(Index rows) : rows_(rows) {}

  Index rows_;
  std::optional<Matrix> values_;
};

// V(Y, Phi_s) = Phi_s Phi_s^+ Y, computed as U_r U_r^T Y from a thin SVD.
Projection ls_project(const Matrix& y, const Matrix& phi_s);

// Columns of `m` listed in `cols`, in that order.
Matrix select_columns(const Matrix& m, std::span<const Index> cols);

}  // namespace linalg
}  // namespace erfit
