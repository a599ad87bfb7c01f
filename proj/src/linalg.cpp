#include "erfit/linalg.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "erfit/errors.hpp"

namespace erfit::linalg {

namespace {

struct ThinSvd {
  Matrix u;
  Vector sigma;
  Matrix v;
  Index rank = 0;
};

ThinSvd thin_svd(const Matrix& a, double rank_tol) {
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  ThinSvd out{svd.matrixU(), svd.singularValues(), svd.matrixV(), 0};
  // Singular values come sorted in decreasing order.
  const double cutoff = out.sigma.size() > 0 ? rank_tol * out.sigma(0) : 0.0;
  while (out.rank < out.sigma.size() && out.sigma(out.rank) > cutoff) ++out.rank;
  return out;
}

}  // namespace

void require_finite(const Matrix& m, std::string_view what) {
  if (!m.allFinite()) {
    throw InvalidInput(std::string(what) + " contains non-finite entries");
  }
}

double default_rank_tolerance(Index rows, Index cols) {
  return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon();
}

Matrix pseudoinverse(const Matrix& a, std::optional<double> rank_tol) {
  if (a.size() == 0) throw InvalidInput("pseudoinverse of an empty matrix");
  if (rank_tol && !(*rank_tol > 0.0)) throw InvalidInput("rank tolerance must be positive");
  require_finite(a, "pseudoinverse input");

  const auto svd = thin_svd(a, rank_tol.value_or(default_rank_tolerance(a.rows(), a.cols())));
  const Index r = svd.rank;
  if (r == 0) return Matrix::Zero(a.cols(), a.rows());
  const Vector inv_sigma = svd.sigma.head(r).cwiseInverse();
  return svd.v.leftCols(r) * inv_sigma.asDiagonal() * svd.u.leftCols(r).transpose();
}

Matrix ls_solve(const Matrix& phi, const Matrix& y) {
  if (phi.rows() != y.rows()) {
    throw ShapeError("ls_solve: design has " + std::to_string(phi.rows()) +
                     " rows but target has " + std::to_string(y.rows()));
  }
  if (phi.cols() == 0) return Matrix::Zero(0, y.cols());
  return pseudoinverse(phi) * y;
}

Projection ls_project(const Matrix& y, const Matrix& phi_s) {
  if (phi_s.rows() != y.rows()) {
    throw ShapeError("ls_project: basis has " + std::to_string(phi_s.rows()) +
                     " rows but target has " + std::to_string(y.rows()));
  }
  if (phi_s.cols() == 0) return Projection::none(y.rows());
  require_finite(phi_s, "projection basis");
  require_finite(y, "projection target");

  const auto svd = thin_svd(phi_s, default_rank_tolerance(phi_s.rows(), phi_s.cols()));
  if (svd.rank == 0) return Projection(Matrix::Zero(y.rows(), y.cols()));
  const auto u = svd.u.leftCols(svd.rank);
  return Projection(u * (u.transpose() * y));
}

Matrix select_columns(const Matrix& m, std::span<const Index> cols) {
  Matrix out(m.rows(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j] < 0 || cols[j] >= m.cols()) {
      throw ShapeError("column index " + std::to_string(cols[j]) + " out of range");
    }
    out.col(static_cast<Index>(j)) = m.col(cols[j]);
  }
  return out;
}

}  // namespace erfit::linalg
