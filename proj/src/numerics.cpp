#include "ddreach/numerics.hpp"

#include <algorithm>

namespace ddreach {

void require_finite(const Matrix& m, const std::string& what) {
  if (!m.allFinite()) {
    throw std::invalid_argument(what + ": non-finite entries");
  }
}

Svd svd(const Matrix& m) {
  require_finite(m, "svd");
  Svd out;
  if (m.size() == 0) {
    const Index k = std::min(m.rows(), m.cols());
    out.U = Matrix::Zero(m.rows(), k);
    out.V = Matrix::Zero(m.cols(), k);
    out.singular_values = Vector::Zero(k);
    return out;
  }
  Eigen::JacobiSVD<Matrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("svd: Jacobi iteration did not converge");
  }
  out.U = solver.matrixU();
  out.V = solver.matrixV();
  out.singular_values = solver.singularValues();
  return out;
}

double default_rank_tolerance(Index rows, Index cols) {
  return 1e-10 * static_cast<double>(std::max<Index>({rows, cols, 1}));
}

namespace {

Index rank_from(const Vector& sv, double rel_tol) {
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double cut = rel_tol * sv(0);
  Index r = 0;
  while (r < sv.size() && sv(r) > cut) ++r;
  return r;
}

}  // namespace

Index numerical_rank(const Matrix& m, std::optional<double> rel_tol) {
  const Svd s = svd(m);
  return rank_from(s.singular_values, rel_tol.value_or(default_rank_tolerance(m.rows(), m.cols())));
}

Matrix pseudoinverse(const Matrix& m, std::optional<double> rel_tol) {
  const Svd s = svd(m);
  const Index r =
      rank_from(s.singular_values, rel_tol.value_or(default_rank_tolerance(m.rows(), m.cols())));
  if (r == 0) return Matrix::Zero(m.cols(), m.rows());
  const Vector inv = s.singular_values.head(r).cwiseInverse();
  return s.V.leftCols(r) * inv.asDiagonal() * s.U.leftCols(r).transpose();
}

Matrix nullspace_basis(const Matrix& m, std::optional<double> rel_tol) {
  require_finite(m, "nullspace_basis");
  const Index n = m.cols();
  if (n == 0) return Matrix::Zero(0, 0);
  if (m.rows() == 0) return Matrix::Identity(n, n);
  // Thin V drops the nullspace directions when rows < cols.
  Eigen::JacobiSVD<Matrix> solver(m, Eigen::ComputeFullV);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("nullspace_basis: Jacobi iteration did not converge");
  }
  const Index r = rank_from(solver.singularValues(),
                            rel_tol.value_or(default_rank_tolerance(m.rows(), m.cols())));
  return solver.matrixV().rightCols(n - r);
}

double min_singular_value(const Matrix& m) {
  const Svd s = svd(m);
  if (s.singular_values.size() == 0) return 0.0;
  return s.singular_values(s.singular_values.size() - 1);
}

Vector vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

}  // namespace ddreach
