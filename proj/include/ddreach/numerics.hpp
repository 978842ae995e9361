#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ddreach {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Raised when an iterative numerical routine fails to converge or a
/// factorization breaks down.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when operands have incompatible shapes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thin SVD, M = U * diag(singular_values) * V^T with singular values
/// sorted non-increasing.
struct Svd {
  Matrix U;
  Vector singular_values;
  Matrix V;
};

Svd svd(const Matrix& m);

/// Default relative rank threshold: 1e-10 * max(rows, cols). Singular values
/// below `rel_tol * sigma_max` count as zero.
double default_rank_tolerance(Index rows, Index cols);

Index numerical_rank(const Matrix& m, std::optional<double> rel_tol = std::nullopt);

/// Moore-Penrose pseudoinverse. The zero matrix maps to the (transposed) zero
/// matrix.
Matrix pseudoinverse(const Matrix& m, std::optional<double> rel_tol = std::nullopt);

/// Orthonormal basis of the right nullspace {v : M v = 0}; one column per
/// zero singular value. Returns a cols x 0 matrix for full column rank input.
Matrix nullspace_basis(const Matrix& m, std::optional<double> rel_tol = std::nullopt);

double min_singular_value(const Matrix& m);

/// Column-stacking vec operator.
Vector vec(const Matrix& m);

void require_finite(const Matrix& m, const std::string& what);

}  // namespace ddreach
