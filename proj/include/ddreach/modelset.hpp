#pragma once

#include <vector>

#include "ddreach/serialize.hpp"
#include "ddreach/setrep.hpp"

namespace ddreach {

class RankDeficientError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One recorded trajectory: X has T_i + 1 columns, U and the noise factor
/// matrix have T_i. Noise at step t was w(t) = c_w + G_w * noise_factors.col(t).
struct Trajectory {
  Matrix X;
  Matrix U;
  Matrix noise_factors;
  std::vector<int> modes;  // region index of x(t), PWA only
};

/// Shifted data matrices. Phi = [X_minus; U_minus].
struct DataSet {
  Matrix X_plus;
  Matrix X_minus;
  Matrix U_minus;
  std::vector<Index> lengths;
  // p_w x T, present when the data came from the simulator.
  Matrix noise_factors;

  Index T() const { return X_plus.cols(); }
  Index n_x() const { return X_plus.rows(); }
  Index n_u() const { return U_minus.rows(); }
  Index d() const { return n_x() + n_u(); }
  Matrix Phi() const;
  void validate() const;

  static DataSet from_trajectories(const std::vector<Trajectory>& trajs);
};

json to_json(const DataSet& data);
DataSet dataset_from_json(const json& j);

/// Throws RankDeficientError("regressor not full row rank") unless
/// sigma_min(Phi) > 1e-8 * sigma_max(Phi).
void require_full_row_rank(const Matrix& Phi);

/// Zero-centered noise matrix zonotope with generators g_j e_t^T, index
/// l = t * p_w + j (0-based).
MatrixZonotope build_noise_mz(const std::vector<Vector>& w_gens, Index T);
/// Same, with the center c_w repeated in every column.
MatrixZonotope build_noise_mz(const Zonotope& W, Index T);

/// Noise coefficients in the generator order above, from the simulator's
/// recorded factors (p_w x T).
Vector noise_coefficients(const Matrix& noise_factors);

struct Denoised {
  Matrix C_n;
  std::vector<Matrix> G;
};

Denoised build_denoised(const Matrix& X_plus, const MatrixZonotope& noise_mz);

struct KernelConstraints {
  Matrix A;
  Vector b;
  CmzBlocks blocks;
};

/// Column l of A is vec(G_l Phi_perp), b = -vec(C_n Phi_perp).
KernelConstraints kernel_constraints(const Denoised& denoised, const Matrix& Phi_perp);

struct ModelSetBundle {
  MatrixZonotope mz;
  ConstrainedMatrixZonotope cmz;
  Matrix H;
  MatrixZonotope noise_mz;
  Denoised denoised;
  Matrix Phi_perp;
  Index r = 0;
};

ModelSetBundle build_model_sets(const DataSet& data, const Zonotope& W, const Matrix& H);

/// sum_l |G_l|_F
double generator_norm_proxy(const MatrixZonotope& m);
double generator_norm_proxy(const ConstrainedMatrixZonotope& m);

/// Point model {[A B]} with no generators.
ConstrainedMatrixZonotope singleton_model(const Matrix& A, const Matrix& B);

}  // namespace ddreach
