#include "ddreach/modelset.hpp"

namespace ddreach {

Matrix DataSet::Phi() const {
  Matrix phi(d(), T());
  phi << X_minus, U_minus;
  return phi;
}

void DataSet::validate() const {
  if (X_minus.rows() != X_plus.rows() || X_minus.cols() != T() || U_minus.cols() != T()) {
    throw DimensionError("DataSet: shifted matrices have inconsistent shapes");
  }
  Index total = 0;
  for (Index l : lengths) total += l;
  if (!lengths.empty() && total != T()) {
    throw DimensionError("DataSet: trajectory lengths do not sum to T");
  }
  if (noise_factors.size() > 0 && noise_factors.cols() != T()) {
    throw DimensionError("DataSet: noise factor columns differ from T");
  }
}

DataSet DataSet::from_trajectories(const std::vector<Trajectory>& trajs) {
  DataSet out;
  if (trajs.empty()) throw std::invalid_argument("DataSet: no trajectories");
  const Index n = trajs[0].X.rows();
  const Index m = trajs[0].U.rows();
  const Index pw = trajs[0].noise_factors.rows();
  Index T = 0;
  for (const Trajectory& t : trajs) {
    if (t.X.rows() != n || t.U.rows() != m || t.X.cols() != t.U.cols() + 1) {
      throw DimensionError("DataSet: trajectory shapes differ");
    }
    T += t.U.cols();
  }
  out.X_plus.resize(n, T);
  out.X_minus.resize(n, T);
  out.U_minus.resize(m, T);
  const bool with_noise = pw > 0;
  if (with_noise) out.noise_factors.resize(pw, T);
  Index at = 0;
  for (const Trajectory& t : trajs) {
    const Index len = t.U.cols();
    out.X_minus.middleCols(at, len) = t.X.leftCols(len);
    out.X_plus.middleCols(at, len) = t.X.rightCols(len);
    out.U_minus.middleCols(at, len) = t.U;
    if (with_noise) {
      if (t.noise_factors.rows() != pw || t.noise_factors.cols() != len) {
        throw DimensionError("DataSet: noise factor shapes differ");
      }
      out.noise_factors.middleCols(at, len) = t.noise_factors;
    }
    out.lengths.push_back(len);
    at += len;
  }
  return out;
}

json to_json(const DataSet& data) {
  json j = {{"X_plus", matrix_to_json(data.X_plus, false)},
            {"X_minus", matrix_to_json(data.X_minus, false)},
            {"U_minus", matrix_to_json(data.U_minus, false)},
            {"lengths", data.lengths}};
  if (data.noise_factors.size() > 0) j["noise_factors"] = matrix_to_json(data.noise_factors, false);
  return j;
}

DataSet dataset_from_json(const json& j) {
  DataSet d;
  d.X_plus = matrix_from_json(j.at("X_plus"));
  d.X_minus = matrix_from_json(j.at("X_minus"));
  d.U_minus = matrix_from_json(j.at("U_minus"));
  if (j.contains("lengths")) d.lengths = j["lengths"].get<std::vector<Index>>();
  if (j.contains("noise_factors")) d.noise_factors = matrix_from_json(j["noise_factors"]);
  d.validate();
  return d;
}

void require_full_row_rank(const Matrix& Phi) {
  if (Phi.rows() == 0) return;
  const Vector sv = svd(Phi).singular_values;
  if (Phi.rows() > Phi.cols() || sv.size() < Phi.rows() || !(sv(sv.size() - 1) > 1e-8 * sv(0))) {
    throw RankDeficientError("regressor not full row rank");
  }
}

MatrixZonotope build_noise_mz(const std::vector<Vector>& w_gens, Index T) {
  if (T < 1) throw std::invalid_argument("build_noise_mz: T must be positive");
  if (w_gens.empty()) throw std::invalid_argument("build_noise_mz: no noise generators");
  const Index n = w_gens[0].size();
  const Index pw = static_cast<Index>(w_gens.size());
  std::vector<Matrix> gens;
  gens.reserve(pw * T);
  for (Index t = 0; t < T; ++t) {
    for (Index j = 0; j < pw; ++j) {
      if (w_gens[j].size() != n) throw DimensionError("build_noise_mz: generator lengths differ");
      Matrix g = Matrix::Zero(n, T);
      g.col(t) = w_gens[j];
      gens.push_back(std::move(g));
    }
  }
  return MatrixZonotope(Matrix::Zero(n, T), std::move(gens));
}

MatrixZonotope build_noise_mz(const Zonotope& W, Index T) {
  if (W.num_generators() == 0) {
    if (T < 1) throw std::invalid_argument("build_noise_mz: T must be positive");
    return MatrixZonotope(W.c.replicate(1, T), {});
  }
  std::vector<Vector> gens;
  for (Index j = 0; j < W.num_generators(); ++j) gens.push_back(W.G.col(j));
  MatrixZonotope m = build_noise_mz(gens, T);
  m.C = W.c.replicate(1, T);
  return m;
}

Vector noise_coefficients(const Matrix& noise_factors) { return vec(noise_factors); }

Denoised build_denoised(const Matrix& X_plus, const MatrixZonotope& noise_mz) {
  if (X_plus.rows() != noise_mz.rows() || X_plus.cols() != noise_mz.cols()) {
    throw DimensionError("build_denoised: X_plus shape differs from the noise set");
  }
  Denoised out;
  out.C_n = X_plus - noise_mz.C;
  out.G.reserve(noise_mz.G.size());
  for (const Matrix& g : noise_mz.G) out.G.push_back(-g);
  return out;
}

KernelConstraints kernel_constraints(const Denoised& denoised, const Matrix& Phi_perp) {
  if (Phi_perp.rows() != denoised.C_n.cols()) {
    throw DimensionError("kernel_constraints: nullspace basis rows differ from T");
  }
  const Index n = denoised.C_n.rows();
  const Index r = Phi_perp.cols();
  const Index kappa = static_cast<Index>(denoised.G.size());
  KernelConstraints out;
  out.A.resize(n * r, kappa);
  out.blocks.A_blk.reserve(kappa);
  for (Index l = 0; l < kappa; ++l) {
    Matrix blk = denoised.G[l] * Phi_perp;
    out.A.col(l) = vec(blk);
    out.blocks.A_blk.push_back(std::move(blk));
  }
  out.blocks.B_blk = -denoised.C_n * Phi_perp;
  out.b = vec(out.blocks.B_blk);
  return out;
}

ModelSetBundle build_model_sets(const DataSet& data, const Zonotope& W, const Matrix& H) {
  data.validate();
  const Matrix Phi = data.Phi();
  require_full_row_rank(Phi);
  if (H.rows() != data.T() || H.cols() != data.d()) {
    throw DimensionError("build_model_sets: right inverse has the wrong shape");
  }
  const double res = (Phi * H - Matrix::Identity(data.d(), data.d())).norm();
  if (res > 1e-8) throw std::invalid_argument("build_model_sets: H is not a right inverse of Phi");
  if (W.dim() != data.n_x()) throw DimensionError("build_model_sets: noise dimension");

  ModelSetBundle out;
  out.H = H;
  out.noise_mz = build_noise_mz(W, data.T());
  out.denoised = build_denoised(data.X_plus, out.noise_mz);
  out.Phi_perp = nullspace_basis(Phi);
  out.r = out.Phi_perp.cols();
  KernelConstraints kc = kernel_constraints(out.denoised, out.Phi_perp);

  std::vector<Matrix> gens;
  gens.reserve(out.denoised.G.size());
  for (const Matrix& g : out.denoised.G) gens.push_back(g * H);
  const Matrix center = out.denoised.C_n * H;
  out.mz = MatrixZonotope(center, gens);
  out.cmz = ConstrainedMatrixZonotope(center, std::move(gens), std::move(kc.A), std::move(kc.b),
                                      std::move(kc.blocks));
  return out;
}

double generator_norm_proxy(const MatrixZonotope& m) {
  double s = 0.0;
  for (const Matrix& g : m.G) s += g.norm();
  return s;
}

double generator_norm_proxy(const ConstrainedMatrixZonotope& m) {
  return generator_norm_proxy(m.unconstrained());
}

ConstrainedMatrixZonotope singleton_model(const Matrix& A, const Matrix& B) {
  if (A.rows() != A.cols() || B.rows() != A.rows()) throw DimensionError("singleton_model: shapes");
  Matrix AB(A.rows(), A.cols() + B.cols());
  AB << A, B;
  return ConstrainedMatrixZonotope(MatrixZonotope(AB, {}));
}

}  // namespace ddreach
