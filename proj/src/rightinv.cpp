#include "ddreach/rightinv.hpp"

#include <cmath>

#include "ddreach/modelset.hpp"

namespace ddreach {

const char* to_string(RightInverseMethod m) {
  return m == RightInverseMethod::pinv ? "pinv" : "row_norm";
}

RightInverseMethod right_inverse_method_from_string(const std::string& s) {
  if (s == "pinv") return RightInverseMethod::pinv;
  if (s == "row_norm" || s == "socp") return RightInverseMethod::row_norm;
  throw std::invalid_argument("unknown right-inverse method '" + s + "'");
}

json to_json(const RightInverseResult& r, bool include_H) {
  json j = {{"method", to_string(r.method)},
            {"row_norm_sum", r.row_norm_sum},
            {"frob_norm", r.frob_norm},
            {"iterations", r.iterations},
            {"residual", r.residual}};
  if (r.method == RightInverseMethod::row_norm) {
    j["lower_bound"] = r.lower_bound;
    j["primal_residual"] = r.primal_residual;
    j["dual_residual"] = r.dual_residual;
    j["objective_trace"] = r.objective_trace;
  }
  if (include_H) j["H"] = matrix_to_json(r.H, false);
  return j;
}

double row_norm_sum(const Matrix& H) { return H.rowwise().norm().sum(); }

namespace {

void fill_stats(RightInverseResult& r, const Matrix& Phi) {
  r.row_norm_sum = row_norm_sum(r.H);
  r.frob_norm = r.H.norm();
  r.residual = (Phi * r.H - Matrix::Identity(Phi.rows(), Phi.rows())).norm();
}

// Smooth problem on a fixed row support S: min sum_{t in S} |h_t| subject to
// P_S H_S = I, by feasible Newton steps in the nullspace of the constraint.
// Returns false when a row collapses (S was too large) or the start is bad.
bool polish_on_support(const Matrix& Ps, Matrix& Hs, Index iters = 50) {
  const Index k = Ps.cols(), d = Ps.rows();
  // Constraint sum_t p_t h_t^T = I on x = [h_1; ...; h_k].
  Matrix C = Matrix::Zero(d * d, k * d);
  for (Index t = 0; t < k; ++t)
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) C(i * d + j, t * d + j) = Ps(i, t);
  const Matrix N = nullspace_basis(C);
  if (N.cols() == 0) return true;
  auto objective = [&](const Matrix& X) { return row_norm_sum(X); };
  double f = objective(Hs);
  for (Index it = 0; it < iters; ++it) {
    Vector g(k * d);
    Matrix HN(k * d, N.cols());  // block-diagonal Hessian times N
    for (Index t = 0; t < k; ++t) {
      const double nr = Hs.row(t).norm();
      if (!(nr > 1e-12 * f)) return false;
      const Vector u = Hs.row(t).transpose() / nr;
      g.segment(t * d, d) = u;
      const auto Nt = N.middleRows(t * d, d);
      HN.middleRows(t * d, d) = (Nt - u * (u.transpose() * Nt)) / nr;
    }
    const Vector rg = N.transpose() * g;
    Matrix RH = N.transpose() * HN;
    RH.diagonal().array() += 1e-14 * std::max(1.0, RH.diagonal().maxCoeff());
    const Vector z = RH.ldlt().solve(-rg);
    const double decrement = -rg.dot(z);
    if (!(decrement > 1e-15 * f)) break;
    const Vector step = N * z;
    double a = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls, a *= 0.5) {
      Matrix X = Hs;
      for (Index t = 0; t < k; ++t) X.row(t) += a * step.segment(t * d, d).transpose();
      const double fx = objective(X);
      if (fx < f) {
        Hs = X;
        f = fx;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return true;
}

}  // namespace

RightInverseResult pinv_right_inverse(const Matrix& Phi) {
  require_full_row_rank(Phi);
  RightInverseResult r;
  r.method = RightInverseMethod::pinv;
  r.H = pseudoinverse(Phi);
  fill_stats(r, Phi);
  return r;
}

double row_norm_dual_bound(const Matrix& Phi, const Matrix& Y) {
  const double tr = Y.trace();
  const double worst = (Phi.transpose() * Y).rowwise().norm().maxCoeff();
  if (!(tr > 0.0) || !(worst > 0.0)) return 0.0;
  return tr / worst;
}

RightInverseResult row_norm_right_inverse(const Matrix& Phi, const RowNormOptions& opt) {
  require_full_row_rank(Phi);
  const Index d = Phi.rows();
  const Index T = Phi.cols();
  const Matrix I = Matrix::Identity(d, d);

  // Work with Phi / sigma_max so rho = 1 is a sensible default.
  const double smax = svd(Phi).singular_values(0);
  const Matrix P = Phi / smax;
  const Matrix Pp = pseudoinverse(P);
  const Matrix PpT = Pp.transpose();
  auto project = [&](const Matrix& V) -> Matrix { return V - Pp * (P * V - I); };

  Matrix H = Pp;
  Matrix Z = H;
  Matrix U = Matrix::Zero(T, d);
  double rho = opt.rho;

  Matrix best = Pp;
  double best_obj = row_norm_sum(Pp);
  double lower = 0.0;
  RightInverseResult out;
  out.method = RightInverseMethod::row_norm;
  double r_norm = 0.0, s_norm = 0.0;
  bool converged = false;
  std::vector<Index> last_support, prev_support, polished_support;
  auto consider = [&](const Matrix& cand) {
    const double o = row_norm_sum(cand);
    if (o < best_obj && (P * cand - I).norm() <= 1e-10 * std::sqrt(static_cast<double>(d))) {
      best_obj = o;
      best = cand;
    }
  };
  Index it = 0;
  const double sqrt_n = std::sqrt(static_cast<double>(T * d));

  for (it = 1; it <= opt.max_iter; ++it) {
    H = project(Z - U);
    const Matrix Z_prev = Z;
    Z = H + U;
    const double thresh = 1.0 / rho;
    for (Index t = 0; t < T; ++t) {
      const double nr = Z.row(t).norm();
      Z.row(t) *= nr > thresh ? 1.0 - thresh / nr : 0.0;
    }
    U += H - Z;

    r_norm = (H - Z).norm();
    s_norm = rho * (Z - Z_prev).norm();

    const Matrix cand = project(Z);
    const double obj = row_norm_sum(cand);
    if (obj < best_obj) {
      best_obj = obj;
      best = cand;
    }
    // The optimum is row sparse and the full projection fills in every row,
    // so also try projecting within the current support of Z.
    if (it % 10 == 0) {
      std::vector<Index> support;
      for (Index t = 0; t < T; ++t)
        if (Z.row(t).squaredNorm() > 0.0) support.push_back(t);
      const Index k = static_cast<Index>(support.size());
      const bool stable = support == prev_support;
      const bool fresh = support != last_support;
      prev_support = support;
      if (k >= d && k <= T && (fresh || stable) && support != polished_support) {
        last_support = support;
        if (stable) polished_support = support;
        Matrix Ps(d, k), Zs(k, d);
        for (Index i = 0; i < k; ++i) {
          Ps.col(i) = P.col(support[i]);
          Zs.row(i) = Z.row(support[i]);
        }
        const Svd sv = svd(Ps);
        if (sv.singular_values(d - 1) > 1e-8 * sv.singular_values(0)) {
          const Matrix Psp = pseudoinverse(Ps);
          Matrix Hs = Zs - Psp * (Ps * Zs - I);
          Matrix full = Matrix::Zero(T, d);
          for (Index i = 0; i < k; ++i) full.row(support[i]) = Hs.row(i);
          consider(full);
          // Newton polish once the support has held for two checks. Rows
          // that collapse are dropped and the smaller support polished again.
          std::vector<Index> S = support;
          for (int round = 0; stable && round < 4 && static_cast<Index>(S.size()) >= d; ++round) {
            const Index ks = static_cast<Index>(S.size());
            Matrix Pr(d, ks), Hr(ks, d);
            for (Index i = 0; i < ks; ++i) {
              Pr.col(i) = P.col(S[i]);
              Hr.row(i) = full.row(S[i]);
            }
            const Svd svr = svd(Pr);
            if (!(svr.singular_values(d - 1) > 1e-8 * svr.singular_values(0))) break;
            const Matrix Prp = pseudoinverse(Pr);
            Hr -= Prp * (Pr * Hr - I);
            const bool smooth = polish_on_support(Pr, Hr);
            Hr -= Prp * (Pr * Hr - I);
            full.setZero();
            for (Index i = 0; i < ks; ++i) full.row(S[i]) = Hr.row(i);
            consider(full);
            const double scale_r = Hr.rowwise().norm().maxCoeff();
            std::vector<Index> keep;
            for (Index i = 0; i < ks; ++i)
              if (Hr.row(i).norm() > 1e-7 * scale_r) keep.push_back(S[i]);
            if (smooth && keep.size() == S.size()) {
              Matrix Un(ks, d);
              for (Index i = 0; i < ks; ++i) Un.row(i) = Hr.row(i).normalized();
              lower = std::max(lower, row_norm_dual_bound(P, Prp.transpose() * Un));
              break;
            }
            if (keep.size() == S.size()) break;
            S = std::move(keep);
          }
        }
      }
    }
    const Matrix Y = PpT * (rho * U);
    lower = std::max({lower, row_norm_dual_bound(P, Y), row_norm_dual_bound(P, -Y)});
    if (it % 50 == 0) out.objective_trace.push_back(best_obj / smax);

    const double gap = best_obj - lower;
    const double scale = std::max({1.0, H.norm(), Z.norm()});
    const bool small_residuals = r_norm <= opt.residual_tol * scale * sqrt_n &&
                                 s_norm <= opt.residual_tol * std::max(1.0, rho * U.norm()) * sqrt_n;
    if ((small_residuals && gap <= opt.tol * best_obj) || gap <= 0.1 * opt.tol * best_obj) {
      converged = true;
      break;
    }
    if (r_norm > 10.0 * s_norm) {
      rho *= 2.0;
      U /= 2.0;
    } else if (s_norm > 10.0 * r_norm) {
      rho /= 2.0;
      U *= 2.0;
    }
  }

  out.iterations = std::min(it, opt.max_iter);
  out.H = project(best) / smax;
  out.primal_residual = r_norm;
  out.dual_residual = s_norm;
  out.lower_bound = lower / smax;
  fill_stats(out, Phi);
  // The final projection can perturb the objective at round-off level only.
  if (!converged && out.row_norm_sum - out.lower_bound > opt.tol * out.row_norm_sum) {
    throw RightInverseError("row_norm_right_inverse: no convergence within max_iter", out);
  }
  return out;
}

RightInverseResult compute_right_inverse(const Matrix& Phi, RightInverseMethod method) {
  return method == RightInverseMethod::pinv ? pinv_right_inverse(Phi) : row_norm_right_inverse(Phi);
}

SandwichCheck verify_sandwich(const Matrix& Phi, const RightInverseResult& result, double slack) {
  SandwichCheck s;
  s.lhs = pseudoinverse(Phi).norm();
  s.gamma = result.row_norm_sum;
  s.rhs = std::sqrt(static_cast<double>(Phi.cols())) * s.lhs;
  s.holds = s.lhs <= s.gamma + slack && s.gamma <= s.rhs + slack;
  return s;
}

}  // namespace ddreach
