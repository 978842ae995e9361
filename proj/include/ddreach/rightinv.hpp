#pragma once

#include <string>
#include <vector>

#include "ddreach/numerics.hpp"
#include "ddreach/serialize.hpp"

namespace ddreach {

enum class RightInverseMethod { pinv, row_norm };

const char* to_string(RightInverseMethod m);
RightInverseMethod right_inverse_method_from_string(const std::string& s);

struct RightInverseResult {
  Matrix H;
  RightInverseMethod method = RightInverseMethod::pinv;
  double row_norm_sum = 0.0;
  double frob_norm = 0.0;
  Index iterations = 0;
  double residual = 0.0;  // |Phi H - I|_F
  // Dual lower bound on the optimal row-norm sum (row_norm only).
  double lower_bound = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  std::vector<double> objective_trace;  // every 50 iterations
};

json to_json(const RightInverseResult& r, bool include_H = false);

double row_norm_sum(const Matrix& H);

RightInverseResult pinv_right_inverse(const Matrix& Phi);

struct RowNormOptions {
  double tol = 1e-7;        // relative optimality target
  Index max_iter = 200000;
  double rho = 1.0;
  double residual_tol = 1e-9;
};

class RightInverseError : public NumericalError {
 public:
  RightInverseError(const std::string& what, RightInverseResult best)
      : NumericalError(what), best_(std::move(best)) {}
  const RightInverseResult& best() const { return best_; }

 private:
  RightInverseResult best_;
};

/// argmin sum_t |H_{t,:}|_2  s.t.  Phi H = I, by ADMM on the consensus
/// splitting H = Z (affine projection, row shrinkage, dual ascent). The
/// returned H is the best feasible iterate after the final projection onto
/// {Phi H = I}. Stops when the splitting residuals fall below residual_tol
/// or the dual bound certifies the objective to within tol.
RightInverseResult row_norm_right_inverse(const Matrix& Phi, const RowNormOptions& opt = {});

RightInverseResult compute_right_inverse(const Matrix& Phi, RightInverseMethod method);

/// Lower bound tr(Y) / max_t |(Phi^T Y)_{t,:}| valid for any Y with positive
/// trace.
double row_norm_dual_bound(const Matrix& Phi, const Matrix& Y);

struct SandwichCheck {
  double lhs = 0.0;    // |Phi^+|_F
  double gamma = 0.0;  // row-norm optimum
  double rhs = 0.0;    // sqrt(T) |Phi^+|_F
  bool holds = false;
};

SandwichCheck verify_sandwich(const Matrix& Phi, const RightInverseResult& result, double slack = 1e-7);

}  // namespace ddreach
