#pragma once

#include <cstdint>
#include <vector>

#include "ddreach/numerics.hpp"

namespace ddreach {

enum class Sense { minimize, maximize };

enum class LpStatus { feasible, infeasible, unbounded };

const char* to_string(LpStatus s);

/// optimize objective^T x  s.t.  A_eq x = b_eq,  lower <= x <= upper.
/// Bounds may be infinite.
struct LpProblem {
  Vector objective;
  Matrix A_eq;
  Vector b_eq;
  Vector lower;
  Vector upper;
  Sense sense = Sense::minimize;

  Index num_vars() const { return objective.size(); }
  Index num_rows() const { return A_eq.rows(); }
  void validate() const;
};

/// Simplex basis snapshot usable as a warm start for a problem with the same
/// constraint matrix shape. Internal columns are the structural variables
/// followed by one artificial per row.
struct LpBasis {
  std::vector<Index> basic;
  std::vector<std::int8_t> state;
  std::vector<std::int8_t> artificial_sign;

  bool empty() const { return basic.empty() && state.empty(); }
};

struct LpOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  // 0 selects 20 * (rows + cols) + 1000.
  Index max_iterations = 0;
  Index refactor_interval = 64;
  // Consecutive degenerate pivots before switching to Bland's rule.
  Index degenerate_before_bland = 50;
  // Stop after phase 1 (objective ignored).
  bool feasibility_only = false;
};

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Vector x;
  double objective = 0.0;
  Index iterations = 0;
  LpBasis basis;
};

/// Dense bounded-variable two-phase simplex. Deterministic for a fixed input.
/// Throws NumericalError when the iteration cap is exceeded.
LpResult lp_solve(const LpProblem& problem, const LpOptions& options = {},
                  const LpBasis* warm_start = nullptr);

}  // namespace ddreach
