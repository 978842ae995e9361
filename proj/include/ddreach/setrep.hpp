#pragma once

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "ddreach/lp.hpp"
#include "ddreach/numerics.hpp"

namespace ddreach {

/// {c + G xi : |xi|_inf <= 1}
struct Zonotope {
  Vector c;
  Matrix G;

  Zonotope() = default;
  Zonotope(Vector center, Matrix generators);

  static Zonotope point(const Vector& c);
  static Zonotope box(const Vector& c, const Vector& radii);

  Index dim() const { return c.size(); }
  Index num_generators() const { return G.cols(); }
};

/// {c + G xi : |xi|_inf <= 1, A xi = b}
struct ConstrainedZonotope {
  Vector c;
  Matrix G;
  Matrix A;
  Vector b;

  ConstrainedZonotope() = default;
  ConstrainedZonotope(Vector center, Matrix generators, Matrix A_c, Vector b_c);
  ConstrainedZonotope(const Zonotope& z);  // NOLINT: implicit on purpose

  Index dim() const { return c.size(); }
  Index num_generators() const { return G.cols(); }
  Index num_constraints() const { return A.rows(); }
  bool has_constraints() const { return A.rows() > 0; }

  // Throws when constraints are present.
  Zonotope as_zonotope() const;
  // Drops the constraints; the result contains *this.
  Zonotope outer_zonotope() const { return Zonotope(c, G); }
};

/// Intersections may produce the empty set, which is kept as a separate
/// state instead of a constrained zonotope with contradictory constraints.
using MaybeCz = std::optional<ConstrainedZonotope>;

/// {C + sum_l beta_l G_l : |beta|_inf <= 1}
struct MatrixZonotope {
  Matrix C;
  std::vector<Matrix> G;

  MatrixZonotope() = default;
  MatrixZonotope(Matrix center, std::vector<Matrix> generators);

  Index rows() const { return C.rows(); }
  Index cols() const { return C.cols(); }
  Index num_generators() const { return static_cast<Index>(G.size()); }
  void validate() const;
};

/// Block form of the coefficient constraints: sum_l beta_l A_blk[l] = B_blk.
struct CmzBlocks {
  std::vector<Matrix> A_blk;
  Matrix B_blk;
};

/// Matrix zonotope whose coefficients also satisfy A beta = b.
struct ConstrainedMatrixZonotope {
  Matrix C;
  std::vector<Matrix> G;
  Matrix A;
  Vector b;
  std::optional<CmzBlocks> blocks;

  ConstrainedMatrixZonotope() = default;
  ConstrainedMatrixZonotope(Matrix center, std::vector<Matrix> generators, Matrix A_c, Vector b_c,
                            std::optional<CmzBlocks> blk = std::nullopt);
  explicit ConstrainedMatrixZonotope(const MatrixZonotope& m);

  Index rows() const { return C.rows(); }
  Index cols() const { return C.cols(); }
  Index num_generators() const { return static_cast<Index>(G.size()); }
  Index num_constraints() const { return A.rows(); }
  MatrixZonotope unconstrained() const { return MatrixZonotope(C, G); }
  void validate() const;
  // max |vec(A_blk[l])| mismatch against the columns of A, and of B_blk
  // against b. Zero when no block form is stored.
  double block_consistency_error() const;
};

ConstrainedZonotope minkowski_sum(const ConstrainedZonotope& a, const ConstrainedZonotope& b);
Zonotope minkowski_sum(const Zonotope& a, const Zonotope& b);
ConstrainedZonotope linear_map(const Matrix& M, const ConstrainedZonotope& z);
Zonotope linear_map(const Matrix& M, const Zonotope& z);
ConstrainedZonotope cartesian_product(const ConstrainedZonotope& a, const ConstrainedZonotope& b);
Zonotope cartesian_product(const Zonotope& a, const Zonotope& b);

/// Generator blocks of a matrix-set times point-set product, with the
/// bilinear terms beta_l * alpha_i treated as independent factors.
/// alpha: C g_i (p columns), beta: G_l c (kappa columns),
/// gamma: G_l g_i stored at column l * p + i (kappa * p columns).
struct ProductParts {
  Vector center;
  Matrix G_alpha;
  Matrix G_beta;
  Matrix G_gamma;
};

ProductParts product_parts(const Matrix& C, const std::vector<Matrix>& gens, const Vector& c,
                           const Matrix& G);

Zonotope mz_times_zonotope(const MatrixZonotope& M, const Zonotope& z);
/// Factor order alpha, beta, gamma; constraint matrix [0 A_cmz 0].
ConstrainedZonotope cmz_times_zonotope(const ConstrainedMatrixZonotope& M, const Zonotope& z);
/// Same product with a constrained multiplicand. The multiplicand's rows are
/// kept on the alpha factors: [[A_z 0 0]; [0 A_cmz 0]].
ConstrainedZonotope cmz_times_cz(const ConstrainedMatrixZonotope& M, const ConstrainedZonotope& z);

/// z intersected with {x : h^T x <= c}. Returns z itself when the interval
/// bound of h^T x already lies below c and nullopt when it lies above.
MaybeCz halfspace_intersection(const ConstrainedZonotope& z, const Vector& h, double c);

/// Feasibility, emptiness and support queries for one constrained zonotope.
/// Decomposes the factor constraints into independent blocks (connected
/// components of the row/column incidence of A); factors that appear in no
/// constraint are handled in closed form. LP bases are reused between
/// queries.
class SupportOracle {
 public:
  explicit SupportOracle(const ConstrainedZonotope& z);
  ~SupportOracle();
  SupportOracle(SupportOracle&&) noexcept;
  SupportOracle& operator=(SupportOracle&&) noexcept;

  bool empty();
  // max dir^T x over the set. Throws std::domain_error when empty.
  double operator()(const Vector& dir);
  // max dir^T G xi over the constrained factors, without the center.
  double factor_support(const Vector& weights);

  Index num_components() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

bool is_empty(const ConstrainedZonotope& z);

/// Point membership with tolerance: exists xi with |xi|_inf <= 1 + tol,
/// A xi = b and |c + G xi - x|_inf <= tol. `leading_factors`, when given,
/// proposes values for the first factors; if the remaining factors complete
/// a witness the large LP is skipped. Falls back to the full LP otherwise.
bool contains_point(const ConstrainedZonotope& z, const Vector& x, double tol = 1e-9,
                    const Vector* leading_factors = nullptr);

double support(const ConstrainedZonotope& z, const Vector& dir);

struct Interval {
  Vector lower;
  Vector upper;
};

Interval interval_hull(const ConstrainedZonotope& z);
Interval interval_hull(const Zonotope& z);

/// Girard reduction to at most floor(max_order * n) generators: keeps the
/// ones with the largest |g|_1 - |g|_inf and boxes the rest.
Zonotope reduce_girard(const Zonotope& z, double max_order);

/// Girard reduction applied to the columns from `first_free` on, in the space
/// lifted by the constraint rows (each column is [g; a]). The leading columns
/// and all constraint rows are kept. The box of the discarded columns adds a
/// state generator per state coordinate and a slack column per constraint row
/// it touches, so the result contains the input. At most `max_free` free
/// columns remain unless the lifted dimension itself is larger.
ConstrainedZonotope reduce_free_generators(const ConstrainedZonotope& z, Index first_free,
                                           Index max_free);

/// 2^n sum over n-subsets S of |det G_S|. Throws when C(m, n) > 1e7.
double volume(const Zonotope& z);

/// Counter-clockwise vertex list of the projection onto coordinates dims.
/// Exact for zonotopes; for constrained zonotopes an outer polygon from
/// n_dirs support evaluations.
std::vector<std::array<double, 2>> project_polygon(const ConstrainedZonotope& z,
                                                   std::array<Index, 2> dims, Index n_dirs = 64);

double polygon_area(const std::vector<std::array<double, 2>>& poly);

}  // namespace ddreach
