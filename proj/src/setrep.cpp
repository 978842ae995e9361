#include "ddreach/setrep.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace ddreach {

namespace {

void check_dim(bool ok, const char* what) {
  if (!ok) throw DimensionError(what);
}

Matrix hcat(std::initializer_list<const Matrix*> blocks, Index rows) {
  Index cols = 0;
  for (const Matrix* b : blocks) cols += b->cols();
  Matrix out(rows, cols);
  Index at = 0;
  for (const Matrix* b : blocks) {
    if (b->cols() == 0) continue;
    out.middleCols(at, b->cols()) = *b;
    at += b->cols();
  }
  return out;
}

Matrix block_diag(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

Vector vcat(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

struct UnionFind {
  std::vector<Index> parent;
  explicit UnionFind(Index n) : parent(n) { std::iota(parent.begin(), parent.end(), Index{0}); }
  Index find(Index i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  }
  void unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};


}  // namespace

Zonotope::Zonotope(Vector center, Matrix generators) : c(std::move(center)), G(std::move(generators)) {
  if (G.cols() == 0) G.resize(c.size(), 0);
  check_dim(G.rows() == c.size(), "Zonotope: generator rows differ from center dimension");
  require_finite(c, "Zonotope center");
  require_finite(G, "Zonotope generators");
}

Zonotope Zonotope::point(const Vector& c) { return Zonotope(c, Matrix(c.size(), 0)); }

Zonotope Zonotope::box(const Vector& c, const Vector& radii) {
  check_dim(radii.size() == c.size(), "Zonotope::box: radii length");
  return Zonotope(c, Matrix(radii.asDiagonal()));
}

ConstrainedZonotope::ConstrainedZonotope(Vector center, Matrix generators, Matrix A_c, Vector b_c)
    : c(std::move(center)), G(std::move(generators)), A(std::move(A_c)), b(std::move(b_c)) {
  if (G.cols() == 0) G.resize(c.size(), 0);
  if (A.rows() == 0) A.resize(0, G.cols());
  check_dim(G.rows() == c.size(), "ConstrainedZonotope: generator rows differ from center");
  check_dim(A.cols() == G.cols(), "ConstrainedZonotope: constraint columns differ from generators");
  check_dim(b.size() == A.rows(), "ConstrainedZonotope: rhs length differs from constraint rows");
  require_finite(c, "ConstrainedZonotope center");
  require_finite(G, "ConstrainedZonotope generators");
  require_finite(A, "ConstrainedZonotope constraints");
  require_finite(b, "ConstrainedZonotope rhs");
}

ConstrainedZonotope::ConstrainedZonotope(const Zonotope& z)
    : c(z.c), G(z.G), A(0, z.G.cols()), b(0) {}

Zonotope ConstrainedZonotope::as_zonotope() const {
  if (has_constraints()) throw std::logic_error("as_zonotope: set has factor constraints");
  return Zonotope(c, G);
}

MatrixZonotope::MatrixZonotope(Matrix center, std::vector<Matrix> generators)
    : C(std::move(center)), G(std::move(generators)) {
  validate();
}

void MatrixZonotope::validate() const {
  require_finite(C, "MatrixZonotope center");
  for (const Matrix& g : G) {
    check_dim(g.rows() == C.rows() && g.cols() == C.cols(),
              "MatrixZonotope: generator shape differs from center");
    require_finite(g, "MatrixZonotope generator");
  }
}

ConstrainedMatrixZonotope::ConstrainedMatrixZonotope(Matrix center, std::vector<Matrix> generators,
                                                     Matrix A_c, Vector b_c,
                                                     std::optional<CmzBlocks> blk)
    : C(std::move(center)),
      G(std::move(generators)),
      A(std::move(A_c)),
      b(std::move(b_c)),
      blocks(std::move(blk)) {
  if (A.rows() == 0) A.resize(0, static_cast<Index>(G.size()));
  validate();
}

ConstrainedMatrixZonotope::ConstrainedMatrixZonotope(const MatrixZonotope& m)
    : C(m.C), G(m.G), A(0, m.num_generators()), b(0) {}

void ConstrainedMatrixZonotope::validate() const {
  MatrixZonotope(C, G);
  check_dim(A.cols() == num_generators(), "ConstrainedMatrixZonotope: constraint columns != kappa");
  check_dim(b.size() == A.rows(), "ConstrainedMatrixZonotope: rhs length");
  require_finite(A, "ConstrainedMatrixZonotope constraints");
  require_finite(b, "ConstrainedMatrixZonotope rhs");
  if (blocks) {
    check_dim(static_cast<Index>(blocks->A_blk.size()) == num_generators(),
              "ConstrainedMatrixZonotope: block count != kappa");
    if (block_consistency_error() > 1e-10) {
      throw std::invalid_argument("ConstrainedMatrixZonotope: block form inconsistent with A, b");
    }
  }
}

double ConstrainedMatrixZonotope::block_consistency_error() const {
  if (!blocks) return 0.0;
  double err = 0.0;
  for (Index l = 0; l < num_generators(); ++l) {
    const Matrix& blk = blocks->A_blk[l];
    check_dim(blk.size() == A.rows(), "CmzBlocks: block size differs from constraint rows");
    if (blk.size() > 0) err = std::max(err, (vec(blk) - A.col(l)).lpNorm<Eigen::Infinity>());
  }
  check_dim(blocks->B_blk.size() == b.size(), "CmzBlocks: rhs block size");
  if (b.size() > 0) err = std::max(err, (vec(blocks->B_blk) - b).lpNorm<Eigen::Infinity>());
  return err;
}

ConstrainedZonotope minkowski_sum(const ConstrainedZonotope& a, const ConstrainedZonotope& b) {
  check_dim(a.dim() == b.dim(), "minkowski_sum: dimension mismatch");
  return ConstrainedZonotope(a.c + b.c, hcat({&a.G, &b.G}, a.dim()), block_diag(a.A, b.A),
                             vcat(a.b, b.b));
}

Zonotope minkowski_sum(const Zonotope& a, const Zonotope& b) {
  check_dim(a.dim() == b.dim(), "minkowski_sum: dimension mismatch");
  return Zonotope(a.c + b.c, hcat({&a.G, &b.G}, a.dim()));
}

ConstrainedZonotope linear_map(const Matrix& M, const ConstrainedZonotope& z) {
  check_dim(M.cols() == z.dim(), "linear_map: matrix columns differ from set dimension");
  return ConstrainedZonotope(M * z.c, M * z.G, z.A, z.b);
}

Zonotope linear_map(const Matrix& M, const Zonotope& z) {
  check_dim(M.cols() == z.dim(), "linear_map: matrix columns differ from set dimension");
  return Zonotope(M * z.c, M * z.G);
}

ConstrainedZonotope cartesian_product(const ConstrainedZonotope& a, const ConstrainedZonotope& b) {
  return ConstrainedZonotope(vcat(a.c, b.c), block_diag(a.G, b.G), block_diag(a.A, b.A),
                             vcat(a.b, b.b));
}

Zonotope cartesian_product(const Zonotope& a, const Zonotope& b) {
  return Zonotope(vcat(a.c, b.c), block_diag(a.G, b.G));
}

ProductParts product_parts(const Matrix& C, const std::vector<Matrix>& gens, const Vector& c,
                           const Matrix& G) {
  check_dim(C.cols() == c.size() && G.rows() == c.size(),
            "matrix set times point set: inner dimensions differ");
  const Index n = C.rows();
  const Index p = G.cols();
  const Index kappa = static_cast<Index>(gens.size());
  ProductParts out;
  out.center = C * c;
  out.G_alpha = C * G;
  out.G_beta.resize(n, kappa);
  out.G_gamma.resize(n, kappa * p);
  for (Index l = 0; l < kappa; ++l) {
    out.G_beta.col(l).noalias() = gens[l] * c;
    if (p > 0) out.G_gamma.middleCols(l * p, p).noalias() = gens[l] * G;
  }
  return out;
}

Zonotope mz_times_zonotope(const MatrixZonotope& M, const Zonotope& z) {
  const ProductParts parts = product_parts(M.C, M.G, z.c, z.G);
  const Index n = M.rows();
  return Zonotope(parts.center, hcat({&parts.G_alpha, &parts.G_beta, &parts.G_gamma}, n));
}

ConstrainedZonotope cmz_times_cz(const ConstrainedMatrixZonotope& M, const ConstrainedZonotope& z) {
  const ProductParts parts = product_parts(M.C, M.G, z.c, z.G);
  const Index n = M.rows();
  const Index p = z.num_generators();
  const Index kappa = M.num_generators();
  const Index qz = z.num_constraints();
  const Index q = M.num_constraints();
  Matrix A = Matrix::Zero(qz + q, p + kappa + kappa * p);
  A.topLeftCorner(qz, p) = z.A;
  A.block(qz, p, q, kappa) = M.A;
  return ConstrainedZonotope(parts.center, hcat({&parts.G_alpha, &parts.G_beta, &parts.G_gamma}, n),
                             std::move(A), vcat(z.b, M.b));
}

ConstrainedZonotope cmz_times_zonotope(const ConstrainedMatrixZonotope& M, const Zonotope& z) {
  return cmz_times_cz(M, ConstrainedZonotope(z));
}

MaybeCz halfspace_intersection(const ConstrainedZonotope& z, const Vector& h, double c) {
  check_dim(h.size() == z.dim(), "halfspace_intersection: normal length");
  if (h.lpNorm<Eigen::Infinity>() == 0.0) {
    throw std::invalid_argument("halfspace_intersection: zero normal");
  }
  const double d = h.dot(z.c);
  const Eigen::RowVectorXd hg = h.transpose() * z.G;
  const double R = hg.cwiseAbs().sum();
  if (d + R <= c) return z;
  if (d - R > c) return std::nullopt;
  const Index m = z.num_generators();
  const Index p = z.num_constraints();
  Matrix G(z.dim(), m + 1);
  G.leftCols(m) = z.G;
  G.col(m).setZero();
  Matrix A = Matrix::Zero(p + 1, m + 1);
  A.topLeftCorner(p, m) = z.A;
  A.block(p, 0, 1, m) = hg;
  A(p, m) = (c - d + R) / 2.0;
  Vector b(p + 1);
  b.head(p) = z.b;
  b(p) = (c - d - R) / 2.0;
  return ConstrainedZonotope(z.c, std::move(G), std::move(A), std::move(b));
}

struct SupportOracle::Impl {
  struct Component {
    std::vector<Index> cols;
    LpProblem lp;
    LpBasis basis;
  };
  Vector c;
  Matrix G;
  std::vector<Index> free_cols;
  std::vector<Component> comps;
  bool inconsistent_row = false;
  std::optional<bool> empty;

  explicit Impl(const ConstrainedZonotope& z) : c(z.c), G(z.G) {
    const Index m = z.num_generators();
    const Index p = z.num_constraints();
    UnionFind uf(p + m);
    std::vector<char> row_used(p, 0), col_used(m, 0);
    for (Index j = 0; j < m; ++j) {
      for (Index i = 0; i < p; ++i) {
        if (z.A(i, j) != 0.0) {
          uf.unite(i, p + j);
          row_used[i] = 1;
          col_used[j] = 1;
        }
      }
    }
    const double bscale = 1.0 + (p > 0 ? z.b.cwiseAbs().maxCoeff() : 0.0);
    for (Index i = 0; i < p; ++i) {
      if (!row_used[i] && std::abs(z.b(i)) > 1e-9 * bscale) inconsistent_row = true;
    }
    for (Index j = 0; j < m; ++j) {
      if (!col_used[j]) free_cols.push_back(j);
    }
    std::vector<Index> comp_of(p + m, -1);
    std::vector<std::vector<Index>> rows_of;
    auto comp_id = [&](Index node) {
      const Index r = uf.find(node);
      if (comp_of[r] < 0) {
        comp_of[r] = static_cast<Index>(comps.size());
        comps.emplace_back();
        rows_of.emplace_back();
      }
      return comp_of[r];
    };
    // Iterate columns first so component order follows factor order.
    for (Index j = 0; j < m; ++j) {
      if (col_used[j]) comps[comp_id(p + j)].cols.push_back(j);
    }
    for (Index i = 0; i < p; ++i) {
      if (row_used[i]) rows_of[comp_id(i)].push_back(i);
    }
    for (size_t k = 0; k < comps.size(); ++k) {
      Component& cp = comps[k];
      const auto& rows = rows_of[k];
      const Index nv = static_cast<Index>(cp.cols.size());
      const Index nr = static_cast<Index>(rows.size());
      cp.lp.A_eq.resize(nr, nv);
      cp.lp.b_eq.resize(nr);
      for (Index r = 0; r < nr; ++r) {
        cp.lp.b_eq(r) = z.b(rows[r]);
        for (Index v = 0; v < nv; ++v) cp.lp.A_eq(r, v) = z.A(rows[r], cp.cols[v]);
      }
      cp.lp.lower = -Vector::Ones(nv);
      cp.lp.upper = Vector::Ones(nv);
      cp.lp.objective = Vector::Zero(nv);
      cp.lp.sense = Sense::maximize;
    }
  }

  bool is_empty() {
    if (empty) return *empty;
    bool e = inconsistent_row;
    LpOptions opt;
    opt.feasibility_only = true;
    for (Component& cp : comps) {
      if (e) break;
      const LpResult r = lp_solve(cp.lp, opt);
      if (r.status != LpStatus::feasible) e = true;
      else cp.basis = r.basis;
    }
    empty = e;
    return e;
  }

  double factor_support(const Vector& w) {
    if (is_empty()) throw std::domain_error("support: set is empty");
    double val = 0.0;
    for (Index j : free_cols) val += std::abs(w(j));
    for (Component& cp : comps) {
      const Index nv = static_cast<Index>(cp.cols.size());
      for (Index v = 0; v < nv; ++v) cp.lp.objective(v) = w(cp.cols[v]);
      LpResult r = lp_solve(cp.lp, {}, &cp.basis);
      if (r.status != LpStatus::feasible) r = lp_solve(cp.lp);
      if (r.status != LpStatus::feasible) {
        throw NumericalError("support: component LP lost feasibility");
      }
      cp.basis = std::move(r.basis);
      val += r.objective;
    }
    return val;
  }
};

SupportOracle::SupportOracle(const ConstrainedZonotope& z) : impl_(std::make_unique<Impl>(z)) {}
SupportOracle::~SupportOracle() = default;
SupportOracle::SupportOracle(SupportOracle&&) noexcept = default;
SupportOracle& SupportOracle::operator=(SupportOracle&&) noexcept = default;

bool SupportOracle::empty() { return impl_->is_empty(); }

double SupportOracle::operator()(const Vector& dir) {
  check_dim(dir.size() == impl_->c.size(), "support: direction length");
  const Vector w = impl_->G.transpose() * dir;
  return dir.dot(impl_->c) + impl_->factor_support(w);
}

double SupportOracle::factor_support(const Vector& weights) {
  check_dim(weights.size() == impl_->G.cols(), "factor_support: weight length");
  return impl_->factor_support(weights);
}

Index SupportOracle::num_components() const { return static_cast<Index>(impl_->comps.size()); }

bool is_empty(const ConstrainedZonotope& z) {
  if (!z.has_constraints()) return false;
  return SupportOracle(z).empty();
}

double support(const ConstrainedZonotope& z, const Vector& dir) {
  SupportOracle oracle(z);
  return oracle(dir);
}

namespace {

// Feasibility of  G_sub xi + e = rhs_x,  A_sub xi = rhs_a,
// |xi| <= 1 + tol, |e| <= tol.
bool witness_lp(const Matrix& G_sub, const Matrix& A_sub, const Vector& rhs_x, const Vector& rhs_a,
                double tol) {
  const Index n = G_sub.rows();
  const Index m = G_sub.cols();
  const Index p = A_sub.rows();
  LpProblem lp;
  lp.A_eq = Matrix::Zero(n + p, m + n);
  lp.A_eq.topLeftCorner(n, m) = G_sub;
  lp.A_eq.topRightCorner(n, n).setIdentity();
  if (p > 0) lp.A_eq.bottomLeftCorner(p, m) = A_sub;
  lp.b_eq = vcat(rhs_x, rhs_a);
  lp.lower.resize(m + n);
  lp.upper.resize(m + n);
  lp.lower.head(m).setConstant(-1.0 - tol);
  lp.upper.head(m).setConstant(1.0 + tol);
  lp.lower.tail(n).setConstant(-tol);
  lp.upper.tail(n).setConstant(tol);
  lp.objective = Vector::Zero(m + n);
  LpOptions opt;
  opt.feasibility_only = true;
  return lp_solve(lp, opt).status == LpStatus::feasible;
}

}  // namespace

bool contains_point(const ConstrainedZonotope& z, const Vector& x, double tol,
                    const Vector* leading_factors) {
  check_dim(x.size() == z.dim(), "contains_point: point dimension");
  const Index m = z.num_generators();
  const Index p = z.num_constraints();
  const Vector radius = z.G.cwiseAbs().rowwise().sum();
  if (((x - z.c).cwiseAbs().array() > radius.array() * (1.0 + tol) + tol).any()) return false;
  if (m == 0) return true;

  if (leading_factors != nullptr && leading_factors->size() <= m &&
      leading_factors->lpNorm<Eigen::Infinity>() <= 1.0 + tol) {
    const Index k = leading_factors->size();
    const Index f = m - k;
    const Vector& h = *leading_factors;
    const Vector rhs_x = x - z.c - z.G.leftCols(k) * h;
    const Vector rhs_a = z.b - z.A.leftCols(k) * h;
    std::vector<Index> rows;
    bool consistent = true;
    for (Index i = 0; i < p; ++i) {
      if (f > 0 && z.A.row(i).tail(f).cwiseAbs().maxCoeff() > 0.0) {
        rows.push_back(i);
      } else if (std::abs(rhs_a(i)) > tol * (1.0 + z.A.row(i).cwiseAbs().sum())) {
        consistent = false;
        break;
      }
    }
    if (consistent) {
      Matrix A_sub(rows.size(), f);
      Vector b_sub(rows.size());
      for (size_t r = 0; r < rows.size(); ++r) {
        A_sub.row(r) = z.A.row(rows[r]).tail(f);
        b_sub(r) = rhs_a(rows[r]);
      }
      if (f == 0) {
        if (rhs_x.lpNorm<Eigen::Infinity>() <= tol) return true;
      } else if (witness_lp(z.G.rightCols(f), A_sub, rhs_x, b_sub, tol)) {
        return true;
      }
    }
  }
  return witness_lp(z.G, z.A, x - z.c, z.b, tol);
}

Interval interval_hull(const ConstrainedZonotope& z) {
  if (!z.has_constraints()) return interval_hull(z.as_zonotope());
  SupportOracle oracle(z);
  if (oracle.empty()) throw std::domain_error("interval_hull: set is empty");
  const Index n = z.dim();
  Interval out{Vector(n), Vector(n)};
  for (Index i = 0; i < n; ++i) {
    Vector e = Vector::Zero(n);
    e(i) = 1.0;
    out.upper(i) = oracle(e);
    out.lower(i) = -oracle(-e);
  }
  return out;
}

Interval interval_hull(const Zonotope& z) {
  const Vector r = z.G.cwiseAbs().rowwise().sum();
  return {z.c - r, z.c + r};
}

namespace {

// Indices of the `keep` largest scores; ties resolved by index. Returned in
// increasing index order.
std::vector<Index> top_scores(const Vector& score, Index keep) {
  std::vector<Index> idx(score.size());
  std::iota(idx.begin(), idx.end(), Index{0});
  keep = std::clamp<Index>(keep, 0, score.size());
  std::nth_element(idx.begin(), idx.begin() + keep, idx.end(), [&](Index a, Index b) {
    return score(a) > score(b) || (score(a) == score(b) && a < b);
  });
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  return idx;
}

Vector girard_scores(const Matrix& V) {
  Vector s(V.cols());
  for (Index j = 0; j < V.cols(); ++j) {
    s(j) = V.col(j).lpNorm<1>() - V.col(j).lpNorm<Eigen::Infinity>();
  }
  return s;
}

}  // namespace

Zonotope reduce_girard(const Zonotope& z, double max_order) {
  if (!(max_order >= 1.0)) throw std::invalid_argument("reduce_girard: max_order must be >= 1");
  const Index n = z.dim();
  const Index m = z.num_generators();
  const Index cap = static_cast<Index>(std::floor(max_order * static_cast<double>(n) + 1e-9));
  if (m <= cap) return z;
  const std::vector<Index> kept = top_scores(girard_scores(z.G), cap - n);
  std::vector<char> is_kept(m, 0);
  for (Index j : kept) is_kept[j] = 1;
  Vector radii = Vector::Zero(n);
  for (Index j = 0; j < m; ++j) {
    if (!is_kept[j]) radii += z.G.col(j).cwiseAbs();
  }
  Index nbox = 0;
  for (Index i = 0; i < n; ++i) nbox += radii(i) > 0.0;
  Matrix G(n, static_cast<Index>(kept.size()) + nbox);
  Index at = 0;
  for (Index j : kept) G.col(at++) = z.G.col(j);
  for (Index i = 0; i < n; ++i) {
    if (radii(i) > 0.0) {
      G.col(at).setZero();
      G(i, at++) = radii(i);
    }
  }
  return Zonotope(z.c, std::move(G));
}

ConstrainedZonotope reduce_free_generators(const ConstrainedZonotope& z, Index first_free,
                                           Index max_free) {
  const Index n = z.dim();
  const Index m = z.num_generators();
  const Index p = z.num_constraints();
  if (first_free < 0 || first_free > m) throw std::out_of_range("reduce_free_generators: first_free");
  if (max_free < 0) throw std::invalid_argument("reduce_free_generators: max_free");
  const Index mf = m - first_free;
  if (mf <= max_free) return z;

  std::vector<Index> active;
  for (Index i = 0; i < p; ++i) {
    if (z.A.row(i).tail(mf).cwiseAbs().maxCoeff() > 0.0) active.push_back(i);
  }
  const Index na = static_cast<Index>(active.size());
  Matrix lifted(n + na, mf);
  lifted.topRows(n) = z.G.rightCols(mf);
  for (Index r = 0; r < na; ++r) lifted.row(n + r) = z.A.row(active[r]).tail(mf);

  const std::vector<Index> kept = top_scores(girard_scores(lifted), std::max<Index>(0, max_free - n - na));
  std::vector<char> is_kept(mf, 0);
  for (Index j : kept) is_kept[j] = 1;
  Vector radii = Vector::Zero(n + na);
  for (Index j = 0; j < mf; ++j) {
    if (!is_kept[j]) radii += lifted.col(j).cwiseAbs();
  }
  std::vector<Index> box_axes;
  for (Index a = 0; a < n + na; ++a) {
    if (radii(a) > 0.0) box_axes.push_back(a);
  }
  const Index nk = static_cast<Index>(kept.size());
  const Index nb = static_cast<Index>(box_axes.size());
  const Index m_out = first_free + nk + nb;
  Matrix G = Matrix::Zero(n, m_out);
  Matrix A = Matrix::Zero(p, m_out);
  G.leftCols(first_free) = z.G.leftCols(first_free);
  A.leftCols(first_free) = z.A.leftCols(first_free);
  for (Index k = 0; k < nk; ++k) {
    G.col(first_free + k) = z.G.col(first_free + kept[k]);
    A.col(first_free + k) = z.A.col(first_free + kept[k]);
  }
  for (Index k = 0; k < nb; ++k) {
    const Index a = box_axes[k];
    const Index col = first_free + nk + k;
    if (a < n) G(a, col) = radii(a);
    else A(active[a - n], col) = radii(a);
  }
  return ConstrainedZonotope(z.c, std::move(G), std::move(A), z.b);
}

namespace {

template <int N>
double det_sum_fixed(const Matrix& G, std::vector<Index>& pick, Index m) {
  Eigen::Matrix<double, N, N> S;
  double total = 0.0;
  while (true) {
    for (int k = 0; k < N; ++k) S.col(k) = G.col(pick[k]);
    total += std::abs(S.determinant());
    int k = N - 1;
    while (k >= 0 && pick[k] == m - N + k) --k;
    if (k < 0) break;
    ++pick[k];
    for (int j = k + 1; j < N; ++j) pick[j] = pick[j - 1] + 1;
  }
  return total;
}

double det_sum_dynamic(const Matrix& G, std::vector<Index>& pick, Index m, Index n) {
  Matrix S(n, n);
  double total = 0.0;
  while (true) {
    for (Index k = 0; k < n; ++k) S.col(k) = G.col(pick[k]);
    total += std::abs(S.partialPivLu().determinant());
    Index k = n - 1;
    while (k >= 0 && pick[k] == m - n + k) --k;
    if (k < 0) break;
    ++pick[k];
    for (Index j = k + 1; j < n; ++j) pick[j] = pick[j - 1] + 1;
  }
  return total;
}

double binomial(Index m, Index n) {
  double r = 1.0;
  for (Index i = 1; i <= n; ++i) r = r * static_cast<double>(m - n + i) / static_cast<double>(i);
  return r;
}

}  // namespace

double volume(const Zonotope& z) {
  const Index n = z.dim();
  const Index m = z.num_generators();
  if (n == 0) return 0.0;
  if (m < n) return 0.0;
  if (binomial(m, n) > 1e7) {
    std::ostringstream msg;
    msg << "volume: " << m << " generators in dimension " << n
        << " exceed the enumeration budget; reduce first";
    throw std::invalid_argument(msg.str());
  }
  std::vector<Index> pick(n);
  std::iota(pick.begin(), pick.end(), Index{0});
  double sum = 0.0;
  switch (n) {
    case 1: sum = z.G.cwiseAbs().sum(); break;
    case 2: sum = det_sum_fixed<2>(z.G, pick, m); break;
    case 3: sum = det_sum_fixed<3>(z.G, pick, m); break;
    case 4: sum = det_sum_fixed<4>(z.G, pick, m); break;
    case 5: sum = det_sum_fixed<5>(z.G, pick, m); break;
    case 6: sum = det_sum_fixed<6>(z.G, pick, m); break;
    default: sum = det_sum_dynamic(z.G, pick, m, n); break;
  }
  return std::ldexp(sum, static_cast<int>(n));
}

namespace {

using Pt = std::array<double, 2>;

Pt line_intersection(double a1, double b1, double c1, double a2, double b2, double c2) {
  const double det = a1 * b2 - a2 * b1;
  return {(c1 * b2 - c2 * b1) / det, (a1 * c2 - a2 * c1) / det};
}

}  // namespace

std::vector<std::array<double, 2>> project_polygon(const ConstrainedZonotope& z,
                                                   std::array<Index, 2> dims, Index n_dirs) {
  const Index n = z.dim();
  if (dims[0] < 0 || dims[1] < 0 || dims[0] >= n || dims[1] >= n || dims[0] == dims[1]) {
    throw std::out_of_range("project_polygon: bad coordinate pair");
  }
  if (!z.has_constraints()) {
    const Pt c{z.c(dims[0]), z.c(dims[1])};
    std::vector<Pt> gens;
    for (Index j = 0; j < z.num_generators(); ++j) {
      Pt g{z.G(dims[0], j), z.G(dims[1], j)};
      if (g[0] == 0.0 && g[1] == 0.0) continue;
      if (g[1] < 0.0 || (g[1] == 0.0 && g[0] < 0.0)) g = {-g[0], -g[1]};
      gens.push_back(g);
    }
    if (gens.empty()) return {c};
    std::sort(gens.begin(), gens.end(),
              [](const Pt& a, const Pt& b) { return std::atan2(a[1], a[0]) < std::atan2(b[1], b[0]); });
    // Merge parallel generators.
    std::vector<Pt> merged;
    for (const Pt& g : gens) {
      if (!merged.empty()) {
        Pt& last = merged.back();
        const double cross = last[0] * g[1] - last[1] * g[0];
        const double scale = std::hypot(last[0], last[1]) * std::hypot(g[0], g[1]);
        if (std::abs(cross) <= 1e-12 * scale) {
          last = {last[0] + g[0], last[1] + g[1]};
          continue;
        }
      }
      merged.push_back(g);
    }
    Pt v = c;
    for (const Pt& g : merged) v = {v[0] + g[0], v[1] + g[1]};
    // Start at the vertex maximizing the first angle's normal, walk around.
    std::vector<Pt> poly;
    poly.reserve(2 * merged.size());
    for (int sign : {-1, 1}) {
      for (const Pt& g : merged) {
        poly.push_back(v);
        v = {v[0] + 2.0 * sign * g[0], v[1] + 2.0 * sign * g[1]};
      }
    }
    return poly;
  }
  if (n_dirs < 3) throw std::invalid_argument("project_polygon: need at least 3 directions");
  SupportOracle oracle(z);
  if (oracle.empty()) throw std::domain_error("project_polygon: set is empty");
  std::vector<double> a(n_dirs), b(n_dirs), h(n_dirs);
  for (Index k = 0; k < n_dirs; ++k) {
    const double th = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_dirs);
    a[k] = std::cos(th);
    b[k] = std::sin(th);
    Vector dir = Vector::Zero(n);
    dir(dims[0]) = a[k];
    dir(dims[1]) = b[k];
    h[k] = oracle(dir);
  }
  std::vector<Pt> poly;
  for (Index k = 0; k < n_dirs; ++k) {
    const Index k2 = (k + 1) % n_dirs;
    poly.push_back(line_intersection(a[k], b[k], h[k], a[k2], b[k2], h[k2]));
  }
  return poly;
}

double polygon_area(const std::vector<std::array<double, 2>>& poly) {
  double s = 0.0;
  const size_t k = poly.size();
  for (size_t i = 0; i < k; ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % k];
    s += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * std::abs(s);
}

}  // namespace ddreach
