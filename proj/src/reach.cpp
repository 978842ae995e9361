#include "ddreach/reach.hpp"

#include <cmath>
#include <limits>

namespace ddreach {

bool Region::contains(const Vector& x, double tol) const {
  for (const Halfspace& hs : halfspaces) {
    if (hs.h.dot(x) > hs.c + tol) return false;
  }
  return true;
}

int PwaSpec::mode_of(const Vector& x) const {
  for (size_t q = 0; q < regions.size(); ++q) {
    if (regions[q].contains(x)) return static_cast<int>(q);
  }
  return -1;
}

void PwaSpec::validate() const {
  if (regions.empty()) throw std::invalid_argument("PwaSpec: no regions");
  if (!A.empty() && (A.size() != regions.size() || B.size() != regions.size())) {
    throw DimensionError("PwaSpec: one (A, B) pair per region expected");
  }
}

Index ReachStep::max_generators() const {
  Index m = 0;
  for (const Fragment& f : fragments) m = std::max(m, f.set.num_generators());
  return m;
}

Index ReachStep::max_constraints() const {
  Index m = 0;
  for (const Fragment& f : fragments) m = std::max(m, f.set.num_constraints());
  return m;
}

namespace {

void check_shapes(Index n, Index cols, const Zonotope& X0, const Zonotope& U, const Zonotope& W) {
  if (X0.dim() != n || W.dim() != n || cols != n + U.dim()) {
    throw DimensionError("propagate: model, X0, U and W dimensions disagree");
  }
}

ReachStep initial_step(const Zonotope& X0) {
  ReachStep s;
  Fragment f;
  f.set = ConstrainedZonotope(X0);
  f.mode = -1;
  s.fragments.push_back(std::move(f));
  return s;
}

}  // namespace

ReachResult propagate_lti(const MatrixZonotope& model, const Zonotope& X0, const Zonotope& U_prop,
                          const Zonotope& W, Index horizon, const ReachOptions& opt) {
  const Index n = model.rows();
  check_shapes(n, model.cols(), X0, U_prop, W);
  if (horizon < 0) throw std::invalid_argument("propagate_lti: negative horizon");
  const double order = static_cast<double>(opt.max_generators) / static_cast<double>(n);
  ReachResult out;
  out.steps.push_back(initial_step(X0));
  Zonotope R = X0;
  for (Index k = 0; k < horizon; ++k) {
    Zonotope next = minkowski_sum(mz_times_zonotope(model, cartesian_product(R, U_prop)), W);
    ReachStep s;
    if (next.num_generators() > opt.max_generators) {
      next = reduce_girard(next, order);
      s.reductions = 1;
    }
    R = next;
    Fragment f;
    f.set = ConstrainedZonotope(R);
    f.mode = 0;
    f.parent = 0;
    s.fragments.push_back(std::move(f));
    out.steps.push_back(std::move(s));
  }
  return out;
}

Fragment cz_step(const Fragment& frag, const ConstrainedMatrixZonotope& M, int mode,
                 const Zonotope& U, const Zonotope& W, Index max_free, bool* reduced) {
  const ConstrainedZonotope& z = frag.set;
  const Index n = M.rows();
  check_shapes(n, M.cols(), Zonotope::point(z.c), U, W);
  const Index nz = z.dim();
  const Index nu = U.dim();
  const Index m = z.num_generators();
  const Index mu = U.num_generators();
  const Index p = m + mu;
  const Index np = frag.num_protected;
  const Index qz = z.num_constraints();
  const Index kappa = M.num_generators();
  const bool protect_beta = M.num_constraints() > 0;

  Vector c(nz + nu);
  c << z.c, U.c;
  Matrix G = Matrix::Zero(nz + nu, p);
  G.topLeftCorner(nz, m) = z.G;
  G.bottomRightCorner(nu, mu) = U.G;
  const ProductParts parts = product_parts(M.C, M.G, c, G);

  // Constraint-free part: alpha of the unprotected factors, gamma, W, and
  // beta when the model has no constraints.
  const Index na_alpha = p - np;
  const Index nbeta_free = protect_beta ? 0 : kappa;
  const Index nfree = na_alpha + nbeta_free + parts.G_gamma.cols() + W.num_generators();
  std::vector<Index> active;
  for (Index i = 0; i < qz; ++i) {
    if (m > np && z.A.row(i).tail(m - np).cwiseAbs().maxCoeff() > 0.0) active.push_back(i);
  }
  const Index na = static_cast<Index>(active.size());
  Matrix Gf(n, nfree);
  Matrix Af = Matrix::Zero(na, nfree);
  {
    Index at = 0;
    Gf.middleCols(at, na_alpha) = parts.G_alpha.rightCols(na_alpha);
    for (Index r = 0; r < na; ++r) Af.row(r).segment(at, m - np) = z.A.row(active[r]).tail(m - np);
    at += na_alpha;
    if (nbeta_free > 0) Gf.middleCols(at, kappa) = parts.G_beta;
    at += nbeta_free;
    Gf.middleCols(at, parts.G_gamma.cols()) = parts.G_gamma;
    at += parts.G_gamma.cols();
    Gf.middleCols(at, W.num_generators()) = W.G;
  }
  ConstrainedZonotope free_part(Vector::Zero(n), std::move(Gf), std::move(Af), Vector::Zero(na));
  if (free_part.num_generators() > max_free) {
    free_part = reduce_free_generators(free_part, 0, max_free);
    if (reduced) *reduced = true;
  } else if (reduced) {
    *reduced = false;
  }

  const Index nb = protect_beta ? kappa : 0;
  const Index np_new = np + nb;
  const Index mf = free_part.num_generators();
  const Index q = protect_beta ? M.num_constraints() : 0;
  Fragment out;
  out.mode = mode;
  out.num_protected = np_new;
  out.protected_blocks = frag.protected_blocks;
  if (protect_beta) out.protected_blocks.push_back(mode);

  Matrix Gn(n, np_new + mf);
  Gn.leftCols(np) = parts.G_alpha.leftCols(np);
  if (nb > 0) Gn.middleCols(np, nb) = parts.G_beta;
  Gn.rightCols(mf) = free_part.G;
  Matrix An = Matrix::Zero(qz + q, np_new + mf);
  if (qz > 0) An.topLeftCorner(qz, np) = z.A.leftCols(np);
  for (Index r = 0; r < na; ++r) An.row(active[r]).tail(mf) = free_part.A.row(r);
  if (q > 0) An.block(qz, np, q, kappa) = M.A;
  Vector bn(qz + q);
  bn << z.b, (protect_beta ? M.b : Vector());
  out.set = ConstrainedZonotope(parts.center + W.c, std::move(Gn), std::move(An), std::move(bn));
  return out;
}

ReachResult propagate_lti(const ConstrainedMatrixZonotope& model, const Zonotope& X0,
                          const Zonotope& U_prop, const Zonotope& W, Index horizon,
                          const ReachOptions& opt) {
  check_shapes(model.rows(), model.cols(), X0, U_prop, W);
  if (horizon < 0) throw std::invalid_argument("propagate_lti: negative horizon");
  ReachResult out;
  out.steps.push_back(initial_step(X0));
  for (Index k = 0; k < horizon; ++k) {
    bool reduced = false;
    Fragment f = cz_step(out.steps.back().fragments[0], model, 0, U_prop, W, opt.max_generators,
                         &reduced);
    f.parent = 0;
    ReachStep s;
    s.reductions = reduced ? 1 : 0;
    s.fragments.push_back(std::move(f));
    out.steps.push_back(std::move(s));
  }
  return out;
}

ModePartition partition_data_by_mode(const std::vector<Trajectory>& trajs, const PwaSpec& pwa) {
  pwa.validate();
  const Index Q = pwa.num_modes();
  if (trajs.empty()) throw std::invalid_argument("partition_data_by_mode: no trajectories");
  const Index n = trajs[0].X.rows();
  const Index m = trajs[0].U.rows();
  const Index pw = trajs[0].noise_factors.rows();
  std::vector<std::vector<std::array<Index, 2>>> picks(Q);
  for (size_t i = 0; i < trajs.size(); ++i) {
    const Trajectory& t = trajs[i];
    for (Index s = 0; s < t.U.cols(); ++s) {
      const int q = pwa.mode_of(t.X.col(s));
      if (q < 0) throw std::domain_error("partition_data_by_mode: state outside every region");
      picks[q].push_back({static_cast<Index>(i), s});
    }
  }
  ModePartition out;
  for (Index q = 0; q < Q; ++q) {
    const Index Tq = static_cast<Index>(picks[q].size());
    DataSet d;
    d.X_plus.resize(n, Tq);
    d.X_minus.resize(n, Tq);
    d.U_minus.resize(m, Tq);
    if (pw > 0) d.noise_factors.resize(pw, Tq);
    for (Index j = 0; j < Tq; ++j) {
      const Trajectory& t = trajs[picks[q][j][0]];
      const Index s = picks[q][j][1];
      d.X_minus.col(j) = t.X.col(s);
      d.X_plus.col(j) = t.X.col(s + 1);
      d.U_minus.col(j) = t.U.col(s);
      if (pw > 0) d.noise_factors.col(j) = t.noise_factors.col(s);
    }
    d.lengths = {Tq};
    if (Tq < n + m) {
      out.warnings.push_back("mode " + std::to_string(q) + ": " + std::to_string(Tq) +
                             " transitions, fewer than d = " + std::to_string(n + m));
    }
    out.per_mode.push_back(std::move(d));
  }
  return out;
}

ReachResult propagate_pwa(const std::vector<ConstrainedMatrixZonotope>& models, const PwaSpec& pwa,
                          const Zonotope& X0, const Zonotope& U_prop, const Zonotope& W,
                          Index horizon, const ReachOptions& opt) {
  pwa.validate();
  if (static_cast<Index>(models.size()) != pwa.num_modes()) {
    throw std::invalid_argument("propagate_pwa: one model set per mode expected");
  }
  for (const auto& M : models) check_shapes(M.rows(), M.cols(), X0, U_prop, W);
  if (horizon < 0) throw std::invalid_argument("propagate_pwa: negative horizon");
  ReachResult out;
  out.steps.push_back(initial_step(X0));
  for (Index k = 0; k < horizon; ++k) {
    const ReachStep& prev = out.steps.back();
    ReachStep s;
    for (size_t fi = 0; fi < prev.fragments.size(); ++fi) {
      const Fragment& f = prev.fragments[fi];
      for (Index q = 0; q < pwa.num_modes(); ++q) {
        MaybeCz piece = f.set;
        bool cut = false;
        for (const Halfspace& hs : pwa.regions[q].halfspaces) {
          const Index before = piece->num_generators();
          piece = halfspace_intersection(*piece, hs.h, hs.c);
          if (!piece) break;
          cut = cut || piece->num_generators() != before;
        }
        if (!piece || (cut && is_empty(*piece))) {
          ++s.pruned;
          continue;
        }
        Fragment split = f;
        split.set = std::move(*piece);
        bool reduced = false;
        Fragment next = cz_step(split, models[q], static_cast<int>(q), U_prop, W,
                                opt.max_generators, &reduced);
        next.parent = static_cast<Index>(fi);
        s.reductions += reduced ? 1 : 0;
        s.fragments.push_back(std::move(next));
        if (static_cast<Index>(s.fragments.size()) > opt.max_fragments) {
          throw std::runtime_error("propagate_pwa: more than " + std::to_string(opt.max_fragments) +
                                   " fragments; use a shorter horizon or a coarser partition");
        }
      }
    }
    out.steps.push_back(std::move(s));
  }
  return out;
}

ReachResult model_based_reference(const Matrix& A, const Matrix& B, const Zonotope& X0,
                                  const Zonotope& U_prop, const Zonotope& W, Index horizon,
                                  const ReachOptions& opt) {
  return propagate_lti(singleton_model(A, B).unconstrained(), X0, U_prop, W, horizon, opt);
}

ReachResult model_based_reference(const PwaSpec& pwa, const Zonotope& X0, const Zonotope& U_prop,
                                  const Zonotope& W, Index horizon, const ReachOptions& opt) {
  pwa.validate();
  if (pwa.A.empty()) throw std::invalid_argument("model_based_reference: no true dynamics");
  std::vector<ConstrainedMatrixZonotope> models;
  for (Index q = 0; q < pwa.num_modes(); ++q) models.push_back(singleton_model(pwa.A[q], pwa.B[q]));
  return propagate_pwa(models, pwa, X0, U_prop, W, horizon, opt);
}

bool fragment_contains(const Fragment& f, const Vector& x, const std::vector<Vector>& beta_by_mode,
                       double tol) {
  Vector hint(f.num_protected);
  Index at = 0;
  bool usable = true;
  for (int q : f.protected_blocks) {
    if (q < 0 || q >= static_cast<int>(beta_by_mode.size()) || beta_by_mode[q].size() == 0 ||
        at + beta_by_mode[q].size() > f.num_protected) {
      usable = false;
      break;
    }
    hint.segment(at, beta_by_mode[q].size()) = beta_by_mode[q];
    at += beta_by_mode[q].size();
  }
  usable = usable && at == f.num_protected && f.num_protected > 0;
  return contains_point(f.set, x, tol, usable ? &hint : nullptr);
}

bool step_contains(const ReachStep& s, const Vector& x, const std::vector<Vector>& beta_by_mode,
                   double tol) {
  for (const Fragment& f : s.fragments) {
    if (fragment_contains(f, x, beta_by_mode, tol)) return true;
  }
  return false;
}

double step_support(const ReachStep& s, const Vector& dir) {
  double best = -std::numeric_limits<double>::infinity();
  for (const Fragment& f : s.fragments) {
    SupportOracle oracle(f.set);
    if (oracle.empty()) continue;
    best = std::max(best, oracle(dir));
  }
  return best;
}

json to_json(const Fragment& f) {
  return {{"mode", f.mode},
          {"parent", f.parent},
          {"num_protected", f.num_protected},
          {"protected_blocks", f.protected_blocks},
          {"set", to_json(f.set)}};
}

json to_json(const ReachStep& s) {
  json frags = json::array();
  for (const Fragment& f : s.fragments) frags.push_back(to_json(f));
  return {{"fragments", frags},
          {"reductions", s.reductions},
          {"pruned", s.pruned},
          {"max_generators", s.max_generators()},
          {"max_constraints", s.max_constraints()}};
}

}  // namespace ddreach
