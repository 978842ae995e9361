#include "ddreach/inputdesign.hpp"

#include <cmath>

namespace ddreach {

InfoState info_init(Index d, double delta) {
  if (d < 1) throw std::invalid_argument("info_init: dimension must be positive");
  if (!(delta > 0.0)) throw std::invalid_argument("info_init: delta must be positive");
  InfoState s;
  s.S = delta * Matrix::Identity(d, d);
  s.S_inv = Matrix::Identity(d, d) / delta;
  s.delta = delta;
  return s;
}

void info_update(InfoState& state, const Vector& s) {
  if (s.size() != state.dim()) throw DimensionError("info_update: vector length");
  require_finite(s, "info_update");
  const Vector v = state.S_inv * s;
  const double denom = 1.0 + s.dot(v);
  state.S.noalias() += s * s.transpose();
  state.S_inv.noalias() -= v * v.transpose() / denom;
  state.S_inv = 0.5 * (state.S_inv + state.S_inv.transpose()).eval();
  ++state.k;
  const Index d = state.dim();
  if ((state.S * state.S_inv - Matrix::Identity(d, d)).norm() > 1e-6) {
    state.S_inv = state.S.llt().solve(Matrix::Identity(d, d));
    ++state.refactorizations;
  }
}

double delta_A(const InfoState& state, const Vector& s) {
  if (s.size() != state.dim()) throw DimensionError("delta_A: vector length");
  const Vector v = state.S_inv * s;
  return v.squaredNorm() / (1.0 + s.dot(v));
}

double delta_A(const InfoState& state, const Vector& x, const Vector& u) {
  Vector s(x.size() + u.size());
  s << x, u;
  return delta_A(state, s);
}

namespace {

Vector clamp_box(const Vector& xi) { return xi.cwiseMax(-1.0).cwiseMin(1.0); }

// Alternating projection onto {A xi = b} and the box. Returns false when it
// does not settle within 100 passes.
bool project_factors(const Matrix& A, const Matrix& A_pinv, const Vector& b, Vector& xi) {
  xi = clamp_box(xi);
  if (A.rows() == 0) return true;
  for (int pass = 0; pass < 100; ++pass) {
    xi -= A_pinv * (A * xi - b);
    xi = clamp_box(xi);
    if ((A * xi - b).lpNorm<Eigen::Infinity>() <= 1e-9) return true;
  }
  return false;
}

Vector uniform_box(Index m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v(m);
  for (Index i = 0; i < m; ++i) v(i) = u(rng);
  return v;
}

Vector sample_factors(const ConstrainedZonotope& z, const Matrix& A_pinv, std::mt19937_64& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Vector xi = uniform_box(z.num_generators(), rng);
    if (project_factors(z.A, A_pinv, z.b, xi)) return xi;
  }
  throw NumericalError("sample_input: no feasible sample after 1000 retries");
}

// f(u) = N(u) / D(u) with N = s^T S^-2 s, D = 1 + s^T S^-1 s, s = [x; u];
// both are quadratics in u from the (x, u) blocks of S^-1 and S^-2.
struct Quotient {
  Matrix Q1, Q2;
  Vector q1, q2;
  double c1 = 0.0, c2 = 0.0;

  Quotient(const InfoState& st, const Vector& x) {
    const Index n = x.size();
    const Index m = st.dim() - n;
    const Matrix& M1 = st.S_inv;
    const Matrix M2 = M1 * M1;
    Q1 = M1.bottomRightCorner(m, m);
    Q2 = M2.bottomRightCorner(m, m);
    q1 = M1.bottomLeftCorner(m, n) * x;
    q2 = M2.bottomLeftCorner(m, n) * x;
    c1 = 1.0 + x.dot(M1.topLeftCorner(n, n) * x);
    c2 = x.dot(M2.topLeftCorner(n, n) * x);
  }
  double value(const Vector& u) const {
    const double N = u.dot(Q2 * u) + 2.0 * q2.dot(u) + c2;
    const double D = u.dot(Q1 * u) + 2.0 * q1.dot(u) + c1;
    return N / D;
  }
  Vector gradient(const Vector& u) const {
    const double N = u.dot(Q2 * u) + 2.0 * q2.dot(u) + c2;
    const double D = u.dot(Q1 * u) + 2.0 * q1.dot(u) + c1;
    const Vector gN = 2.0 * (Q2 * u + q2);
    const Vector gD = 2.0 * (Q1 * u + q1);
    return (gN * D - N * gD) / (D * D);
  }
};

}  // namespace

Vector sample_input(const ConstrainedZonotope& u_set, std::mt19937_64& rng) {
  const Matrix A_pinv = u_set.has_constraints() ? pseudoinverse(u_set.A) : Matrix();
  return u_set.c + u_set.G * sample_factors(u_set, A_pinv, rng);
}

DesignChoice design_input(const InfoState& state, const Vector& x, const ConstrainedZonotope& u_set,
                          const DesignConfig& cfg, std::mt19937_64& rng) {
  if (cfg.n_candidates < 1) throw std::invalid_argument("design_input: n_candidates must be >= 1");
  if (x.size() + u_set.dim() != state.dim()) throw DimensionError("design_input: dimensions");
  const Quotient f(state, x);
  const Matrix A_pinv = u_set.has_constraints() ? pseudoinverse(u_set.A) : Matrix();
  auto input_of = [&](const Vector& xi) -> Vector { return u_set.c + u_set.G * xi; };

  Vector best_xi;
  double best = -1.0;
  for (Index i = 0; i < cfg.n_candidates; ++i) {
    const Vector xi = sample_factors(u_set, A_pinv, rng);
    const double v = f.value(input_of(xi));
    if (v > best) {
      best = v;
      best_xi = xi;
    }
  }
  DesignChoice out;
  out.best_sampled = best;

  // Projected gradient ascent in factor space with Armijo backtracking.
  Vector xi = best_xi;
  double val = best;
  for (Index it = 0; it < cfg.refine_iters; ++it) {
    const Vector g = u_set.G.transpose() * f.gradient(input_of(xi));
    if (g.lpNorm<Eigen::Infinity>() < 1e-14) break;
    double t = cfg.refine_step;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
      Vector cand = xi + t * g;
      if (!project_factors(u_set.A, A_pinv, u_set.b, cand)) continue;
      const double cv = f.value(input_of(cand));
      if (cv >= val + 1e-4 * g.dot(cand - xi) && cv > val) {
        xi = cand;
        val = cv;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  if (val > best) {
    best = val;
    best_xi = xi;
  }
  out.u = input_of(best_xi);
  out.delta_A = best;
  return out;
}

DesignChoice design_input(const InfoState& state, const Vector& x, const ConstrainedZonotope& u_set,
                          const DesignConfig& cfg) {
  std::mt19937_64 rng(cfg.rng_seed);
  return design_input(state, x, u_set, cfg, rng);
}

json to_json(const DesignLogEntry& e) {
  return {{"trajectory", e.trajectory},
          {"step", e.step},
          {"u", vector_to_json(e.u)},
          {"delta_A", e.delta_A},
          {"trace_S_inv", e.trace_inv}};
}

json to_json(const std::vector<DesignLogEntry>& log) {
  json j = json::array();
  for (const auto& e : log) j.push_back(to_json(e));
  return j;
}

}  // namespace ddreach
