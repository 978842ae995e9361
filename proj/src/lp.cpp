#include "ddreach/lp.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace ddreach {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::feasible:
      return "feasible";
    case LpStatus::infeasible:
      return "infeasible";
    case LpStatus::unbounded:
      return "unbounded";
  }
  return "unknown";
}

void LpProblem::validate() const {
  const Index n = objective.size();
  if (A_eq.cols() != n && !(A_eq.rows() == 0)) {
    throw DimensionError("LpProblem: constraint matrix has wrong column count");
  }
  if (A_eq.rows() != b_eq.size()) {
    throw DimensionError("LpProblem: rhs length differs from constraint rows");
  }
  if (lower.size() != n || upper.size() != n) {
    throw DimensionError("LpProblem: bound vectors have wrong length");
  }
  for (Index j = 0; j < n; ++j) {
    if (std::isnan(lower(j)) || std::isnan(upper(j)) || lower(j) > upper(j)) {
      throw std::invalid_argument("LpProblem: lower bound exceeds upper bound");
    }
  }
  if (!objective.allFinite() || !A_eq.allFinite() || !b_eq.allFinite()) {
    throw std::invalid_argument("LpProblem: non-finite data");
  }
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;
constexpr double kDegenerateStep = 1e-12;

enum VarState : std::int8_t { kBasic = 0, kAtLower = 1, kAtUpper = 2, kAtZero = 3 };

class BoundedSimplex {
 public:
  BoundedSimplex(const LpProblem& p, const LpOptions& o) : opt_(o) {
    m_ = p.num_rows();
    n_ = p.num_vars();
    N_ = n_ + m_;
    A_ = p.A_eq.rows() == 0 ? Matrix(0, n_) : p.A_eq;
    b_ = p.b_eq;
    for (Index i = 0; i < m_; ++i) {
      const double s = A_.row(i).cwiseAbs().maxCoeff();
      if (s > 0.0) {
        A_.row(i) /= s;
        b_(i) /= s;
      }
    }
    lo_.resize(N_);
    up_.resize(N_);
    lo_.head(n_) = p.lower;
    up_.head(n_) = p.upper;
    lo_.tail(m_).setZero();
    up_.tail(m_).setConstant(kInf);
    cost2_ = p.sense == Sense::maximize ? Vector(-p.objective) : p.objective;
    art_sign_ = Vector::Ones(m_);
    x_ = Vector::Zero(N_);
    basis_.assign(m_, 0);
    state_.assign(N_, kAtLower);
    max_iter_ = o.max_iterations > 0 ? o.max_iterations : 20 * (m_ + N_) + 1000;
  }

  LpResult run(const LpBasis* warm) {
    LpResult res;
    bool warm_ok = warm != nullptr && !warm->empty() && try_warm_start(*warm);
    if (!warm_ok) {
      cold_start();
      Vector phase1 = Vector::Zero(N_);
      phase1.tail(m_).setOnes();
      iterate(phase1);
      const double infeas = m_ > 0 ? x_.tail(m_).cwiseAbs().maxCoeff() : 0.0;
      const double scale = 1.0 + (m_ > 0 ? b_.cwiseAbs().maxCoeff() : 0.0);
      if (infeas > opt_.feasibility_tol * scale) {
        res.status = LpStatus::infeasible;
        res.iterations = iterations_;
        res.x = x_.head(n_);
        return res;
      }
      drive_out_artificials();
    }
    if (!opt_.feasibility_only) {
      Vector phase2 = Vector::Zero(N_);
      phase2.head(n_) = cost2_;
      if (!iterate(phase2)) {
        res.status = LpStatus::unbounded;
        res.iterations = iterations_;
        res.x = x_.head(n_);
        res.objective = cost2_.dot(res.x);
        return res;
      }
    }
    res.status = LpStatus::feasible;
    res.iterations = iterations_;
    res.x = x_.head(n_);
    res.objective = cost2_.dot(res.x);
    res.basis.basic = basis_;
    res.basis.state = state_;
    res.basis.artificial_sign.resize(m_);
    for (Index i = 0; i < m_; ++i) res.basis.artificial_sign[i] = art_sign_(i) > 0 ? 1 : -1;
    return res;
  }

 private:
  const LpOptions& opt_;
  Index m_ = 0, n_ = 0, N_ = 0;
  Matrix A_;
  Vector b_;
  Vector lo_, up_;
  Vector cost2_;
  Vector art_sign_;
  Vector x_;
  std::vector<Index> basis_;
  std::vector<std::int8_t> state_;
  Matrix Binv_;
  Index iterations_ = 0;
  Index max_iter_ = 0;
  Index since_refactor_ = 0;
  Index degenerate_run_ = 0;

  bool fixed(Index j) const { return lo_(j) == up_(j); }

  void set_nonbasic_value(Index j) {
    if (std::isfinite(lo_(j))) {
      state_[j] = kAtLower;
      x_(j) = lo_(j);
    } else if (std::isfinite(up_(j))) {
      state_[j] = kAtUpper;
      x_(j) = up_(j);
    } else {
      state_[j] = kAtZero;
      x_(j) = 0.0;
    }
  }

  Vector column(Index j) const {
    if (j < n_) return A_.col(j);
    Vector e = Vector::Zero(m_);
    e(j - n_) = art_sign_(j - n_);
    return e;
  }

  Vector binv_times_column(Index j) const {
    if (j < n_) return Binv_ * A_.col(j);
    return art_sign_(j - n_) * Binv_.col(j - n_);
  }

  void cold_start() {
    for (Index j = 0; j < n_; ++j) set_nonbasic_value(j);
    Vector r = b_ - A_ * x_.head(n_);
    for (Index i = 0; i < m_; ++i) {
      art_sign_(i) = r(i) >= 0.0 ? 1.0 : -1.0;
      basis_[i] = n_ + i;
      state_[n_ + i] = kBasic;
      x_(n_ + i) = std::abs(r(i));
      lo_(n_ + i) = 0.0;
      up_(n_ + i) = kInf;
    }
    Binv_ = art_sign_.asDiagonal();
    since_refactor_ = 0;
  }

  bool try_warm_start(const LpBasis& w) {
    if (static_cast<Index>(w.basic.size()) != m_ || static_cast<Index>(w.state.size()) != N_ ||
        static_cast<Index>(w.artificial_sign.size()) != m_) {
      return false;
    }
    for (Index i = 0; i < m_; ++i) {
      art_sign_(i) = w.artificial_sign[i] >= 0 ? 1.0 : -1.0;
      lo_(n_ + i) = 0.0;
      up_(n_ + i) = 0.0;
    }
    std::vector<char> seen(N_, 0);
    for (Index i = 0; i < m_; ++i) {
      const Index j = w.basic[i];
      if (j < 0 || j >= N_ || seen[j] || w.state[j] != kBasic) return false;
      seen[j] = 1;
      basis_[i] = j;
    }
    for (Index j = 0; j < N_; ++j) {
      state_[j] = w.state[j];
      if (seen[j]) continue;
      switch (state_[j]) {
        case kAtLower:
          if (!std::isfinite(lo_(j))) return false;
          x_(j) = lo_(j);
          break;
        case kAtUpper:
          if (!std::isfinite(up_(j))) return false;
          x_(j) = up_(j);
          break;
        case kAtZero:
          if (std::isfinite(lo_(j)) || std::isfinite(up_(j))) return false;
          x_(j) = 0.0;
          break;
        default:
          return false;
      }
    }
    if (!refactor(false)) return false;
    for (Index i = 0; i < m_; ++i) {
      const Index j = basis_[i];
      const double tol = opt_.feasibility_tol * (1.0 + std::abs(x_(j)));
      if (x_(j) < lo_(j) - tol || x_(j) > up_(j) + tol) return false;
    }
    return true;
  }

  // Recomputes the basis inverse and basic values. Returns false on a
  // singular basis when `must_succeed` is false.
  bool refactor(bool must_succeed = true) {
    since_refactor_ = 0;
    if (m_ == 0) {
      Binv_.resize(0, 0);
      return true;
    }
    Matrix B(m_, m_);
    for (Index i = 0; i < m_; ++i) B.col(i) = column(basis_[i]);
    Eigen::PartialPivLU<Matrix> lu(B);
    Binv_ = lu.inverse();
    if (!Binv_.allFinite() || !(lu.rcond() > 1e-14)) {
      if (!must_succeed) return false;
      throw NumericalError("lp_solve: basis matrix became singular");
    }
    Vector rhs = b_;
    for (Index j = 0; j < N_; ++j) {
      if (state_[j] == kBasic || x_(j) == 0.0) continue;
      rhs -= x_(j) * column(j);
    }
    const Vector xb = Binv_ * rhs;
    for (Index i = 0; i < m_; ++i) x_(basis_[i]) = xb(i);
    return true;
  }

  void pivot(Index r, Index q, const Vector& alpha) {
    const Eigen::RowVectorXd pr = Binv_.row(r) / alpha(r);
    Binv_.noalias() -= alpha * pr;
    Binv_.row(r) = pr;
    basis_[r] = q;
    state_[q] = kBasic;
    ++since_refactor_;
  }

  // Returns false when the problem is unbounded along an improving ray.
  bool iterate(const Vector& cost) {
    bool bland = false;
    degenerate_run_ = 0;
    Vector cb(m_);
    while (true) {
      if (since_refactor_ >= opt_.refactor_interval) refactor();
      if (++iterations_ > max_iter_) {
        std::ostringstream msg;
        msg << "lp_solve: iteration cap " << max_iter_ << " exceeded (" << m_ << " rows, " << n_
            << " columns)";
        throw NumericalError(msg.str());
      }
      for (Index i = 0; i < m_; ++i) cb(i) = cost(basis_[i]);
      const Vector y = Binv_.transpose() * cb;
      Vector d(N_);
      d.head(n_) = cost.head(n_) - A_.transpose() * y;
      for (Index i = 0; i < m_; ++i) d(n_ + i) = cost(n_ + i) - art_sign_(i) * y(i);

      Index q = -1;
      double best = 0.0;
      int dir = 0;
      for (Index j = 0; j < N_; ++j) {
        if (state_[j] == kBasic || fixed(j)) continue;
        int dj = 0;
        if (state_[j] == kAtLower && d(j) < -opt_.optimality_tol) dj = 1;
        else if (state_[j] == kAtUpper && d(j) > opt_.optimality_tol) dj = -1;
        else if (state_[j] == kAtZero && std::abs(d(j)) > opt_.optimality_tol) dj = d(j) < 0 ? 1 : -1;
        if (dj == 0) continue;
        if (bland) {
          q = j;
          dir = dj;
          break;
        }
        if (std::abs(d(j)) > best) {
          best = std::abs(d(j));
          q = j;
          dir = dj;
        }
      }
      if (q < 0) return true;

      const Vector alpha = binv_times_column(q);
      const double flip = up_(q) - lo_(q);

      Index r = -1;
      double t = kInf;
      if (bland) {
        for (Index i = 0; i < m_; ++i) {
          if (std::abs(alpha(i)) <= kPivotTol) continue;
          const double rate = -dir * alpha(i);
          const Index bi = basis_[i];
          double dist = kInf;
          if (rate < 0 && std::isfinite(lo_(bi))) dist = std::max(0.0, x_(bi) - lo_(bi)) / -rate;
          if (rate > 0 && std::isfinite(up_(bi))) dist = std::max(0.0, up_(bi) - x_(bi)) / rate;
          if (r < 0 || dist < t - 1e-12) {
            t = dist;
            r = i;
          } else if (dist <= t + 1e-12 && bi < basis_[r]) {
            r = i;
          }
        }
      } else {
        // Harris two-pass ratio test.
        double relaxed = kInf;
        for (Index i = 0; i < m_; ++i) {
          if (std::abs(alpha(i)) <= kPivotTol) continue;
          const double rate = -dir * alpha(i);
          const Index bi = basis_[i];
          const double tol = opt_.feasibility_tol;
          if (rate < 0 && std::isfinite(lo_(bi))) relaxed = std::min(relaxed, (x_(bi) - lo_(bi) + tol) / -rate);
          if (rate > 0 && std::isfinite(up_(bi))) relaxed = std::min(relaxed, (up_(bi) - x_(bi) + tol) / rate);
        }
        if (std::isfinite(relaxed)) {
          double big = 0.0;
          for (Index i = 0; i < m_; ++i) {
            if (std::abs(alpha(i)) <= kPivotTol) continue;
            const double rate = -dir * alpha(i);
            const Index bi = basis_[i];
            double dist = kInf;
            if (rate < 0 && std::isfinite(lo_(bi))) dist = std::max(0.0, x_(bi) - lo_(bi)) / -rate;
            if (rate > 0 && std::isfinite(up_(bi))) dist = std::max(0.0, up_(bi) - x_(bi)) / rate;
            if (dist <= relaxed && std::abs(alpha(i)) > big) {
              big = std::abs(alpha(i));
              r = i;
              t = dist;
            }
          }
        }
      }

      if (std::isfinite(flip) && flip <= t) {
        // Entering variable reaches its opposite bound first.
        for (Index i = 0; i < m_; ++i) x_(basis_[i]) -= dir * flip * alpha(i);
        if (dir > 0) {
          x_(q) = up_(q);
          state_[q] = kAtUpper;
        } else {
          x_(q) = lo_(q);
          state_[q] = kAtLower;
        }
        degenerate_run_ = 0;
        bland = false;
        continue;
      }
      if (r < 0) return false;

      for (Index i = 0; i < m_; ++i) x_(basis_[i]) -= dir * t * alpha(i);
      x_(q) += dir * t;
      const Index leaving = basis_[r];
      const double rate = -dir * alpha(r);
      if (rate < 0) {
        x_(leaving) = lo_(leaving);
        state_[leaving] = kAtLower;
      } else {
        x_(leaving) = up_(leaving);
        state_[leaving] = fixed(leaving) ? kAtLower : kAtUpper;
      }
      pivot(r, q, alpha);

      if (t <= kDegenerateStep) {
        if (++degenerate_run_ >= opt_.degenerate_before_bland) bland = true;
      } else {
        degenerate_run_ = 0;
        bland = false;
      }
    }
  }

  void drive_out_artificials() {
    for (Index i = 0; i < m_; ++i) {
      lo_(n_ + i) = 0.0;
      up_(n_ + i) = 0.0;
      if (state_[n_ + i] != kBasic) {
        state_[n_ + i] = kAtLower;
        x_(n_ + i) = 0.0;
      }
    }
    bool changed = false;
    for (Index r = 0; r < m_; ++r) {
      const Index p = basis_[r];
      if (p < n_) continue;
      const Eigen::RowVectorXd row = Binv_.row(r) * A_;
      Index q = -1;
      double best = 1e-7;
      for (Index j = 0; j < n_; ++j) {
        if (state_[j] == kBasic) continue;
        if (std::abs(row(j)) > best) {
          best = std::abs(row(j));
          q = j;
        }
      }
      if (q < 0) continue;
      const Vector alpha = binv_times_column(q);
      x_(p) = 0.0;
      state_[p] = kAtLower;
      pivot(r, q, alpha);
      changed = true;
    }
    for (Index i = 0; i < m_; ++i) {
      if (state_[n_ + i] != kBasic) x_(n_ + i) = 0.0;
    }
    if (changed || m_ > 0) refactor();
  }
};

}  // namespace

LpResult lp_solve(const LpProblem& problem, const LpOptions& options, const LpBasis* warm_start) {
  problem.validate();
  BoundedSimplex solver(problem, options);
  LpResult res = solver.run(warm_start);
  res.objective = problem.objective.dot(res.x);
  return res;
}

}  // namespace ddreach
