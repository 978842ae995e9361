#include "ddreach/reach.hpp"

#include <gtest/gtest.h>

#include "ddreach/rightinv.hpp"
#include "test_util.hpp"

namespace ddreach {
namespace {

using testing::random_box_point;
using testing::random_matrix;
using testing::random_unit;

struct Lti {
  Matrix A, B;
  Zonotope W, X0, U;
};

Lti small_lti() {
  Lti s;
  s.A.resize(3, 3);
  s.A << 0.8, 0.2, 0.0, -0.2, 0.8, 0.1, 0.0, 0.0, 0.7;
  s.B.resize(3, 2);
  s.B << 1.0, 0.0, 0.5, 0.5, 0.0, 1.0;
  s.W = Zonotope(Vector::Zero(3), 0.01 * Matrix::Identity(3, 3));
  s.X0 = Zonotope(Vector::Ones(3), 0.1 * Matrix::Identity(3, 3));
  Vector cu(2);
  cu << 0.5, -0.2;
  s.U = Zonotope(cu, 0.1 * Matrix::Identity(2, 2));
  return s;
}

Vector point_in(const Zonotope& z, std::mt19937_64& gen) {
  return z.c + z.G * random_box_point(z.num_generators(), gen);
}

// States of one true trajectory, x(0) .. x(horizon).
std::vector<Vector> true_run(const Lti& s, Index horizon, std::mt19937_64& gen) {
  std::vector<Vector> xs{point_in(s.X0, gen)};
  for (Index k = 0; k < horizon; ++k) {
    xs.push_back(s.A * xs.back() + s.B * point_in(s.U, gen) + point_in(s.W, gen));
  }
  return xs;
}

TEST(PropagateLti, HorizonZero) {
  const Lti s = small_lti();
  const ReachResult r = model_based_reference(s.A, s.B, s.X0, s.U, s.W, 0);
  ASSERT_EQ(r.steps.size(), 1u);
  EXPECT_EQ(r.steps[0].fragments[0].set.c, s.X0.c);
  EXPECT_EQ(r.steps[0].fragments[0].set.G, s.X0.G);
}

TEST(PropagateLti, SingletonModelIsAffineRecursion) {
  const Lti s = small_lti();
  const Zonotope none = Zonotope::point(Vector::Zero(3));
  ReachOptions opt;
  opt.max_generators = 1000;
  const ReachResult r = model_based_reference(s.A, s.B, s.X0, s.U, none, 4, opt);
  Zonotope R = s.X0;
  for (Index k = 1; k <= 4; ++k) {
    R = minkowski_sum(linear_map(s.A, R), linear_map(s.B, s.U));
    const ConstrainedZonotope& got = r.steps[k].fragments[0].set;
    EXPECT_LT((got.c - R.c).norm(), 1e-12);
    std::mt19937_64 gen(k);
    for (int d = 0; d < 16; ++d) {
      const Vector dir = random_unit(3, gen);
      EXPECT_NEAR(support(got, dir), support(R, dir), 1e-12);
    }
  }
}

TEST(PropagateLti, MzPathRespectsGeneratorCap) {
  std::mt19937_64 gen(1);
  const Lti s = small_lti();
  const DataSet data = testing::simulate_lti_data(s.A, s.B, s.W, 4, 5, gen);
  const ModelSetBundle b = build_model_sets(data, s.W, pinv_right_inverse(data.Phi()).H);
  ReachOptions opt;
  opt.max_generators = 30;
  const ReachResult r = propagate_lti(b.mz, s.X0, s.U, s.W, 5, opt);
  for (Index k = 1; k <= 5; ++k) EXPECT_LE(r.steps[k].max_generators(), 30);
  EXPECT_GT(r.steps[5].reductions, 0);
}

TEST(PropagateLti, CmzPathProtectsConstrainedColumns) {
  std::mt19937_64 gen(2);
  const Lti s = small_lti();
  const DataSet data = testing::simulate_lti_data(s.A, s.B, s.W, 4, 5, gen);
  const ModelSetBundle b = build_model_sets(data, s.W, pinv_right_inverse(data.Phi()).H);
  ReachOptions opt;
  opt.max_generators = 30;
  const ReachResult r = propagate_lti(b.cmz, s.X0, s.U, s.W, 3, opt);
  const Index kappa = b.cmz.num_generators();
  for (Index k = 1; k <= 3; ++k) {
    const Fragment& f = r.steps[k].fragments[0];
    EXPECT_EQ(f.num_protected, k * kappa);
    EXPECT_EQ(f.protected_blocks.size(), static_cast<size_t>(k));
    EXPECT_LE(f.set.num_generators() - f.num_protected, 30);
    EXPECT_EQ(f.set.num_constraints(), k * b.cmz.num_constraints());
    // Constraints touch only the protected columns.
    EXPECT_EQ(f.set.A.rightCols(f.set.num_generators() - f.num_protected).cwiseAbs().maxCoeff(), 0.0);
  }
}

class LtiSoundness : public ::testing::TestWithParam<RightInverseMethod> {};

TEST_P(LtiSoundness, SampledTrajectoriesContained) {
  std::mt19937_64 gen(3);
  const Lti s = small_lti();
  const DataSet data = testing::simulate_lti_data(s.A, s.B, s.W, 5, 5, gen);
  const ModelSetBundle b =
      build_model_sets(data, s.W, compute_right_inverse(data.Phi(), GetParam()).H);
  const std::vector<Vector> beta{noise_coefficients(data.noise_factors)};
  const Index horizon = 4;
  const ReachResult mz = propagate_lti(b.mz, s.X0, s.U, s.W, horizon);
  const ReachResult cmz = propagate_lti(b.cmz, s.X0, s.U, s.W, horizon);
  const ReachResult ref = model_based_reference(s.A, s.B, s.X0, s.U, s.W, horizon);
  for (int run = 0; run < 100; ++run) {
    const std::vector<Vector> xs = true_run(s, horizon, gen);
    for (Index k = 0; k <= horizon; ++k) {
      EXPECT_TRUE(step_contains(mz.steps[k], xs[k], {}, 1e-6)) << "mz step " << k;
      EXPECT_TRUE(step_contains(cmz.steps[k], xs[k], beta, 1e-6)) << "cmz step " << k;
      EXPECT_TRUE(step_contains(ref.steps[k], xs[k], {}, 1e-6)) << "ref step " << k;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(BothInverses, LtiSoundness,
                         ::testing::Values(RightInverseMethod::pinv, RightInverseMethod::row_norm));

TEST(PropagateLti, CmzNotLooserThanMz) {
  std::mt19937_64 gen(4);
  const Lti s = small_lti();
  const DataSet data = testing::simulate_lti_data(s.A, s.B, s.W, 5, 5, gen);
  const ModelSetBundle b = build_model_sets(data, s.W, row_norm_right_inverse(data.Phi()).H);
  const ReachResult mz = propagate_lti(b.mz, s.X0, s.U, s.W, 4);
  const ReachResult cmz = propagate_lti(b.cmz, s.X0, s.U, s.W, 4);
  for (Index k = 1; k <= 4; ++k) {
    SupportOracle oc(cmz.steps[k].fragments[0].set);
    for (int d = 0; d < 32; ++d) {
      const Vector dir = random_unit(3, gen);
      EXPECT_LE(oc(dir), support(mz.steps[k].fragments[0].set, dir) + 1e-6) << k;
    }
  }
}

TEST(CzStep, UnconstrainedModelMatchesZonotopeProduct) {
  std::mt19937_64 gen(5);
  const Lti s = small_lti();
  std::vector<Matrix> gens{0.01 * random_matrix(3, 5, gen), 0.01 * random_matrix(3, 5, gen)};
  Matrix C(3, 5);
  C << s.A, s.B;
  const MatrixZonotope M(C, gens);
  Fragment f;
  f.set = ConstrainedZonotope(s.X0);
  const Fragment next = cz_step(f, ConstrainedMatrixZonotope(M), 0, s.U, s.W, 1000);
  const Zonotope z = minkowski_sum(mz_times_zonotope(M, cartesian_product(s.X0, s.U)), s.W);
  EXPECT_FALSE(next.set.has_constraints());
  for (int d = 0; d < 16; ++d) {
    const Vector dir = random_unit(3, gen);
    EXPECT_NEAR(support(next.set, dir), support(z, dir), 1e-12);
  }
}

PwaSpec benchmark_pwa() {
  PwaSpec p;
  Vector e1(2);
  e1 << 1, 0;
  p.regions = {Region{{Halfspace{-e1, 0.0}}}, Region{{Halfspace{e1, 0.0}}}};
  Matrix A1(2, 2), A2(2, 2), B1(2, 1), B2(2, 1);
  A1 << 0.75, 0.25, -0.25, 0.75;
  A2 << 0.75, -0.25, 0.25, 0.75;
  B1 << -0.25, -0.25;
  B2 << 0.25, -0.25;
  p.A = {A1, A2};
  p.B = {B1, B2};
  return p;
}

Zonotope pwa_u() { return Zonotope(Vector::Constant(1, -4.0), Matrix::Constant(1, 1, 0.025)); }
Zonotope pwa_w() { return Zonotope(Vector::Zero(2), 0.005 * Matrix::Identity(2, 2)); }

Trajectory pwa_run(const PwaSpec& p, const Vector& x0, const Zonotope& U, const Zonotope& W,
                   Index steps, std::mt19937_64& gen, bool random_u) {
  Trajectory t;
  t.X.resize(2, steps + 1);
  t.U.resize(1, steps);
  t.noise_factors.resize(2, steps);
  t.X.col(0) = x0;
  for (Index k = 0; k < steps; ++k) {
    const int q = p.mode_of(t.X.col(k));
    t.modes.push_back(q);
    Vector u = random_u ? Vector(Vector::Constant(1, 3.0 * (random_box_point(1, gen)(0)))) : point_in(U, gen);
    t.U.col(k) = u;
    t.noise_factors.col(k) = random_box_point(2, gen);
    t.X.col(k + 1) = p.A[q] * t.X.col(k) + p.B[q] * u + W.G * t.noise_factors.col(k);
  }
  return t;
}

TEST(PartitionData, AllInOneMode) {
  const PwaSpec p = benchmark_pwa();
  Trajectory t;
  t.X = Matrix::Ones(2, 4);
  t.U = Matrix::Ones(1, 3);
  t.noise_factors = Matrix::Zero(2, 3);
  const ModePartition part = partition_data_by_mode({t}, p);
  EXPECT_EQ(part.per_mode[0].T(), 3);
  EXPECT_EQ(part.per_mode[1].T(), 0);
  EXPECT_EQ(part.warnings.size(), 1u);  // only the empty mode has T < d
}

TEST(PartitionData, SplitsAtSignChangeAndTiesGoFirst) {
  const PwaSpec p = benchmark_pwa();
  Trajectory t;
  t.X.resize(2, 5);
  t.X << -1.0, 0.0, 1.0, -0.5, 2.0, 0, 0, 0, 0, 0;
  t.U = Matrix::Zero(1, 4);
  t.noise_factors = Matrix::Zero(2, 4);
  const ModePartition part = partition_data_by_mode({t}, p);
  ASSERT_EQ(part.per_mode[0].T(), 2);  // x1 = 0 and x1 = 1
  ASSERT_EQ(part.per_mode[1].T(), 2);
  EXPECT_EQ(part.per_mode[0].X_minus(0, 0), 0.0);
  EXPECT_EQ(part.per_mode[0].X_plus(0, 0), 1.0);
  EXPECT_EQ(part.per_mode[1].X_plus(0, 1), 2.0);
  EXPECT_EQ(part.per_mode[0].T() + part.per_mode[1].T(), 4);
}

TEST(PropagatePwa, SingleRegionMatchesLti) {
  const PwaSpec p = benchmark_pwa();
  // Far inside x1 >= 0 with u = 0 the state stays in mode 0 for 4 steps.
  Vector c(2);
  c << 50.0, 0.0;
  const Zonotope X0(c, 0.1 * Matrix::Identity(2, 2));
  const Zonotope U = Zonotope::point(Vector::Zero(1));
  const ReachResult pwa = model_based_reference(p, X0, U, pwa_w(), 4);
  const ReachResult lti =
      propagate_lti(singleton_model(p.A[0], p.B[0]), X0, U, pwa_w(), 4);
  std::mt19937_64 gen(7);
  for (Index k = 1; k <= 4; ++k) {
    ASSERT_EQ(pwa.steps[k].fragments.size(), 1u);
    EXPECT_EQ(pwa.steps[k].fragments[0].mode, 0);
    for (int d = 0; d < 8; ++d) {
      const Vector dir = random_unit(2, gen);
      EXPECT_NEAR(step_support(pwa.steps[k], dir), step_support(lti.steps[k], dir), 1e-10);
    }
  }
}

TEST(PropagatePwa, BranchCountAndSoundness) {
  std::mt19937_64 gen(8);
  const PwaSpec p = benchmark_pwa();
  Vector c(2);
  c << -1.0, -8.0;
  const Zonotope X0(c, 0.25 * Matrix::Identity(2, 2));
  const Index horizon = 6;
  const ReachResult ref = model_based_reference(p, X0, pwa_u(), pwa_w(), horizon);
  bool split = false;
  for (Index k = 1; k <= horizon; ++k) {
    EXPECT_LE(ref.steps[k].fragments.size(), size_t{1} << k);
    split = split || ref.steps[k].fragments.size() > 1;
  }
  EXPECT_TRUE(split);

  // Data-driven sets from random-input data over both modes.
  std::vector<Trajectory> trajs;
  for (int i = 0; i < 8; ++i) {
    Vector x0(2);
    x0 << 6.0 * random_box_point(1, gen)(0), 8.0 * random_box_point(1, gen)(0);
    trajs.push_back(pwa_run(p, x0, pwa_u(), pwa_w(), 5, gen, true));
  }
  const ModePartition part = partition_data_by_mode(trajs, p);
  std::vector<ConstrainedMatrixZonotope> models;
  std::vector<Vector> betas;
  for (const DataSet& d : part.per_mode) {
    ASSERT_GE(d.T(), 3);
    const ModelSetBundle b = build_model_sets(d, pwa_w(), row_norm_right_inverse(d.Phi()).H);
    models.push_back(b.cmz);
    betas.push_back(noise_coefficients(d.noise_factors));
  }
  const ReachResult dd = propagate_pwa(models, p, X0, pwa_u(), pwa_w(), horizon);
  for (int run = 0; run < 100; ++run) {
    const Trajectory t = pwa_run(p, point_in(X0, gen), pwa_u(), pwa_w(), horizon, gen, false);
    for (Index k = 0; k <= horizon; ++k) {
      EXPECT_TRUE(step_contains(ref.steps[k], t.X.col(k), {}, 1e-6)) << "ref step " << k;
      EXPECT_TRUE(step_contains(dd.steps[k], t.X.col(k), betas, 1e-6)) << "dd step " << k;
    }
  }
  for (Index k = 1; k <= horizon; ++k) {
    for (int d = 0; d < 8; ++d) {
      const Vector dir = random_unit(2, gen);
      EXPECT_LE(step_support(ref.steps[k], dir), step_support(dd.steps[k], dir) + 1e-6);
    }
  }
}

TEST(PropagatePwa, FragmentCapThrows) {
  const PwaSpec p = benchmark_pwa();
  const Zonotope X0(Vector::Zero(2), Matrix::Identity(2, 2));
  ReachOptions opt;
  opt.max_fragments = 1;
  EXPECT_THROW(model_based_reference(p, X0, pwa_u(), pwa_w(), 2, opt), std::runtime_error);
}

TEST(Region, TieBreakFirstRegion) {
  const PwaSpec p = benchmark_pwa();
  EXPECT_EQ(p.mode_of(Vector::Zero(2)), 0);
  Vector x(2);
  x << -1e-12, 3;
  EXPECT_EQ(p.mode_of(x), 1);
}

TEST(ReachJson, StepShape) {
  const Lti s = small_lti();
  const ReachResult r = model_based_reference(s.A, s.B, s.X0, s.U, s.W, 1);
  const json j = to_json(r.steps[1]);
  EXPECT_EQ(j["fragments"].size(), 1u);
  EXPECT_EQ(j["fragments"][0]["set"]["type"], "constrained_zonotope");
}

}  // namespace
}  // namespace ddreach
