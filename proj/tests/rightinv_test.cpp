#include "ddreach/rightinv.hpp"

#include <gtest/gtest.h>

#include "ddreach/modelset.hpp"
#include "test_util.hpp"

namespace ddreach {
namespace {

using testing::random_matrix;

TEST(PinvRightInverse, OrthonormalRows) {
  Matrix phi(2, 3);
  phi << 1, 0, 0, 0, 1, 0;
  const RightInverseResult r = pinv_right_inverse(phi);
  Matrix expected(3, 2);
  expected << 1, 0, 0, 1, 0, 0;
  EXPECT_LT((r.H - expected).norm(), 1e-14);
  EXPECT_NEAR(r.row_norm_sum, 2.0, 1e-14);
  EXPECT_EQ(r.method, RightInverseMethod::pinv);
}

TEST(PinvRightInverse, RowVector) {
  Matrix phi(1, 2);
  phi << 1, 1;
  const RightInverseResult r = pinv_right_inverse(phi);
  EXPECT_NEAR(r.frob_norm, std::sqrt(0.5), 1e-14);
  EXPECT_LT(r.residual, 1e-10);
}

TEST(PinvRightInverse, MinimalFrobeniusAmongRightInverses) {
  std::mt19937_64 gen(1);
  const Matrix phi = random_matrix(3, 12, gen);
  const RightInverseResult r = pinv_right_inverse(phi);
  const Matrix perp = nullspace_basis(phi);
  for (int k = 0; k < 100; ++k) {
    const Matrix H = r.H + perp * random_matrix(perp.cols(), 3, gen);
    ASSERT_LT((phi * H - Matrix::Identity(3, 3)).norm(), 1e-9);
    EXPECT_GE(H.norm(), r.frob_norm - 1e-12);
  }
}

TEST(PinvRightInverse, RankDeficientThrows) {
  EXPECT_THROW(pinv_right_inverse(Matrix::Ones(2, 4)), RankDeficientError);
}

TEST(RowNormRightInverse, OrthonormalRowsOptimumTwo) {
  Matrix phi(2, 3);
  phi << 1, 0, 0, 0, 1, 0;
  const RightInverseResult r = row_norm_right_inverse(phi);
  EXPECT_NEAR(r.row_norm_sum, 2.0, 1e-7);
  EXPECT_LT(r.residual, 1e-8);
}

TEST(RowNormRightInverse, RowVectorMatchesGrid) {
  Matrix phi(1, 2);
  phi << 1, 1;
  double grid = 1e300;
  for (int i = -2000; i <= 3000; ++i) {
    const double h1 = i / 1000.0;
    grid = std::min(grid, std::abs(h1) + std::abs(1.0 - h1));
  }
  const RightInverseResult r = row_norm_right_inverse(phi);
  EXPECT_NEAR(r.row_norm_sum, grid, 1e-7);
  EXPECT_NEAR(r.row_norm_sum, 1.0, 1e-7);
}

TEST(RowNormRightInverse, SandwichTightOnRowVector) {
  Matrix phi(1, 2);
  phi << 1, 1;
  const SandwichCheck s = verify_sandwich(phi, row_norm_right_inverse(phi));
  EXPECT_NEAR(s.lhs, std::sqrt(0.5), 1e-14);
  EXPECT_NEAR(s.gamma, 1.0, 1e-7);
  EXPECT_NEAR(s.rhs, 1.0, 1e-14);
  EXPECT_TRUE(s.holds);
}

TEST(RowNormRightInverse, RandomPropertyRun) {
  std::mt19937_64 gen(2);
  std::uniform_int_distribution<int> dd(1, 8);
  for (int trial = 0; trial < 100; ++trial) {
    const Index d = dd(gen);
    std::uniform_int_distribution<int> tt(static_cast<int>(d), 80);
    const Matrix phi = random_matrix(d, tt(gen), gen);
    const RightInverseResult row = row_norm_right_inverse(phi);
    const RightInverseResult pinv = pinv_right_inverse(phi);
    EXPECT_LE(row.residual, 1e-8);
    EXPECT_LE(row.row_norm_sum, pinv.row_norm_sum + 1e-7);
    EXPECT_GE(row.row_norm_sum, row.frob_norm);
    EXPECT_TRUE(verify_sandwich(phi, row, 1e-6).holds) << trial;
    // Optimality: certified by the dual bound.
    EXPECT_LE(row.row_norm_sum - row.lower_bound, 1e-7 * row.row_norm_sum);
  }
}

TEST(RowNormRightInverse, FiveByThirtySeeds) {
  for (int seed = 0; seed < 100; ++seed) {
    std::mt19937_64 gen(seed);
    const Matrix phi = random_matrix(5, 30, gen);
    EXPECT_TRUE(verify_sandwich(phi, row_norm_right_inverse(phi)).holds);
  }
}

TEST(RowNormRightInverse, DualBoundIsValid) {
  std::mt19937_64 gen(3);
  const Matrix phi = random_matrix(3, 10, gen);
  const double opt = row_norm_right_inverse(phi).row_norm_sum;
  for (int k = 0; k < 50; ++k) {
    EXPECT_LE(row_norm_dual_bound(phi, random_matrix(3, 3, gen)), opt + 1e-9);
  }
}

TEST(RowNormRightInverse, NonConvergenceCarriesBestIterate) {
  std::mt19937_64 gen(4);
  const Matrix phi = random_matrix(6, 50, gen);
  RowNormOptions opt;
  opt.max_iter = 3;
  opt.tol = 1e-14;
  try {
    row_norm_right_inverse(phi, opt);
    FAIL() << "expected RightInverseError";
  } catch (const RightInverseError& e) {
    EXPECT_LT(e.best().residual, 1e-8);
    EXPECT_LE(e.best().row_norm_sum, pinv_right_inverse(phi).row_norm_sum + 1e-9);
  }
}

TEST(RowNormRightInverse, Deterministic) {
  std::mt19937_64 gen(5);
  const Matrix phi = random_matrix(4, 25, gen);
  EXPECT_EQ(row_norm_right_inverse(phi).H, row_norm_right_inverse(phi).H);
}

TEST(RowNormRightInverse, ShrinksModelSetProxy) {
  std::mt19937_64 gen(6);
  const Matrix A = 0.5 * Matrix::Identity(2, 2);
  const Matrix B = Matrix::Ones(2, 1);
  const Zonotope W(Vector::Zero(2), 0.01 * Matrix::Identity(2, 2));
  const DataSet data = testing::simulate_lti_data(A, B, W, 4, 5, gen);
  const double p_row =
      generator_norm_proxy(build_model_sets(data, W, row_norm_right_inverse(data.Phi()).H).mz);
  const double p_pinv =
      generator_norm_proxy(build_model_sets(data, W, pinv_right_inverse(data.Phi()).H).mz);
  EXPECT_LE(p_row, p_pinv + 1e-7);
}

}  // namespace
}  // namespace ddreach
