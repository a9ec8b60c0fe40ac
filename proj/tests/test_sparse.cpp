#include "chb/sparse.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace chb;

namespace {

SparseMatrix from_dense(const Eigen::MatrixXd& A) {
  std::vector<Triplet> t;
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j)
      if (A(i, j) != 0.0) t.emplace_back(i, j, A(i, j));
  return assemble_from_triplets(t, static_cast<int>(A.rows()), static_cast<int>(A.cols()));
}

Eigen::MatrixXd random_spd(std::mt19937& rng, int n) {
  const Eigen::MatrixXd R = oracle::random_vector(rng, n * n, -1, 1).reshaped(n, n);
  return R * R.transpose() + n * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

TEST(Triplets, DuplicatesAreSummed) {
  const std::vector<Triplet> t = {{0, 0, 1.0}, {0, 0, 2.0}};
  const SparseMatrix A = assemble_from_triplets(t, 1, 1);
  EXPECT_EQ(A.nonZeros(), 1);
  EXPECT_DOUBLE_EQ(A.coeff(0, 0), 3.0);
}

TEST(Triplets, EmptyIsZero) {
  const SparseMatrix A = assemble_from_triplets({}, 2, 2);
  EXPECT_EQ(A.nonZeros(), 0);
  EXPECT_EQ((A * Vector::Ones(2)).norm(), 0.0);
}

TEST(Triplets, SymmetricPattern) {
  const std::vector<Triplet> t = {{0, 1, 5.0}, {1, 0, 5.0}};
  const SparseMatrix A = assemble_from_triplets(t, 2, 2);
  EXPECT_EQ(Eigen::MatrixXd(A), Eigen::MatrixXd(SparseMatrix(A.transpose())));
}

TEST(Triplets, OutOfRange) {
  const std::vector<Triplet> t = {{2, 0, 1.0}};
  EXPECT_THROW(assemble_from_triplets(t, 2, 2), std::out_of_range);
  const std::vector<Triplet> neg = {{0, -1, 1.0}};
  EXPECT_THROW(assemble_from_triplets(neg, 2, 2), std::out_of_range);
}

TEST(Triplets, ColumnsStrictlyIncreasing) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> idx(0, 9);
  std::vector<Triplet> t;
  for (int k = 0; k < 200; ++k) t.emplace_back(idx(rng), idx(rng), 1.0);
  const SparseMatrix A = assemble_from_triplets(t, 10, 10);
  ASSERT_TRUE(A.isCompressed());
  for (int r = 0; r < A.outerSize(); ++r) {
    int prev = -1;
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) {
      EXPECT_GT(it.col(), prev);
      prev = static_cast<int>(it.col());
    }
  }
}

TEST(Spmv, Linearity) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const SparseMatrix A = from_dense(oracle::random_vector(rng, 64, -1, 1).reshaped(8, 8));
    const Vector x = oracle::random_vector(rng, 8, -1, 1), y = oracle::random_vector(rng, 8, -1, 1);
    const double a = 1.7, b = -0.3;
    const Vector lhs = A * (a * x + b * y);
    const Vector rhs = a * (A * x) + b * (A * y);
    EXPECT_LE((lhs - rhs).norm(), 1e-12 * std::max(1.0, lhs.norm()));
  }
}

TEST(SolveSpd, Identity) {
  const SparseMatrix I = from_dense(Eigen::MatrixXd::Identity(2, 2));
  const Vector x = solve_spd(I, Vector::LinSpaced(2, 1, 2)).x;
  EXPECT_NEAR(x[0], 1.0, 1e-14);
  EXPECT_NEAR(x[1], 2.0, 1e-14);
}

TEST(SolveSpd, TwoByTwo) {
  Eigen::MatrixXd A(2, 2);
  A << 4, 1, 1, 3;
  const auto r = solve_spd(from_dense(A), Vector::LinSpaced(2, 1, 2));
  EXPECT_NEAR(r.x[0], 1.0 / 11.0, 1e-12);
  EXPECT_NEAR(r.x[1], 7.0 / 11.0, 1e-12);
  EXPECT_LE(r.stats.residual, 1e-10 * std::sqrt(5.0));
}

TEST(SolveSpd, Diagonal) {
  const SparseMatrix A = from_dense(Eigen::Vector2d(2, 3).asDiagonal());
  const Vector x = solve_spd(A, Vector::Constant(2, 0).cwiseMax(Eigen::Vector2d(2, 3))).x;
  EXPECT_NEAR(x[0], 1.0, 1e-14);
  EXPECT_NEAR(x[1], 1.0, 1e-14);
}

TEST(SolveSpd, MatchesDenseOracle) {
  std::mt19937 rng(11);
  for (int n : {3, 8, 17, 32}) {
    const Eigen::MatrixXd A = random_spd(rng, n);
    const Vector b = oracle::random_vector(rng, n, -1, 1);
    const Vector ref = A.llt().solve(b);
    const Vector x = solve_spd(from_dense(A), b).x;
    EXPECT_LE((x - ref).norm(), 1e-8 * ref.norm()) << n;
  }
}

TEST(SolveSpd, PreconditioningDoesNotChangeSolution) {
  std::mt19937 rng(12);
  for (int n : {5, 16, 32}) {
    Eigen::MatrixXd A = random_spd(rng, n);
    // badly scaled rows and columns
    const Vector s = oracle::random_vector(rng, n, 0.1, 10.0);
    A = s.asDiagonal() * A * s.asDiagonal();
    const Vector b = oracle::random_vector(rng, n, -1, 1);
    SolverConfig with, without;
    without.jacobi = false;
    const auto r1 = solve_spd(from_dense(A), b, with);
    const auto r2 = solve_spd(from_dense(A), b, without);
    EXPECT_LE((r1.x - r2.x).norm(), 1e-8 * r1.x.norm()) << n;
  }
}

TEST(SolveSpd, ReportsNonConvergence) {
  std::mt19937 rng(13);
  const Eigen::MatrixXd A = random_spd(rng, 20);
  SolverConfig cfg;
  cfg.max_iterations = 1;
  try {
    solve_spd(from_dense(A), oracle::random_vector(rng, 20, -1, 1), cfg);
    FAIL() << "expected a solver error";
  } catch (const SolverError& e) {
    EXPECT_GT(e.stats().residual, 0.0);
    EXPECT_EQ(e.stats().iterations, 1);
  }
}

TEST(SolveSpd, RejectsBadTolerances) {
  SolverConfig cfg;
  cfg.relative_tolerance = 0.0;
  EXPECT_THROW(solve_spd(from_dense(Eigen::MatrixXd::Identity(2, 2)), Vector::Ones(2), cfg),
               std::invalid_argument);
}

TEST(SolveGeneral, Permutation) {
  Eigen::MatrixXd A(2, 2);
  A << 0, 1, 1, 0;
  const Vector x = solve_general(from_dense(A), Eigen::Vector2d(3, 4)).x;
  EXPECT_NEAR(x[0], 4.0, 1e-12);
  EXPECT_NEAR(x[1], 3.0, 1e-12);
}

TEST(SolveGeneral, Identity) {
  const Vector b = Eigen::Vector3d(0.5, -2, 7);
  const Vector x = solve_general(from_dense(Eigen::MatrixXd::Identity(3, 3)), b).x;
  EXPECT_LE((x - b).norm(), 1e-14);
}

TEST(SolveGeneral, UpperTriangular) {
  Eigen::MatrixXd A(2, 2);
  A << 2, 1, 0, 2;
  const Vector x = solve_general(from_dense(A), Eigen::Vector2d(4, 2)).x;
  EXPECT_NEAR(x[0], 1.5, 1e-12);
  EXPECT_NEAR(x[1], 1.0, 1e-12);
}

TEST(SolveGeneral, MatchesDenseOracleAndIgnoresPreconditioning) {
  std::mt19937 rng(21);
  for (int n : {4, 12, 32}) {
    Eigen::MatrixXd A = oracle::random_vector(rng, n * n, -1, 1).reshaped(n, n);
    A += 2.0 * n * Eigen::MatrixXd::Identity(n, n);
    const Vector b = oracle::random_vector(rng, n, -1, 1);
    const Vector ref = A.partialPivLu().solve(b);
    SolverConfig plain;
    plain.jacobi = false;
    const Vector x1 = solve_general(from_dense(A), b).x;
    const Vector x2 = solve_general(from_dense(A), b, plain).x;
    EXPECT_LE((x1 - ref).norm(), 1e-8 * ref.norm());
    EXPECT_LE((x2 - ref).norm(), 1e-8 * ref.norm());
  }
}

TEST(SolveGeneral, FactoredPreconditionerFromNearbyMatrix) {
  std::mt19937 rng(22);
  const int n = 30;
  Eigen::MatrixXd A = oracle::random_vector(rng, n * n, -1, 1).reshaped(n, n);
  A += n * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd A2 = A + 0.05 * oracle::random_vector(rng, n * n, -1, 1).reshaped(n, n);
  FactoredPreconditioner P;
  EXPECT_FALSE(P.ready());
  P.factor(from_dense(A));
  ASSERT_TRUE(P.ready());
  const Vector b = oracle::random_vector(rng, n, -1, 1);
  const auto r = solve_general(from_dense(A2), b, P.action());
  EXPECT_LE((r.x - A2.partialPivLu().solve(b)).norm(), 1e-8);
  EXPECT_LT(r.stats.iterations, 10);
}

TEST(SolveGeneral, FactoringSingularMatrixFails) {
  FactoredPreconditioner P;
  EXPECT_THROW(P.factor(from_dense(Eigen::MatrixXd::Zero(3, 3))), std::runtime_error);
  EXPECT_THROW(P.apply(Vector::Ones(3)), std::logic_error);
}

TEST(Constraints, SymmetricEliminationKeepsSymmetry) {
  std::mt19937 rng(31);
  const Eigen::MatrixXd A = random_spd(rng, 6);
  SparseMatrix S = from_dense(A);
  Vector b = oracle::random_vector(rng, 6, -1, 1);
  const std::vector<std::uint8_t> mask = {1, 0, 0, 1, 0, 0};
  constrain_homogeneous(S, b, mask);
  const Eigen::MatrixXd D(S);
  EXPECT_TRUE(D.isApprox(D.transpose()));
  for (int i : {0, 3}) {
    EXPECT_EQ(b[i], 0.0);
    EXPECT_EQ(D(i, i), 1.0);
    EXPECT_EQ(D.row(i).cwiseAbs().sum(), 1.0);
    EXPECT_EQ(D.col(i).cwiseAbs().sum(), 1.0);
  }
  const Vector x = solve_spd(S, b).x;
  EXPECT_EQ(x[0], 0.0);
  EXPECT_EQ(x[3], 0.0);
}
