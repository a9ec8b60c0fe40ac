#include "chb/assembly.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace chb;

namespace {

double max_diff(const SparseMatrix& A, const Eigen::MatrixXd& B) {
  return (Eigen::MatrixXd(A) - B).cwiseAbs().maxCoeff();
}

Vector interior_vector(const Mesh& m, std::mt19937& rng) {
  Vector v = oracle::random_vector(rng, 2 * m.num_nodes(), -1, 1);
  for (int k : m.boundary_nodes) v.segment<2>(2 * k).setZero();
  return v;
}

}  // namespace

TEST(ScalarMass, Examples) {
  for (int n : {1, 3, 8}) {
    const Mesh m = build_mesh({n});
    const SparseMatrix M = assemble_scalar_mass(m);
    EXPECT_NEAR(Eigen::MatrixXd(M).sum(), 1.0, 1e-13);
    EXPECT_NEAR((M * Vector::Ones(m.num_nodes())).sum(), 1.0, 1e-13);
    EXPECT_LE((Vector(M * Vector::Ones(m.num_nodes())) - q1::lumped_mass(m)).norm(), 1e-15);
  }
  const Mesh one = build_mesh({1});
  EXPECT_NEAR(assemble_scalar_mass(one).coeff(0, 0), 1.0 / 9.0, 1e-15);
}

TEST(ScalarMass, SymmetricPositiveDefiniteAndMatchesOracle) {
  const Mesh m = build_mesh({4});
  const Eigen::MatrixXd M(assemble_scalar_mass(m));
  EXPECT_LE((M - M.transpose()).cwiseAbs().maxCoeff(), 1e-16);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M).eigenvalues().minCoeff(), 0.0);
  EXPECT_LE((M - oracle::mass(4)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Stiffness, Examples) {
  const Mesh one = build_mesh({1});
  const SparseMatrix K1 = assemble_weighted_stiffness(one, 1.0);
  EXPECT_NEAR(K1.coeff(0, 0), 2.0 / 3.0, 1e-15);
  const SparseMatrix K2 = assemble_weighted_stiffness(one, 2.0);
  EXPECT_LE((Eigen::MatrixXd(K2) - 2.0 * Eigen::MatrixXd(K1)).cwiseAbs().maxCoeff(), 1e-15);
  const Mesh m = build_mesh({5});
  EXPECT_LE((assemble_weighted_stiffness(m, 1.0) * Vector::Ones(m.num_nodes())).cwiseAbs().maxCoeff(),
            1e-13);
}

TEST(Stiffness, VariableCoefficientMatchesOracle) {
  const Mesh m = build_mesh({4});
  const MaterialTable t;
  const oracle::Params P;
  std::mt19937 rng(1);
  const Vector phi = oracle::random_vector(rng, m.num_nodes(), -0.1, 1.1);
  const SparseMatrix K = assemble_weighted_stiffness(
      m, coefficient(m, phi, [&](double x) { return permeability(t, x).value; }));
  const Eigen::MatrixXd ref = oracle::stiffness(
      4, [&](const oracle::Point& p) { return oracle::lerp(oracle::interp(p, phi), P.kappa0, P.kappa1); });
  EXPECT_LE(max_diff(K, ref), 1e-12);
  const Eigen::MatrixXd D(K);
  EXPECT_LE((D - D.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((K * Vector::Ones(m.num_nodes())).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Elasticity, OperatorAndLoadMatchOracle) {
  const int n = 4;
  const Mesh m = build_mesh({n});
  const MaterialTable t;
  const oracle::Params P;
  std::mt19937 rng(2);
  for (int trial = 0; trial < 3; ++trial) {
    const Vector phi = oracle::random_vector(rng, m.num_nodes(), 0.0, 1.0);
    const Vector u_old = oracle::random_vector(rng, 2 * m.num_nodes(), -1, 1);
    const double dt = 1e-3;
    const ElasticitySystem el = assemble_elasticity(m, t, phi, dt, u_old);
    const Eigen::MatrixXd ref = oracle::elasticity(n, P, phi, dt);
    EXPECT_LE(max_diff(el.op, ref), 1e-12 * ref.cwiseAbs().maxCoeff());
    const Vector load = oracle::elasticity_load(n, P, phi, dt, u_old);
    EXPECT_LE((el.load - load).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Elasticity, RigidTranslationHasNoInternalForce) {
  const Mesh m = build_mesh({3});
  const MaterialTable t;
  std::mt19937 rng(3);
  const Vector phi = oracle::random_vector(rng, m.num_nodes(), 0, 1);
  const ElasticitySystem el = assemble_elasticity(m, t, phi, 0.1, Vector::Zero(2 * m.num_nodes()));
  Vector shift(2 * m.num_nodes());
  for (int k = 0; k < m.num_nodes(); ++k) shift.segment<2>(2 * k) = Eigen::Vector2d(0.3, -1.2);
  EXPECT_LE((el.op * shift).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Elasticity, NoEigenstrainLoadInHealthyPhase) {
  const Mesh m = build_mesh({3});
  const MaterialTable t;
  const ElasticitySystem el =
      assemble_elasticity(m, t, Vector::Zero(m.num_nodes()), 0.1, Vector::Zero(2 * m.num_nodes()));
  EXPECT_EQ(el.load.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Elasticity, PositiveDefiniteOnConstrainedSubspace) {
  const Mesh m = build_mesh({4});
  const MaterialTable t;
  std::mt19937 rng(4);
  for (double value : {0.0, 0.5, 1.0}) {
    const Vector phi = Vector::Constant(m.num_nodes(), value);
    const ElasticitySystem el = assemble_elasticity(m, t, phi, 1.0, Vector::Zero(2 * m.num_nodes()));
    double smallest = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 50; ++k) {
      const Vector v = interior_vector(m, rng);
      smallest = std::min(smallest, v.dot(el.op * v) / v.squaredNorm());
    }
    EXPECT_GT(smallest, 0.0) << value;
  }
}

TEST(Elasticity, ZeroLoadGivesZeroDisplacement) {
  const Mesh m = build_mesh({4});
  const MaterialTable t;
  const DofMap d = build_dofmap(m);
  ElasticitySystem el = assemble_elasticity(m, t, Vector::Constant(m.num_nodes(), 0.5), 1.0,
                                            Vector::Zero(2 * m.num_nodes()));
  Vector b = Vector::Zero(2 * m.num_nodes());
  constrain_homogeneous(el.op, b, d.dirichlet_mask);
  const SolveResult r = solve_spd(el.op, b);
  EXPECT_LE(r.x.norm(), 1e-12);
  EXPECT_LE(r.stats.residual, 1e-12);
}

TEST(Coupling, MatchesOracle) {
  const int n = 2;
  const Mesh m = build_mesh({n});
  const MaterialTable t;
  const oracle::Params P;
  std::mt19937 rng(5);
  const Vector phi = oracle::random_vector(rng, m.num_nodes(), 0, 1);
  const CouplingBlocks cb = assemble_coupling(m, t, phi);
  EXPECT_LE(max_diff(cb.B, oracle::coupling_B(n, P, phi)), 1e-12);
  const Eigen::MatrixXd D = oracle::mass(
      n, [&](const oracle::Point& p) { return oracle::lerp(oracle::interp(p, phi), P.M0, P.M1); });
  EXPECT_LE(max_diff(cb.D, D), 1e-12);
}

TEST(Coupling, HealthyPhaseCompressibility) {
  const Mesh m = build_mesh({3});
  const CouplingBlocks cb = assemble_coupling(m, MaterialTable{}, Vector::Zero(m.num_nodes()));
  EXPECT_LE(max_diff(cb.D, 0.5 * Eigen::MatrixXd(assemble_scalar_mass(m))), 1e-15);
}

TEST(Coupling, ConstantPressureHasNoNetForceOnClampedFields) {
  const Mesh m = build_mesh({4});
  const MaterialTable t = constant_coefficient_table(MaterialTable{});
  std::mt19937 rng(6);
  const CouplingBlocks cb = assemble_coupling(m, t, oracle::random_vector(rng, m.num_nodes(), 0, 1));
  const Vector v = interior_vector(m, rng);
  EXPECT_NEAR(v.dot(cb.B * Vector::Ones(m.num_nodes())), 0.0, 1e-13);
}

TEST(Coupling, Adjointness) {
  const Mesh m = build_mesh({4});
  const MaterialTable t;
  std::mt19937 rng(7);
  const Vector phi = oracle::random_vector(rng, m.num_nodes(), 0, 1);
  const CouplingBlocks cb = assemble_coupling(m, t, phi);
  const SparseMatrix Bt = cb.B.transpose();
  for (int k = 0; k < 10; ++k) {
    const Vector p = oracle::random_vector(rng, m.num_nodes(), -1, 1);
    const Vector v = interior_vector(m, rng);
    // quadrature of alpha p div v
    double q = 0.0;
    for (const auto& pt : oracle::points(4)) {
      double div = 0.0;
      for (int a = 0; a < 4; ++a) div += pt.dN[a][0] * v[2 * pt.node[a]] + pt.dN[a][1] * v[2 * pt.node[a] + 1];
      q += pt.w * oracle::lerp(oracle::interp(pt, phi), 0.5, 1.0) * oracle::interp(pt, p) * div;
    }
    EXPECT_NEAR(v.dot(cb.B * p), q, 1e-12);
    // same products, different summation order
    EXPECT_NEAR(v.dot(cb.B * p), p.dot(Bt * v), 1e-15);
  }
}

TEST(Coupling, ClosureDivergenceIsWeightedDivergence) {
  const Mesh m = build_mesh({3});
  const MaterialTable t;
  std::mt19937 rng(8);
  const Vector phi = oracle::random_vector(rng, m.num_nodes(), 0, 1);
  const CouplingBlocks cb = assemble_coupling(m, t, phi);
  const Vector u = oracle::random_vector(rng, 2 * m.num_nodes(), -1, 1);
  const Vector z = oracle::random_vector(rng, m.num_nodes(), -1, 1);
  double q = 0.0;
  for (const auto& pt : oracle::points(3)) {
    double div = 0.0;
    for (int a = 0; a < 4; ++a) div += pt.dN[a][0] * u[2 * pt.node[a]] + pt.dN[a][1] * u[2 * pt.node[a] + 1];
    const double f = oracle::interp(pt, phi);
    q += pt.w * oracle::lerp(f, 0.5, 1.0) * oracle::lerp(f, 0.5, 1.0) * div * oracle::interp(pt, z);
  }
  EXPECT_NEAR(z.dot(cb.closure_div * u), q, 1e-12);
}
