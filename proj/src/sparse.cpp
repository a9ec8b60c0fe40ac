#include "chb/sparse.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>

namespace chb {

SparseMatrix assemble_from_triplets(std::span<const Triplet> triplets, int rows, int cols) {
  for (const auto& t : triplets) {
    if (t.row() < 0 || t.row() >= rows || t.col() < 0 || t.col() >= cols) {
      throw std::out_of_range("triplet (" + std::to_string(t.row()) + ", " +
                              std::to_string(t.col()) + ") outside " + std::to_string(rows) +
                              "x" + std::to_string(cols));
    }
  }
  SparseMatrix A(rows, cols);
  A.setFromTriplets(triplets.begin(), triplets.end());
  A.makeCompressed();
  return A;
}

namespace {

Vector inverse_diagonal(const SparseMatrix& A, bool jacobi) {
  Vector d = Vector::Ones(A.rows());
  if (!jacobi) return d;
  const Vector diag = A.diagonal();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (diag[i] != 0.0) d[i] = 1.0 / diag[i];
  }
  return d;
}

SolveStats measure(const SparseMatrix& A, const Vector& b, const Vector& x, const Vector& dinv,
                   int iterations) {
  const Vector r = b - A * x;
  return {iterations, r.norm(), r.cwiseProduct(dinv).norm()};
}

struct Setup {
  Vector dinv;
  Vector x;
  double target = 0.0;
  int max_iters = 0;
};

// Shared argument checks. Returns false when the initial iterate already
// satisfies the stopping rule.
bool prepare(const SparseMatrix& A, const Vector& b, const SolverConfig& cfg, const Vector& guess,
             const char* name, Setup& s) {
  if (A.rows() != A.cols() || A.rows() != b.size()) {
    throw std::invalid_argument(std::string(name) + ": dimension mismatch");
  }
  if (!(cfg.relative_tolerance > 0.0) || !(cfg.absolute_tolerance > 0.0)) {
    throw std::invalid_argument(std::string(name) + ": tolerances must be positive");
  }
  if (guess.size() != 0 && guess.size() != b.size()) {
    throw std::invalid_argument(std::string(name) + ": initial guess has wrong size");
  }
  s.dinv = inverse_diagonal(A, cfg.jacobi);
  s.target = std::max(cfg.relative_tolerance * b.cwiseProduct(s.dinv).norm(),
                      cfg.absolute_tolerance);
  s.max_iters = cfg.max_iterations > 0 ? cfg.max_iterations : 10 * static_cast<int>(A.rows());
  s.x = Vector::Zero(b.size());
  if (guess.size() != 0 && guess.allFinite()) s.x = guess;
  return (b - A * s.x).cwiseProduct(s.dinv).norm() > s.target;
}

}  // namespace

SolveResult solve_spd(const SparseMatrix& A, const Vector& b, const SolverConfig& cfg,
                      const Vector& guess) {
  const char* name = "conjugate gradient";
  Setup s;
  if (!prepare(A, b, cfg, guess, name, s)) return {s.x, measure(A, b, s.x, s.dinv, 0)};
  Vector& x = s.x;
  Vector r = b - A * x;
  Vector z = r.cwiseProduct(s.dinv);
  Vector p = z;
  double rz = r.dot(z);
  for (int k = 1; k <= s.max_iters; ++k) {
    const Vector q = A * p;
    const double pq = p.dot(q);
    if (!(pq > 0.0)) throw SolverError(std::string(name) + " broke down", measure(A, b, x, s.dinv, k));
    const double alpha = rz / pq;
    x += alpha * p;
    // refresh the recurrence residual periodically to limit drift
    if (k % 50 == 0) {
      r = b - A * x;
    } else {
      r -= alpha * q;
    }
    z = r.cwiseProduct(s.dinv);
    if (z.norm() <= s.target) {
      const SolveStats st = measure(A, b, x, s.dinv, k);
      if (st.preconditioned_residual <= s.target) return {x, st};
      r = b - A * x;
      z = r.cwiseProduct(s.dinv);
    }
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  throw SolverError(std::string(name) + " did not converge", measure(A, b, x, s.dinv, s.max_iters));
}

namespace {

// Left-preconditioned iteration on P^{-1} A x = P^{-1} b.
template <class Precond>
SolveResult bicgstab(const SparseMatrix& A, const Vector& b, const Precond& pinv, Setup& s,
                     const char* name) {
  Vector& x = s.x;
  const auto apply = [&](const Vector& v) -> Vector { return pinv(A * v); };
  const auto measure = [&](int k) {
    const Vector res = b - A * x;
    return SolveStats{k, res.norm(), pinv(res).norm()};
  };
  const double eps = std::numeric_limits<double>::epsilon();

  Vector r = pinv(b - A * x);
  Vector rhat = r;
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  Vector v = Vector::Zero(r.size()), p = Vector::Zero(r.size());
  int restarts = 0;
  for (int k = 1; k <= s.max_iters; ++k) {
    const double rho_new = rhat.dot(r);
    if (std::abs(rho_new) <= eps * eps * rhat.squaredNorm() || !std::isfinite(rho_new) ||
        omega == 0.0) {
      // lost biorthogonality: restart from the current true residual
      if (++restarts > 50) break;
      r = pinv(b - A * x);
      rhat = r;
      rho = 1.0, alpha = 1.0, omega = 1.0;
      v.setZero();
      p.setZero();
      continue;
    }
    const double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    p = r + beta * (p - omega * v);
    v = apply(p);
    const double rv = rhat.dot(v);
    if (rv == 0.0 || !std::isfinite(rv)) {
      omega = 0.0;
      continue;
    }
    alpha = rho / rv;
    const Vector sres = r - alpha * v;
    if (sres.norm() <= s.target) {
      x += alpha * p;
      const SolveStats st = measure(k);
      if (st.preconditioned_residual <= s.target) return {x, st};
      omega = 0.0;
      continue;
    }
    const Vector t = apply(sres);
    const double tt = t.squaredNorm();
    omega = tt > 0.0 ? t.dot(sres) / tt : 0.0;
    x += alpha * p + omega * sres;
    r = sres - omega * t;
    if (k % 50 == 0) r = pinv(b - A * x);
    if (r.norm() <= s.target) {
      const SolveStats st = measure(k);
      if (st.preconditioned_residual <= s.target) return {x, st};
      omega = 0.0;
    }
  }
  throw SolverError(std::string(name) + " did not converge", measure(s.max_iters));
}

}  // namespace

SolveResult solve_general(const SparseMatrix& A, const Vector& b, const SolverConfig& cfg,
                          const Vector& guess) {
  const char* name = "BiCGSTAB";
  Setup s;
  if (!prepare(A, b, cfg, guess, name, s)) return {s.x, measure(A, b, s.x, s.dinv, 0)};
  const Vector dinv = s.dinv;
  return bicgstab(A, b, [&](const Vector& v) -> Vector { return v.cwiseProduct(dinv); }, s, name);
}

SolveResult solve_general(const SparseMatrix& A, const Vector& b, const Preconditioner& precond,
                          const SolverConfig& cfg, const Vector& guess) {
  const char* name = "preconditioned BiCGSTAB";
  if (!precond) throw std::invalid_argument(std::string(name) + ": empty preconditioner");
  SolverConfig plain = cfg;
  plain.jacobi = false;
  Setup s;
  prepare(A, b, plain, guess, name, s);
  s.target = std::max(cfg.relative_tolerance * precond(b).norm(), cfg.absolute_tolerance);
  const Vector r0 = precond(b - A * s.x);
  if (r0.norm() <= s.target) {
    const Vector res = b - A * s.x;
    return {s.x, {0, res.norm(), r0.norm()}};
  }
  return bicgstab(A, b, precond, s, name);
}

struct FactoredPreconditioner::Factors {
  Eigen::SparseLU<Eigen::SparseMatrix<double, Eigen::ColMajor, int>> lu;
};

void FactoredPreconditioner::factor(const SparseMatrix& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("factor: matrix is not square");
  auto f = std::make_shared<Factors>();
  f->lu.compute(Eigen::SparseMatrix<double, Eigen::ColMajor, int>(A));
  if (f->lu.info() != Eigen::Success) {
    throw std::runtime_error("sparse LU factorization failed: " + f->lu.lastErrorMessage());
  }
  factors_ = std::move(f);
  size_ = A.rows();
}

Vector FactoredPreconditioner::apply(const Vector& v) const {
  if (!factors_) throw std::logic_error("preconditioner used before factor()");
  if (v.size() != size_) throw std::invalid_argument("preconditioner: size mismatch");
  return factors_->lu.solve(v);
}

Preconditioner FactoredPreconditioner::action() const {
  auto f = factors_;
  if (!f) throw std::logic_error("preconditioner used before factor()");
  return [f](const Vector& v) -> Vector { return f->lu.solve(v); };
}

void constrain_homogeneous(SparseMatrix& A, Vector& b, std::span<const std::uint8_t> mask) {
  if (static_cast<Eigen::Index>(mask.size()) != A.rows() || A.rows() != A.cols() ||
      b.size() != A.rows()) {
    throw std::invalid_argument("constrain_homogeneous: dimension mismatch");
  }
  for (int r = 0; r < A.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) {
      if (mask[r] || mask[it.col()]) it.valueRef() = 0.0;
    }
  }
  A.prune([&](int r, int c, double v) { return v != 0.0 || (r == c && mask[r]); });
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    if (mask[i]) {
      A.coeffRef(i, i) = 1.0;
      b[i] = 0.0;
    }
  }
  A.makeCompressed();
}

}  // namespace chb
