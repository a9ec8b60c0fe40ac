#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace chb {

using Vector = Eigen::VectorXd;
/// Compressed-row sparse matrix. After makeCompressed() the column indices of
/// each row are strictly increasing and duplicates have been summed.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

struct SolverConfig {
  double relative_tolerance = 1e-10;
  double absolute_tolerance = 1e-14;
  /// 0 selects 10 x dimension.
  int max_iterations = 0;
  /// Jacobi preconditioning; disabling it must not change the solution.
  bool jacobi = true;
};

struct SolveStats {
  int iterations = 0;
  double residual = 0.0;                 // ||b - A x||
  double preconditioned_residual = 0.0;  // ||D^{-1}(b - A x)||, the stopping quantity
};

struct SolveResult {
  Vector x;
  SolveStats stats;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, SolveStats stats)
      : std::runtime_error(what + " (residual " + std::to_string(stats.residual) + " after " +
                           std::to_string(stats.iterations) + " iterations)"),
        stats_(stats) {}
  const SolveStats& stats() const { return stats_; }

 private:
  SolveStats stats_;
};

/// Sums duplicate (row, col) contributions. Throws std::out_of_range on an
/// index outside the shape.
SparseMatrix assemble_from_triplets(std::span<const Triplet> triplets, int rows, int cols);

/// Conjugate gradient. The caller guarantees A is symmetric positive
/// definite (or semidefinite with b in its range).
/// An empty `guess` starts from zero.
SolveResult solve_spd(const SparseMatrix& A, const Vector& b, const SolverConfig& cfg = {},
                      const Vector& guess = {});
/// BiCGSTAB for nonsymmetric nonsingular A.
SolveResult solve_general(const SparseMatrix& A, const Vector& b, const SolverConfig& cfg = {},
                          const Vector& guess = {});

/// Action v -> P^{-1} v of a left preconditioner.
using Preconditioner = std::function<Vector(const Vector&)>;

/// BiCGSTAB with a caller-supplied left preconditioner. The stopping rule is
/// applied to ||P^{-1}(b - A x)||; `cfg.jacobi` is ignored.
SolveResult solve_general(const SparseMatrix& A, const Vector& b, const Preconditioner& precond,
                          const SolverConfig& cfg = {}, const Vector& guess = {});

/// Sparse LU factors of a matrix, applied as a preconditioner to nearby
/// matrices of the same shape. Copies share the factors.
class FactoredPreconditioner {
 public:
  /// Throws std::runtime_error if the matrix is numerically singular.
  void factor(const SparseMatrix& A);
  bool ready() const { return factors_ != nullptr; }
  Eigen::Index size() const { return size_; }
  Vector apply(const Vector& v) const;
  Preconditioner action() const;

 private:
  struct Factors;
  std::shared_ptr<const Factors> factors_;
  Eigen::Index size_ = 0;
};

/// Homogeneous essential constraints by symmetric elimination: rows and
/// columns of masked unknowns are zeroed, the diagonal set to 1 and the right
/// hand side entry to 0. `mask` spans the full system.
void constrain_homogeneous(SparseMatrix& A, Vector& b, std::span<const std::uint8_t> mask);

}  // namespace chb
