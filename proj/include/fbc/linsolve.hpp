#pragma once

#include <memory>

#include <Eigen/SparseLU>

#include "fbc/assembly.hpp"

namespace fbc {

enum class Transpose { no, yes };

struct SolveTolerance {
  double rtol = 1e-12;
  double atol = 1e-14;
};

/// Sparse LU factorization of a square operator. Immutable once built; solves
/// against one factorization may run concurrently.
class Factorization {
public:
  /// Throws SingularMatrixError (with the failing pivot diagnostics) when the
  /// matrix is structurally or numerically singular.
  explicit Factorization(SparseMatrix matrix);

  int dim() const { return static_cast<int>(matrix_.rows()); }
  const SparseMatrix &matrix() const { return matrix_; }
  bool supports_transpose() const { return true; }

  /// Solves A x = rhs, or A^T x = rhs on the same factors. One step of
  /// iterative refinement is taken if the residual misses `tol`.
  Vector solve(const Vector &rhs, Transpose transpose = Transpose::no,
               SolveTolerance tol = {}) const;

  /// max-norm of (A or A^T) x - rhs, relative to max-norm of rhs.
  double relative_residual(const Vector &x, const Vector &rhs,
                           Transpose transpose = Transpose::no) const;

private:
  using Solver = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;
  Vector raw_solve(const Vector &rhs, Transpose transpose) const;

  SparseMatrix matrix_;
  std::shared_ptr<Solver> lu_;
};

Factorization factorize(const SparseSystem &system);

} // namespace fbc
