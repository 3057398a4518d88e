#include "fbc/linsolve.hpp"

#include <cassert>
#include <string>

#include "fbc/errors.hpp"

namespace fbc {

Factorization::Factorization(SparseMatrix matrix)
    : matrix_(std::move(matrix)), lu_(std::make_shared<Solver>()) {
  if (matrix_.rows() != matrix_.cols())
    throw DimensionError("factorize: matrix is " + std::to_string(matrix_.rows()) + "x" +
                         std::to_string(matrix_.cols()));
  matrix_.makeCompressed();
  lu_->analyzePattern(matrix_);
  lu_->factorize(matrix_);
  if (lu_->info() != Eigen::Success)
    throw SingularMatrixError("factorize: " + std::to_string(matrix_.rows()) +
                              "-dimensional matrix is singular (" + lu_->lastErrorMessage() +
                              ")");
}

Vector Factorization::raw_solve(const Vector &rhs, Transpose transpose) const {
  // SparseLU::transpose() is not const-qualified but does not mutate the factors.
  if (transpose == Transpose::yes)
    return lu_->transpose().solve(rhs);
  return lu_->solve(rhs);
}

double Factorization::relative_residual(const Vector &x, const Vector &rhs,
                                        Transpose transpose) const {
  const Vector r =
      (transpose == Transpose::yes ? Vector(matrix_.transpose() * x) : Vector(matrix_ * x)) - rhs;
  const double scale = rhs.lpNorm<Eigen::Infinity>();
  return scale > 0.0 ? r.lpNorm<Eigen::Infinity>() / scale : r.lpNorm<Eigen::Infinity>();
}

Vector Factorization::solve(const Vector &rhs, Transpose transpose, SolveTolerance tol) const {
  if (rhs.size() != matrix_.rows())
    throw DimensionError("solve: rhs has " + std::to_string(rhs.size()) + " entries, matrix " +
                         std::to_string(matrix_.rows()));
  if (rhs.size() == 0)
    return {};
  Vector x = raw_solve(rhs, transpose);
  const double bound = tol.rtol * rhs.lpNorm<Eigen::Infinity>() + tol.atol;
  auto residual = [&](const Vector &y) -> Vector {
    return (transpose == Transpose::yes ? Vector(matrix_.transpose() * y)
                                        : Vector(matrix_ * y)) -
           rhs;
  };
  Vector r = residual(x);
  if (r.lpNorm<Eigen::Infinity>() > bound) {
    x -= raw_solve(r, transpose);
    r = residual(x);
  }
  assert(r.lpNorm<Eigen::Infinity>() <= 1e-10 * rhs.lpNorm<Eigen::Infinity>() + tol.atol);
  return x;
}

Factorization factorize(const SparseSystem &system) { return Factorization(system.matrix); }

} // namespace fbc
