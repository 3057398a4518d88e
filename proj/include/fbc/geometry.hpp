#pragma once

#include <Eigen/Dense>

namespace fbc {

using Mat2 = Eigen::Matrix2d;

/// Smallest admissible 1 + gamma before the mapped domain counts as collapsed.
inline constexpr double kMinThickness = 1e-8;

/// Coefficient matrix of the domain map x2 -> (1 + gamma(x1)) x2 and its
/// partial derivatives with respect to gamma (a1) and d gamma / d x1 (a2).
struct CoeffSample {
  Mat2 a;
  Mat2 a1;
  Mat2 a2;
};

/// A[gamma](x) = [[1+g, -g' x2], [-g' x2, (1 + (g' x2)^2) / (1+g)]].
/// Throws DegenerateGeometryError when 1 + g <= kMinThickness.
Mat2 eval_A(double gamma, double dgamma, double x2);

/// Directional derivative A1 h + A2 h'.
Mat2 eval_DA(double gamma, double dgamma, double x2, double h, double dh);

CoeffSample sample_coefficients(double gamma, double dgamma, double x2);

} // namespace fbc
