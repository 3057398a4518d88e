#include "fbc/geometry.hpp"

#include <string>

#include "fbc/errors.hpp"

namespace fbc {

namespace {

void check_thickness(double gamma) {
  if (!(1.0 + gamma > kMinThickness))
    throw DegenerateGeometryError("domain collapsed: 1 + gamma = " +
                                  std::to_string(1.0 + gamma));
}

} // namespace

Mat2 eval_A(double gamma, double dgamma, double x2) {
  check_thickness(gamma);
  const double t = dgamma * x2;
  Mat2 a;
  a << 1.0 + gamma, -t, -t, (1.0 + t * t) / (1.0 + gamma);
  return a;
}

CoeffSample sample_coefficients(double gamma, double dgamma, double x2) {
  check_thickness(gamma);
  const double g1 = 1.0 + gamma;
  const double t = dgamma * x2;
  CoeffSample s;
  s.a << g1, -t, -t, (1.0 + t * t) / g1;
  s.a1 << 1.0, 0.0, 0.0, -(1.0 + t * t) / (g1 * g1);
  s.a2 << 0.0, -x2, -x2, 2.0 * dgamma * x2 * x2 / g1;
  return s;
}

Mat2 eval_DA(double gamma, double dgamma, double x2, double h, double dh) {
  const CoeffSample s = sample_coefficients(gamma, dgamma, x2);
  return s.a1 * h + s.a2 * dh;
}

} // namespace fbc
