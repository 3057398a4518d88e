#include <gtest/gtest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "fbc/errors.hpp"
#include "fbc/geometry.hpp"

namespace fbc {
namespace {

void expect_matrix_near(const Mat2 &a, const Mat2 &b, double tol) {
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      EXPECT_NEAR(a(i, j), b(i, j), tol) << "entry (" << i << ", " << j << ")";
}

TEST(Coefficients, FlatGeometryGivesIdentity) {
  for (double x2 : {0.0, 0.3, 1.0})
    expect_matrix_near(eval_A(0.0, 0.0, x2), Mat2::Identity(), 0.0);
}

TEST(Coefficients, PrintedFormula) {
  Mat2 expected;
  expected << 1.5, -1.0, -1.0, 4.0 / 3.0;
  expect_matrix_near(eval_A(0.5, 1.0, 1.0), expected, 1e-15);
}

TEST(Coefficients, UnitDeterminantOnGrid) {
  for (int a = 0; a < 10; ++a)
    for (int b = 0; b < 10; ++b)
      for (int c = 0; c < 10; ++c) {
        const double g = -0.5 + a / 9.0, dg = -1.0 + 2.0 * b / 9.0, x2 = c / 9.0;
        const Mat2 A = eval_A(g, dg, x2);
        EXPECT_NEAR(A.determinant(), 1.0, 1e-12);
        EXPECT_EQ(A(0, 1), A(1, 0));
      }
}

TEST(Coefficients, PositiveDefiniteWhileThick) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> g(-0.99, 3.0), dg(-5.0, 5.0), x2(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const Mat2 A = eval_A(g(rng), dg(rng), x2(rng));
    const Eigen::SelfAdjointEigenSolver<Mat2> es(A);
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(Coefficients, DegenerateGeometryRejected) {
  EXPECT_THROW(eval_A(-1.0, 0.0, 0.5), DegenerateGeometryError);
  EXPECT_THROW(eval_A(-2.0, 0.3, 0.5), DegenerateGeometryError);
  EXPECT_THROW(eval_DA(-1.0, 0.0, 0.5, 1.0, 1.0), DegenerateGeometryError);
}

TEST(Coefficients, DerivativeMatchesCentralDifferences) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> g(-0.4, 0.4), dg(-1.0, 1.0), x2(0.0, 1.0),
      dir(-1.0, 1.0);
  const double eps = 1e-5;
  for (int k = 0; k < 50; ++k) {
    const double G = g(rng), dG = dg(rng), X = x2(rng), h = dir(rng), dh = dir(rng);
    const Mat2 fd =
        (eval_A(G + eps * h, dG + eps * dh, X) - eval_A(G - eps * h, dG - eps * dh, X)) /
        (2 * eps);
    expect_matrix_near(eval_DA(G, dG, X, h, dh), fd, 1e-9);
  }
}

TEST(Coefficients, PartialsAtFlatGeometry) {
  const CoeffSample s = sample_coefficients(0.0, 0.0, 0.5);
  Mat2 a1, a2;
  a1 << 1.0, 0.0, 0.0, -1.0;
  a2 << 0.0, -0.5, -0.5, 0.0;
  expect_matrix_near(s.a1, a1, 0.0);
  expect_matrix_near(s.a2, a2, 0.0);
  expect_matrix_near(eval_DA(0.0, 0.0, 0.5, 2.0, 3.0), 2.0 * a1 + 3.0 * a2, 1e-15);
}

} // namespace
} // namespace fbc
