#include <gtest/gtest.h>

#include <random>

#include <Eigen/Dense>

#include "fbc/assembly.hpp"
#include "fbc/state.hpp"

namespace fbc {
namespace {

// Q1 Laplace element matrix of a square, counter-clockwise from the lower-left corner.
Eigen::Matrix4d q1_laplace() {
  Eigen::Matrix4d k;
  k << 4, -1, -2, -1, -1, 4, -1, -2, -2, -1, 4, -1, -1, -2, -1, 4;
  return k / 6.0;
}

Eigen::MatrixXd laplace_oracle(const BulkMesh &mesh) {
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(mesh.num_nodes(), mesh.num_nodes());
  const Eigen::Matrix4d k = q1_laplace();
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto v = mesh.cell(c);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        K(v[a], v[b]) += k(a, b);
  }
  return K;
}

TEST(Assembly, QuadratureWeightsSumToCellArea) {
  const BulkMesh mesh(4);
  double total = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c)
    for (const QuadPoint &q : cell_quadrature(mesh, c)) {
      total += q.weight;
      double s = 0.0;
      for (double p : q.phi)
        s += p;
      EXPECT_NEAR(s, 1.0, 1e-15);
    }
  EXPECT_NEAR(total, 1.0, 1e-15);
}

TEST(Assembly, FlatBulkFormIsQ1Laplacian) {
  for (int n : {1, 4}) {
    const auto disc = make_discretization(0, n);
    const Eigen::MatrixXd K =
        Eigen::MatrixXd(assemble_b_omega(*disc->bulk, BoundaryField::zero(disc->trace)).matrix);
    EXPECT_LE((K - laplace_oracle(*disc->bulk)).cwiseAbs().maxCoeff(), 1e-14) << "n = " << n;
  }
}

TEST(Assembly, BulkFormSymmetricWithConstantKernel) {
  const auto disc = make_discretization(2);
  const auto G = BoundaryField::interpolate(
      disc->trace, [](double x) { return 0.3 * std::sin(M_PI * x); }, TraceKind::zero);
  const SparseMatrix K = assemble_b_omega(*disc->bulk, G).matrix;
  EXPECT_LE((Eigen::MatrixXd(K) - Eigen::MatrixXd(K.transpose())).cwiseAbs().maxCoeff(), 1e-15);
  const Vector ones = Vector::Ones(K.cols());
  EXPECT_LE((K * ones).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Assembly, TraceStiffnessAndMass) {
  const auto disc = make_discretization(1);
  const double h = disc->h(), kappa = 2.5;
  const Eigen::MatrixXd B = Eigen::MatrixXd(assemble_b_gamma(*disc->trace, kappa).matrix);
  const Eigen::MatrixXd M = Eigen::MatrixXd(assemble_mass_1d(*disc->trace).matrix);
  const int m = disc->trace->num_nodes();
  for (int i = 1; i + 1 < m; ++i) {
    EXPECT_NEAR(B(i, i), 2 * kappa / h, 1e-12);
    EXPECT_NEAR(B(i, i - 1), -kappa / h, 1e-12);
    EXPECT_NEAR(M(i, i), 4 * h / 6, 1e-15);
    EXPECT_NEAR(M(i, i + 1), h / 6, 1e-15);
  }
  EXPECT_NEAR(M(0, 0), h / 3, 1e-15);
  EXPECT_NEAR(M.sum(), 1.0, 1e-14);
  EXPECT_THROW(assemble_b_gamma(*disc->trace, 0.0), std::invalid_argument);
}

TEST(Assembly, CouplingBlocksMatchCentralDifferences) {
  const auto disc = make_discretization(2);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  Vector g = Vector::Zero(disc->trace->num_nodes()), eta = g;
  for (int i = 1; i + 1 < g.size(); ++i) {
    g[i] = u(rng);
    eta[i] = u(rng);
  }
  Vector w(disc->bulk->num_nodes());
  for (auto &x : w)
    x = u(rng);
  const BoundaryField G(disc->trace, g), E(disc->trace, eta);
  const BulkField W(disc->bulk, w);
  const double eps = 1e-6;
  const Vector fd =
      (assemble_b_omega(*disc->bulk, BoundaryField(disc->trace, g + eps * eta)).matrix * w -
       assemble_b_omega(*disc->bulk, BoundaryField(disc->trace, g - eps * eta)).matrix * w) /
      (2 * eps);
  const Vector an = assemble_coupling_blocks(*disc->bulk, G, W).combined() * eta;
  EXPECT_LE((fd - an).cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, an.cwiseAbs().maxCoeff()));
}

TEST(Assembly, CouplingVanishesForZeroBulkField) {
  const auto disc = make_discretization(1);
  const auto C = assemble_coupling_blocks(*disc->bulk, BoundaryField::zero(disc->trace),
                                          BulkField::zero(disc->bulk));
  EXPECT_EQ(C.combined().norm(), 0.0);
}

TEST(Assembly, ExtensionIsXiTimesX2) {
  const auto disc = make_discretization(1);
  const auto xi = BoundaryField::interpolate(
      disc->trace, [](double x) { return x * (1 - x); }, TraceKind::zero);
  const BulkField e = lift_boundary(xi, disc->bulk);
  const BulkMesh &mesh = *disc->bulk;
  for (int k = 0; k < mesh.num_nodes(); ++k) {
    const Point p = mesh.node(k);
    EXPECT_NEAR(e.values()[k], p.x1 * (1 - p.x1) * p.x2, 1e-15);
  }
  EXPECT_EQ((lift_matrix(mesh, *disc->trace) * xi.values() - e.values()).norm(), 0.0);
  EXPECT_EQ((e.top_trace() - xi.values()).norm(), 0.0);
  Vector bad = Vector::Ones(disc->trace->num_nodes());
  EXPECT_THROW(lift_boundary(BoundaryField(disc->trace, bad), disc->bulk), std::invalid_argument);
}

TEST(Assembly, FreeDofCounts) {
  const auto disc = make_discretization(2);
  const FreeDofs d = make_free_dofs(*disc->bulk, *disc->trace);
  const int n = disc->n();
  EXPECT_EQ(d.num_trace(), n - 1);
  EXPECT_EQ(d.num_bulk(), (n - 1) * (n - 1));
  EXPECT_EQ(d.trace_select.rows(), n + 1);
  EXPECT_EQ(d.bulk_select.rows(), (n + 1) * (n + 1));
}

TEST(Assembly, ResidualAtFlatStateWithLifting) {
  const auto disc = make_discretization(1);
  const BulkMesh &mesh = *disc->bulk;
  const auto v = BulkField::interpolate(disc->bulk, [](double x1, double x2) {
    return x2 * (1 - x2) * (1 - 2 * x1);
  });
  const StateModel model(disc, 1.0, v);
  const Vector r = residual(model, model.zero_state(), BoundaryField::zero(disc->trace));
  const Vector kv = laplace_oracle(mesh) * v.values();
  const FreeDofs &d = model.dofs();
  for (int a = 0; a < d.num_trace(); ++a) {
    const int j = d.trace[a];
    Vector phi = Vector::Zero(disc->trace->num_nodes());
    phi[j] = 1.0;
    const Vector lifted = lift_boundary(BoundaryField(disc->trace, phi, TraceKind::zero),
                                        disc->bulk).values();
    EXPECT_NEAR(r[a], kv.dot(lifted), 1e-14);
  }
  for (int b = 0; b < d.num_bulk(); ++b)
    EXPECT_NEAR(r[d.num_trace() + b], kv[d.bulk[b]], 1e-14);
}

TEST(Assembly, JacobianAtRestIsBlockTriangular) {
  const auto disc = make_discretization(1);
  const StateModel model(disc, 1.0, BulkField::zero(disc->bulk));
  const StateJacobian J = jacobian(model, model.zero_state());
  const Eigen::MatrixXd D(J.matrix);
  const int t = J.num_trace;
  const FreeDofs &d = model.dofs();
  const Eigen::MatrixXd B = Eigen::MatrixXd(model.b_gamma());
  const Eigen::MatrixXd K = laplace_oracle(*disc->bulk);
  EXPECT_EQ(D.bottomLeftCorner(J.num_bulk, t).cwiseAbs().maxCoeff(), 0.0);
  for (int a = 0; a < t; ++a)
    for (int b = 0; b < t; ++b)
      EXPECT_NEAR(D(a, b), B(d.trace[a], d.trace[b]), 1e-12);
  for (int a = 0; a < J.num_bulk; ++a)
    for (int b = 0; b < J.num_bulk; ++b)
      EXPECT_NEAR(D(t + a, t + b), K(d.bulk[a], d.bulk[b]), 1e-14);
}

TEST(Assembly, RestrictAndBlock) {
  SparseMatrix a(2, 2), sel(2, 1);
  a.insert(0, 0) = 1;
  a.insert(0, 1) = 2;
  a.insert(1, 0) = 3;
  a.insert(1, 1) = 4;
  sel.insert(1, 0) = 1;
  EXPECT_EQ(Eigen::MatrixXd(restrict_matrix(a, sel, sel))(0, 0), 4.0);
  const SparseMatrix blk = block_matrix(a, a, a, a);
  EXPECT_EQ(blk.rows(), 4);
  EXPECT_EQ(Eigen::MatrixXd(blk)(3, 2), 3.0);
}

} // namespace
} // namespace fbc
