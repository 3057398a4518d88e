#include "fbc/assembly.hpp"

#include <cmath>

#include "fbc/errors.hpp"
#include "fbc/geometry.hpp"

namespace fbc {

namespace {

using Triplet = Eigen::Triplet<double>;

SparseMatrix from_triplets(int rows, int cols, const std::vector<Triplet> &t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

// Trace state at a bulk quadrature point: G(x1), G'(x1).
struct TraceSample {
  double value;
  double slope;
};

TraceSample sample_trace(const BoundaryField &G, int interval, double xi) {
  const Vector &g = G.values();
  return {(1.0 - xi) * g[interval] + xi * g[interval + 1], G.slope(interval)};
}

void check_compatible(const BulkMesh &mesh, const BoundaryField &G) {
  if (G.mesh().num_nodes() != mesh.cells_per_side() + 1)
    throw DimensionError("trace field does not match the bulk mesh");
}

} // namespace

std::array<QuadPoint, 4> cell_quadrature(const BulkMesh &mesh, int cell) {
  static const double g = 0.5 / std::sqrt(3.0);
  static const std::array<double, 2> pts{0.5 - g, 0.5 + g};
  const double h = mesh.h();
  const Point &origin = mesh.node(mesh.cell(cell)[0]);
  std::array<QuadPoint, 4> out;
  int q = 0;
  for (double t : pts) {
    for (double s : pts) {
      QuadPoint &p = out[q++];
      p.x1 = origin.x1 + s * h;
      p.x2 = origin.x2 + t * h;
      p.xi = s;
      p.weight = 0.25 * h * h;
      p.phi = {(1 - s) * (1 - t), s * (1 - t), s * t, (1 - s) * t};
      p.grad[0] = Eigen::Vector2d(-(1 - t), -(1 - s)) / h;
      p.grad[1] = Eigen::Vector2d((1 - t), -s) / h;
      p.grad[2] = Eigen::Vector2d(t, s) / h;
      p.grad[3] = Eigen::Vector2d(-t, (1 - s)) / h;
    }
  }
  return out;
}

SparseSystem assemble_b_gamma(const TraceMesh &trace, double kappa) {
  if (!(kappa > 0.0))
    throw std::invalid_argument("assemble_b_gamma: kappa must be positive");
  std::vector<Triplet> t;
  t.reserve(4 * trace.num_intervals());
  for (int k = 0; k < trace.num_intervals(); ++k) {
    const double c = kappa / trace.interval_length(k);
    t.emplace_back(k, k, c);
    t.emplace_back(k, k + 1, -c);
    t.emplace_back(k + 1, k, -c);
    t.emplace_back(k + 1, k + 1, c);
  }
  const int n = trace.num_nodes();
  return {from_triplets(n, n, t), {}, true};
}

SparseSystem assemble_mass_1d(const TraceMesh &trace) {
  std::vector<Triplet> t;
  t.reserve(4 * trace.num_intervals());
  for (int k = 0; k < trace.num_intervals(); ++k) {
    const double c = trace.interval_length(k) / 6.0;
    t.emplace_back(k, k, 2 * c);
    t.emplace_back(k, k + 1, c);
    t.emplace_back(k + 1, k, c);
    t.emplace_back(k + 1, k + 1, 2 * c);
  }
  const int n = trace.num_nodes();
  return {from_triplets(n, n, t), {}, true};
}

SparseSystem assemble_b_omega(const BulkMesh &mesh, const BoundaryField &G) {
  check_compatible(mesh, G);
  std::vector<Triplet> t;
  t.reserve(16 * static_cast<std::size_t>(mesh.num_cells()));
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto nodes = mesh.cell(c);
    const int col = cell_column(mesh, c);
    Eigen::Matrix4d local = Eigen::Matrix4d::Zero();
    for (const QuadPoint &q : cell_quadrature(mesh, c)) {
      const TraceSample g = sample_trace(G, col, q.xi);
      const Mat2 a = eval_A(g.value, g.slope, q.x2);
      for (int i = 0; i < 4; ++i) {
        const Eigen::Vector2d ag = a * q.grad[i];
        for (int j = 0; j < 4; ++j)
          local(j, i) += q.weight * ag.dot(q.grad[j]);
      }
    }
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        t.emplace_back(nodes[i], nodes[j], local(i, j));
  }
  const int n = mesh.num_nodes();
  return {from_triplets(n, n, t), {}, true};
}

CouplingBlocks assemble_coupling_blocks(const BulkMesh &mesh, const BoundaryField &G,
                                        const BulkField &W) {
  check_compatible(mesh, G);
  if (W.size() != mesh.num_nodes())
    throw DimensionError("assemble_coupling_blocks: bulk field does not match mesh");
  const Vector &w = W.values();
  std::vector<Triplet> tv, ts;
  tv.reserve(8 * static_cast<std::size_t>(mesh.num_cells()));
  ts.reserve(8 * static_cast<std::size_t>(mesh.num_cells()));
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto nodes = mesh.cell(c);
    const int col = cell_column(mesh, c);
    const double h = G.mesh().interval_length(col);
    // local(a, b): bulk shape a, trace shape b in {left, right}
    Eigen::Matrix<double, 4, 2> value_local = Eigen::Matrix<double, 4, 2>::Zero();
    Eigen::Matrix<double, 4, 2> slope_local = Eigen::Matrix<double, 4, 2>::Zero();
    for (const QuadPoint &q : cell_quadrature(mesh, c)) {
      const TraceSample g = sample_trace(G, col, q.xi);
      const CoeffSample s = sample_coefficients(g.value, g.slope, q.x2);
      Eigen::Vector2d grad_w = Eigen::Vector2d::Zero();
      for (int a = 0; a < 4; ++a)
        grad_w += w[nodes[a]] * q.grad[a];
      const Eigen::Vector2d a1w = s.a1 * grad_w;
      const Eigen::Vector2d a2w = s.a2 * grad_w;
      const std::array<double, 2> phi{1.0 - q.xi, q.xi};
      const std::array<double, 2> dphi{-1.0 / h, 1.0 / h};
      for (int a = 0; a < 4; ++a) {
        const double v1 = a1w.dot(q.grad[a]);
        const double v2 = a2w.dot(q.grad[a]);
        for (int b = 0; b < 2; ++b) {
          value_local(a, b) += q.weight * v1 * phi[b];
          slope_local(a, b) += q.weight * v2 * dphi[b];
        }
      }
    }
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 2; ++b) {
        tv.emplace_back(nodes[a], col + b, value_local(a, b));
        ts.emplace_back(nodes[a], col + b, slope_local(a, b));
      }
    }
  }
  const int rows = mesh.num_nodes();
  const int cols = G.mesh().num_nodes();
  return {from_triplets(rows, cols, tv), from_triplets(rows, cols, ts)};
}

SparseMatrix lift_matrix(const BulkMesh &mesh, const TraceMesh &trace) {
  const int n = mesh.cells_per_side();
  if (trace.num_nodes() != n + 1)
    throw DimensionError("lift_matrix: trace mesh does not match the bulk mesh");
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  for (int i = 0; i <= n; ++i)
    for (int j = 1; j <= n; ++j)
      t.emplace_back(mesh.node_index(i, j), i, mesh.node(mesh.node_index(i, j)).x2);
  return from_triplets(mesh.num_nodes(), n + 1, t);
}

BulkField lift_boundary(const BoundaryField &xi, std::shared_ptr<const BulkMesh> mesh) {
  if (xi.kind() != TraceKind::zero)
    throw std::invalid_argument("lift_boundary: extension is defined for zero-trace fields only");
  const SparseMatrix e = lift_matrix(*mesh, xi.mesh());
  Vector values = e * xi.values();
  return BulkField(std::move(mesh), std::move(values), TraceKind::free);
}

FreeDofs make_free_dofs(const BulkMesh &mesh, const TraceMesh &trace) {
  FreeDofs d;
  for (int i = 1; i + 1 < trace.num_nodes(); ++i)
    d.trace.push_back(i);
  d.bulk = mesh.interior_nodes();
  std::vector<Triplet> t;
  for (int k = 0; k < d.num_trace(); ++k)
    t.emplace_back(d.trace[k], k, 1.0);
  d.trace_select = from_triplets(trace.num_nodes(), d.num_trace(), t);
  t.clear();
  for (int k = 0; k < d.num_bulk(); ++k)
    t.emplace_back(d.bulk[k], k, 1.0);
  d.bulk_select = from_triplets(mesh.num_nodes(), d.num_bulk(), t);
  return d;
}

SparseMatrix restrict_matrix(const SparseMatrix &a, const SparseMatrix &rows,
                             const SparseMatrix &cols) {
  SparseMatrix out = SparseMatrix(rows.transpose()) * a * cols;
  out.makeCompressed();
  return out;
}

SparseMatrix block_matrix(const SparseMatrix &a, const SparseMatrix &b, const SparseMatrix &c,
                          const SparseMatrix &d) {
  if (a.rows() != b.rows() || c.rows() != d.rows() || a.cols() != c.cols() ||
      b.cols() != d.cols())
    throw DimensionError("block_matrix: inconsistent block sizes");
  const Eigen::Index r0 = a.rows(), c0 = a.cols();
  std::vector<Triplet> t;
  t.reserve(a.nonZeros() + b.nonZeros() + c.nonZeros() + d.nonZeros());
  auto append = [&](const SparseMatrix &m, Eigen::Index dr, Eigen::Index dc) {
    for (int k = 0; k < m.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(m, k); it; ++it)
        t.emplace_back(static_cast<int>(it.row() + dr), static_cast<int>(it.col() + dc),
                       it.value());
  };
  append(a, 0, 0);
  append(b, 0, c0);
  append(c, r0, 0);
  append(d, r0, c0);
  return from_triplets(static_cast<int>(r0 + c.rows()), static_cast<int>(c0 + b.cols()), t);
}

} // namespace fbc
