#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Sparse>

#include "fbc/fields.hpp"
#include "fbc/mesh.hpp"

namespace fbc {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Assembled operator with an optional load vector.
struct SparseSystem {
  SparseMatrix matrix;
  Vector rhs;             ///< empty when no load was assembled
  bool symmetric = false; ///< set only for forms symmetric by construction

  int dim() const { return static_cast<int>(matrix.rows()); }
};

/// One point of the tensor 2x2 Gauss rule on a bulk cell, with the four Q1
/// shape functions (cell-local order) and their physical gradients.
struct QuadPoint {
  double x1 = 0.0;
  double x2 = 0.0;
  double weight = 0.0;
  double xi = 0.0; ///< local coordinate along x1 in [0, 1]
  std::array<double, 4> phi{};
  std::array<Eigen::Vector2d, 4> grad{};
};

std::array<QuadPoint, 4> cell_quadrature(const BulkMesh &mesh, int cell);

/// Column index of a cell, i.e. the trace interval below which it sits.
inline int cell_column(const BulkMesh &mesh, int cell) { return cell % mesh.cells_per_side(); }

/// kappa * int phi_i' phi_j' over the full trace node set.
SparseSystem assemble_b_gamma(const TraceMesh &trace, double kappa);

/// int phi_i phi_j over the full trace node set.
SparseSystem assemble_mass_1d(const TraceMesh &trace);

/// int A[G] grad phi_i . grad phi_j over all bulk nodes.
SparseSystem assemble_b_omega(const BulkMesh &mesh, const BoundaryField &G);

/// Derivative of B_Omega[W, z; A[G]] with respect to G, split by term.
/// Entry (bulk i, trace j) of value_block is int (A1[G] Phi_j) grad W . grad phi_i,
/// of slope_block int (A2[G] Phi_j') grad W . grad phi_i.
struct CouplingBlocks {
  SparseMatrix value_block;
  SparseMatrix slope_block;

  SparseMatrix combined() const { return value_block + slope_block; }
};

CouplingBlocks assemble_coupling_blocks(const BulkMesh &mesh, const BoundaryField &G,
                                        const BulkField &W);

/// Discrete extension (E xi)(x1, x2) = xi(x1) x2 as a (bulk nodes) x (trace nodes) matrix.
SparseMatrix lift_matrix(const BulkMesh &mesh, const TraceMesh &trace);

/// Nodal interpolant of xi(x1) x2. Rejects fields that are not zero-trace.
BulkField lift_boundary(const BoundaryField &xi, std::shared_ptr<const BulkMesh> mesh);

/// Unknowns left after eliminating the Dirichlet nodes: trace nodes 1..n-1
/// and interior bulk nodes. Selection matrices map free -> full vectors.
struct FreeDofs {
  std::vector<int> trace;
  std::vector<int> bulk;
  SparseMatrix trace_select; ///< (trace nodes) x (free trace)
  SparseMatrix bulk_select;  ///< (bulk nodes) x (free bulk)

  int num_trace() const { return static_cast<int>(trace.size()); }
  int num_bulk() const { return static_cast<int>(bulk.size()); }
  int size() const { return num_trace() + num_bulk(); }
};

FreeDofs make_free_dofs(const BulkMesh &mesh, const TraceMesh &trace);

/// rows^T * a * cols.
SparseMatrix restrict_matrix(const SparseMatrix &a, const SparseMatrix &rows,
                             const SparseMatrix &cols);

/// Stacks [[a, b], [c, d]] into one sparse matrix.
SparseMatrix block_matrix(const SparseMatrix &a, const SparseMatrix &b, const SparseMatrix &c,
                          const SparseMatrix &d);

} // namespace fbc
