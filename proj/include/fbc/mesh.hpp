#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace fbc {

enum class NodeMarker : std::uint8_t {
  interior,
  sigma, ///< bottom and lateral sides, x2 < 1
  gamma  ///< top side x2 = 1, corners included
};

struct Point {
  double x1 = 0.0;
  double x2 = 0.0;
};

/// Uniform quadrilateral mesh of the unit square with n cells per side.
///
/// Nodes are numbered lexicographically by (x2, x1): node (i, j) sits at
/// (i/n, j/n) and has index j*(n+1) + i, so the top row is the contiguous
/// block [n*(n+1), (n+1)^2). Cell (i, j) has index j*n + i and lists its
/// nodes counter-clockwise starting at the lower-left corner.
class BulkMesh {
public:
  explicit BulkMesh(int n_cells_per_side);

  int cells_per_side() const { return n_; }
  double h() const { return 1.0 / n_; }
  int num_nodes() const { return (n_ + 1) * (n_ + 1); }
  int num_cells() const { return n_ * n_; }

  int node_index(int i, int j) const { return j * (n_ + 1) + i; }
  int cell_index(int i, int j) const { return j * n_ + i; }

  const Point &node(int index) const { return nodes_[index]; }
  NodeMarker marker(int index) const { return markers_[index]; }
  std::array<int, 4> cell(int index) const;

  std::span<const Point> nodes() const { return nodes_; }
  std::span<const NodeMarker> markers() const { return markers_; }

  /// Nodes not on Sigma or Gamma, in increasing index order.
  const std::vector<int> &interior_nodes() const { return interior_; }

private:
  int n_;
  std::vector<Point> nodes_;
  std::vector<NodeMarker> markers_;
  std::vector<int> interior_;
};

/// Partition 0 = zeta_0 < ... < zeta_{M+1} = 1 of the top side, one node per
/// Gamma node of the parent bulk mesh.
class TraceMesh {
public:
  TraceMesh(std::vector<double> nodes, std::vector<int> parent);

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_intervals() const { return num_nodes() - 1; }
  double node(int i) const { return nodes_[i]; }
  double interval_length(int i) const { return nodes_[i + 1] - nodes_[i]; }
  std::span<const double> nodes() const { return nodes_; }

  /// Bulk node index carrying trace node i.
  int parent(int i) const { return parent_[i]; }
  std::span<const int> parents() const { return parent_; }

  /// Index of the interval containing x, with x = 1 mapped to the last one.
  int locate(double x) const;

private:
  std::vector<double> nodes_;
  std::vector<int> parent_;
};

BulkMesh build_bulk_mesh(int levels, int n_base = 2);
TraceMesh build_trace_mesh(const BulkMesh &mesh);

/// A bulk mesh together with its compatible trace partition.
struct Discretization {
  int level = 0;
  int n_base = 2;
  std::shared_ptr<const BulkMesh> bulk;
  std::shared_ptr<const TraceMesh> trace;

  int n() const { return bulk->cells_per_side(); }
  double h() const { return bulk->h(); }
};

std::shared_ptr<const Discretization> make_discretization(int level, int n_base = 2);

/// Nodal values of the bilinear interpolant on the once-refined mesh.
/// Throws DimensionError if `values` does not match `coarse`.
std::vector<double> prolong(const BulkMesh &coarse, std::span<const double> values);
std::vector<double> prolong(const TraceMesh &coarse, std::span<const double> values);

} // namespace fbc
