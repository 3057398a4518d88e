#include "fbc/mesh.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "fbc/errors.hpp"

namespace fbc {

BulkMesh::BulkMesh(int n_cells_per_side) : n_(n_cells_per_side) {
  if (n_ < 1)
    throw std::invalid_argument("BulkMesh: need at least one cell per side");
  const int m = n_ + 1;
  nodes_.resize(static_cast<std::size_t>(m) * m);
  markers_.resize(nodes_.size(), NodeMarker::interior);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      const int k = node_index(i, j);
      nodes_[k] = {static_cast<double>(i) / n_, static_cast<double>(j) / n_};
      if (j == n_)
        markers_[k] = NodeMarker::gamma;
      else if (j == 0 || i == 0 || i == n_)
        markers_[k] = NodeMarker::sigma;
      else
        interior_.push_back(k);
    }
  }
}

std::array<int, 4> BulkMesh::cell(int index) const {
  const int i = index % n_;
  const int j = index / n_;
  return {node_index(i, j), node_index(i + 1, j), node_index(i + 1, j + 1),
          node_index(i, j + 1)};
}

TraceMesh::TraceMesh(std::vector<double> nodes, std::vector<int> parent)
    : nodes_(std::move(nodes)), parent_(std::move(parent)) {
  if (nodes_.size() < 2 || nodes_.size() != parent_.size())
    throw DimensionError("TraceMesh: need >= 2 nodes and one parent per node");
  if (nodes_.front() != 0.0 || nodes_.back() != 1.0)
    throw std::invalid_argument("TraceMesh: nodes must span [0, 1]");
  for (std::size_t i = 1; i < nodes_.size(); ++i)
    if (!(nodes_[i] > nodes_[i - 1]))
      throw std::invalid_argument("TraceMesh: nodes must be strictly increasing");
}

int TraceMesh::locate(double x) const {
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
  int k = static_cast<int>(it - nodes_.begin()) - 1;
  return std::clamp(k, 0, num_intervals() - 1);
}

BulkMesh build_bulk_mesh(int levels, int n_base) {
  if (levels < 0 || n_base < 1)
    throw std::invalid_argument("build_bulk_mesh: levels >= 0 and n_base >= 1 required");
  if (levels > 20)
    throw std::invalid_argument("build_bulk_mesh: refusing more than 20 refinements");
  return BulkMesh(n_base << levels);
}

TraceMesh build_trace_mesh(const BulkMesh &mesh) {
  const int n = mesh.cells_per_side();
  std::vector<double> nodes(n + 1);
  std::vector<int> parent(n + 1);
  for (int i = 0; i <= n; ++i) {
    parent[i] = mesh.node_index(i, n);
    nodes[i] = mesh.node(parent[i]).x1;
  }
  return TraceMesh(std::move(nodes), std::move(parent));
}

std::shared_ptr<const Discretization> make_discretization(int level, int n_base) {
  auto bulk = std::make_shared<const BulkMesh>(build_bulk_mesh(level, n_base));
  auto trace = std::make_shared<const TraceMesh>(build_trace_mesh(*bulk));
  return std::make_shared<const Discretization>(Discretization{level, n_base, bulk, trace});
}

std::vector<double> prolong(const BulkMesh &coarse, std::span<const double> values) {
  if (values.size() != static_cast<std::size_t>(coarse.num_nodes()))
    throw DimensionError("prolong: field has " + std::to_string(values.size()) +
                         " values, coarse mesh has " + std::to_string(coarse.num_nodes()) +
                         " nodes");
  const int n = coarse.cells_per_side();
  const int nf = 2 * n;
  std::vector<double> out(static_cast<std::size_t>(nf + 1) * (nf + 1));
  auto at = [&](int i, int j) { return values[coarse.node_index(i, j)]; };
  for (int J = 0; J <= nf; ++J) {
    for (int I = 0; I <= nf; ++I) {
      const int i = I / 2, j = J / 2;
      const bool odd_i = I % 2, odd_j = J % 2;
      double v;
      if (!odd_i && !odd_j)
        v = at(i, j);
      else if (odd_i && !odd_j)
        v = 0.5 * (at(i, j) + at(i + 1, j));
      else if (!odd_i && odd_j)
        v = 0.5 * (at(i, j) + at(i, j + 1));
      else
        v = 0.25 * (at(i, j) + at(i + 1, j) + at(i, j + 1) + at(i + 1, j + 1));
      out[static_cast<std::size_t>(J) * (nf + 1) + I] = v;
    }
  }
  return out;
}

std::vector<double> prolong(const TraceMesh &coarse, std::span<const double> values) {
  if (values.size() != static_cast<std::size_t>(coarse.num_nodes()))
    throw DimensionError("prolong: trace field has " + std::to_string(values.size()) +
                         " values, trace mesh has " + std::to_string(coarse.num_nodes()) +
                         " nodes");
  std::vector<double> out;
  out.reserve(2 * values.size() - 1);
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    out.push_back(values[i]);
    out.push_back(0.5 * (values[i] + values[i + 1]));
  }
  out.push_back(values.back());
  return out;
}

} // namespace fbc
