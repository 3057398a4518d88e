#include "fbc/fields.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "fbc/errors.hpp"

namespace fbc {

namespace {

constexpr double kBoundaryTolerance = 1e-13;

std::span<const double> as_span(const Vector &v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

Vector to_vector(const std::vector<double> &v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace

BoundaryField::BoundaryField(std::shared_ptr<const TraceMesh> mesh, Vector values, TraceKind kind)
    : mesh_(std::move(mesh)), values_(std::move(values)), kind_(kind) {
  if (!mesh_)
    throw std::invalid_argument("BoundaryField: null mesh");
  if (values_.size() != mesh_->num_nodes())
    throw DimensionError("BoundaryField: " + std::to_string(values_.size()) +
                         " values for " + std::to_string(mesh_->num_nodes()) + " nodes");
  if (kind_ == TraceKind::zero && (values_[0] != 0.0 || values_[values_.size() - 1] != 0.0))
    throw std::invalid_argument("BoundaryField: zero-trace field with nonzero endpoint");
}

BoundaryField BoundaryField::zero(std::shared_ptr<const TraceMesh> mesh, TraceKind kind) {
  const int n = mesh->num_nodes();
  return BoundaryField(std::move(mesh), Vector::Zero(n), kind);
}

BoundaryField BoundaryField::interpolate(std::shared_ptr<const TraceMesh> mesh,
                                         const std::function<double(double)> &f,
                                         TraceKind kind) {
  Vector v(mesh->num_nodes());
  for (int i = 0; i < mesh->num_nodes(); ++i)
    v[i] = f(mesh->node(i));
  if (kind == TraceKind::zero) {
    const Eigen::Index last = v.size() - 1;
    if (std::abs(v[0]) > kBoundaryTolerance || std::abs(v[last]) > kBoundaryTolerance)
      throw std::invalid_argument("BoundaryField::interpolate: f does not vanish at 0 and 1");
    v[0] = 0.0;
    v[last] = 0.0;
  }
  return BoundaryField(std::move(mesh), std::move(v), kind);
}

double BoundaryField::operator()(double x1) const {
  const int k = mesh_->locate(x1);
  const double t = (x1 - mesh_->node(k)) / mesh_->interval_length(k);
  return (1.0 - t) * values_[k] + t * values_[k + 1];
}

double BoundaryField::slope(int interval) const {
  return (values_[interval + 1] - values_[interval]) / mesh_->interval_length(interval);
}

double BoundaryField::max_abs_slope() const {
  double m = 0.0;
  for (int k = 0; k < mesh_->num_intervals(); ++k)
    m = std::max(m, std::abs(slope(k)));
  return m;
}

BoundaryField BoundaryField::prolonged(std::shared_ptr<const TraceMesh> fine) const {
  if (fine->num_nodes() != 2 * mesh_->num_nodes() - 1)
    throw DimensionError("BoundaryField::prolonged: target is not a single refinement");
  return BoundaryField(std::move(fine), to_vector(prolong(*mesh_, as_span(values_))), kind_);
}

BulkField::BulkField(std::shared_ptr<const BulkMesh> mesh, Vector values, TraceKind kind)
    : mesh_(std::move(mesh)), values_(std::move(values)), kind_(kind) {
  if (!mesh_)
    throw std::invalid_argument("BulkField: null mesh");
  if (values_.size() != mesh_->num_nodes())
    throw DimensionError("BulkField: " + std::to_string(values_.size()) + " values for " +
                         std::to_string(mesh_->num_nodes()) + " nodes");
  if (kind_ == TraceKind::zero) {
    for (int k = 0; k < mesh_->num_nodes(); ++k)
      if (mesh_->marker(k) != NodeMarker::interior && values_[k] != 0.0)
        throw std::invalid_argument("BulkField: zero-boundary field with nonzero boundary value");
  }
}

BulkField BulkField::zero(std::shared_ptr<const BulkMesh> mesh, TraceKind kind) {
  const int n = mesh->num_nodes();
  return BulkField(std::move(mesh), Vector::Zero(n), kind);
}

BulkField BulkField::interpolate(std::shared_ptr<const BulkMesh> mesh,
                                 const std::function<double(double, double)> &f,
                                 TraceKind kind) {
  Vector v(mesh->num_nodes());
  for (int k = 0; k < mesh->num_nodes(); ++k) {
    const Point &p = mesh->node(k);
    v[k] = f(p.x1, p.x2);
    if (kind == TraceKind::zero && mesh->marker(k) != NodeMarker::interior) {
      if (std::abs(v[k]) > kBoundaryTolerance)
        throw std::invalid_argument("BulkField::interpolate: f does not vanish on the boundary");
      v[k] = 0.0;
    }
  }
  return BulkField(std::move(mesh), std::move(v), kind);
}

double BulkField::operator()(double x1, double x2) const {
  const int n = mesh_->cells_per_side();
  const int i = std::clamp(static_cast<int>(std::floor(x1 * n)), 0, n - 1);
  const int j = std::clamp(static_cast<int>(std::floor(x2 * n)), 0, n - 1);
  const double s = x1 * n - i;
  const double t = x2 * n - j;
  const auto c = mesh_->cell(mesh_->cell_index(i, j));
  return (1 - s) * (1 - t) * values_[c[0]] + s * (1 - t) * values_[c[1]] + s * t * values_[c[2]] +
         (1 - s) * t * values_[c[3]];
}

Vector BulkField::top_trace() const {
  const int n = mesh_->cells_per_side();
  Vector out(n + 1);
  for (int i = 0; i <= n; ++i)
    out[i] = values_[mesh_->node_index(i, n)];
  return out;
}

BulkField BulkField::prolonged(std::shared_ptr<const BulkMesh> fine) const {
  if (fine->cells_per_side() != 2 * mesh_->cells_per_side())
    throw DimensionError("BulkField::prolonged: target is not a single refinement");
  return BulkField(std::move(fine), to_vector(prolong(*mesh_, as_span(values_))), kind_);
}

} // namespace fbc
