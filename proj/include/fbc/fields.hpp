#pragma once

#include <functional>
#include <memory>

#include <Eigen/Dense>

#include "fbc/mesh.hpp"

namespace fbc {

using Vector = Eigen::VectorXd;

/// `zero`: the field vanishes on the boundary of its domain (trace endpoints,
/// or Sigma and Gamma for bulk fields). `free`: no constraint.
enum class TraceKind { zero, free };

/// Continuous piecewise-linear function on a TraceMesh.
class BoundaryField {
public:
  BoundaryField(std::shared_ptr<const TraceMesh> mesh, Vector values,
                TraceKind kind = TraceKind::free);

  static BoundaryField zero(std::shared_ptr<const TraceMesh> mesh,
                            TraceKind kind = TraceKind::free);
  /// Nodal interpolant of f. For TraceKind::zero, f must vanish at 0 and 1.
  static BoundaryField interpolate(std::shared_ptr<const TraceMesh> mesh,
                                   const std::function<double(double)> &f,
                                   TraceKind kind = TraceKind::free);

  const TraceMesh &mesh() const { return *mesh_; }
  const std::shared_ptr<const TraceMesh> &mesh_ptr() const { return mesh_; }
  const Vector &values() const { return values_; }
  TraceKind kind() const { return kind_; }
  int size() const { return static_cast<int>(values_.size()); }

  double operator()(double x1) const;
  /// Derivative on interval i.
  double slope(int interval) const;
  double max_abs_slope() const;

  /// Same function on the once-refined trace mesh `fine`.
  BoundaryField prolonged(std::shared_ptr<const TraceMesh> fine) const;

private:
  std::shared_ptr<const TraceMesh> mesh_;
  Vector values_;
  TraceKind kind_;
};

/// Continuous Q1 function on a BulkMesh.
class BulkField {
public:
  BulkField(std::shared_ptr<const BulkMesh> mesh, Vector values,
            TraceKind kind = TraceKind::free);

  static BulkField zero(std::shared_ptr<const BulkMesh> mesh, TraceKind kind = TraceKind::free);
  /// Nodal interpolant of f(x1, x2). For TraceKind::zero, f must vanish on
  /// the boundary of the square.
  static BulkField interpolate(std::shared_ptr<const BulkMesh> mesh,
                               const std::function<double(double, double)> &f,
                               TraceKind kind = TraceKind::free);

  const BulkMesh &mesh() const { return *mesh_; }
  const std::shared_ptr<const BulkMesh> &mesh_ptr() const { return mesh_; }
  const Vector &values() const { return values_; }
  TraceKind kind() const { return kind_; }
  int size() const { return static_cast<int>(values_.size()); }

  /// Bilinear interpolant at (x1, x2) in the closed unit square.
  double operator()(double x1, double x2) const;

  /// Values at the Gamma nodes, ordered by x1.
  Vector top_trace() const;

  BulkField prolonged(std::shared_ptr<const BulkMesh> fine) const;

private:
  std::shared_ptr<const BulkMesh> mesh_;
  Vector values_;
  TraceKind kind_;
};

} // namespace fbc
