#pragma once

#include "fbc/state.hpp"

namespace fbc {

/// Targets of the tracking functional. y_d only matters when mu > 0.
struct TrackingData {
  BoundaryField gamma_d;
  BulkField y_d;
  double mu = 0.0;
};

/// S (zero-trace) and R = R0 + E_h S with R0 zero on the whole boundary.
struct AdjointPair {
  BoundaryField S;
  BulkField R0;
  BulkField R;
  Vector multiplier; ///< packed solution w of the transposed Newton system
};

/// Derivative of
///   1/2 ||G - gamma_d||^2 + mu/2 int (Y + v - y_d)^2 (1 + G)
/// with respect to the packed free unknowns, trace block first. The mu terms
/// use the bulk 2x2 Gauss rule; the trace term the 1D mass matrix.
Vector adjoint_rhs(const StateModel &model, const StatePair &state, const TrackingData &data);

/// The tracking part of the cost evaluated with the same rules as adjoint_rhs.
double tracking_cost(const StateModel &model, const StatePair &state, const TrackingData &data);

/// Solves J^T w = rhs on the Newton Jacobian factorized at `solution.state`
/// and maps w back to the E_h splitting R = R0 + E_h S.
AdjointPair solve_adjoint(const StateModel &model, const StateSolution &solution,
                          const Vector &rhs);

} // namespace fbc
