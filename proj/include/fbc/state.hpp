#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbc/assembly.hpp"
#include "fbc/fields.hpp"
#include "fbc/linsolve.hpp"
#include "fbc/mesh.hpp"

namespace fbc {

/// Free boundary G (zero-trace) and bulk state Y (zero on the whole boundary).
struct StatePair {
  BoundaryField G;
  BulkField Y;
};

/// Everything about the state equation that does not depend on the state or
/// the control: meshes, surface tension, the Dirichlet lifting v, and the
/// state-independent matrices.
class StateModel {
public:
  StateModel(std::shared_ptr<const Discretization> disc, double kappa, BulkField v);

  const Discretization &disc() const { return *disc_; }
  const std::shared_ptr<const Discretization> &disc_ptr() const { return disc_; }
  double kappa() const { return kappa_; }
  const BulkField &v() const { return v_; }
  const FreeDofs &dofs() const { return dofs_; }
  const SparseMatrix &b_gamma() const { return b_gamma_; }
  const SparseMatrix &mass() const { return mass_; }
  const SparseMatrix &lift() const { return lift_; }
  /// Extension by the Gamma-row hat functions only. Trace test functions
  /// extended this way differ from E_h ones by interior bulk test functions,
  /// so they define the same discrete solution with a much sparser Jacobian.
  const SparseMatrix &local_lift() const { return local_lift_; }

  StatePair zero_state() const;
  /// Free unknowns stacked as [trace interior; bulk interior].
  Vector pack(const StatePair &state) const;
  StatePair unpack(const Vector &x) const;

private:
  std::shared_ptr<const Discretization> disc_;
  double kappa_;
  BulkField v_;
  FreeDofs dofs_;
  SparseMatrix b_gamma_;
  SparseMatrix mass_;
  SparseMatrix lift_;
  SparseMatrix local_lift_;
};

/// Coupled residual over the hat basis of the free trace nodes followed by the
/// interior bulk basis:
///   B_Gamma[G, Xi] + B_Omega[Y + v, Z + E_h Xi; A[G]] - (U, Xi).
Vector residual(const StateModel &model, const StatePair &state, const BoundaryField &U);

/// Derivative of `residual` with respect to the packed unknowns. Trace rows
/// come first; the E_h lift is folded into them.
struct StateJacobian {
  SparseMatrix matrix;
  int num_trace = 0;
  int num_bulk = 0;
};

StateJacobian jacobian(const StateModel &model, const StatePair &state);

/// Residual and Jacobian with the trace rows tested against local_lift().
/// They equal T * residual and T * jacobian for a fixed unit upper-triangular
/// T, so Newton steps coincide with those of the E_h system.
Vector local_residual(const StateModel &model, const StatePair &state, const BoundaryField &U);
StateJacobian local_jacobian(const StateModel &model, const StatePair &state);

struct NewtonConfig {
  double tol = 1e-11; ///< on the max-norm of the residual
  int max_iter = 60;
  double lambda_min = 1.0 / 64.0;
  /// Controls with larger L2 norm only produce a warning.
  double admissible_radius = std::numeric_limits<double>::infinity();
};

struct PicardConfig {
  double tol = 1e-13; ///< on the max-norm of successive differences
  int max_iter = 1000;
};

struct IterationReport {
  bool converged = false;
  int iterations = 0;
  std::vector<double> residual_norms;
  std::vector<double> step_norms;
  std::vector<double> damping;
  /// Successive-difference ratios (Picard only).
  std::vector<double> contraction_ratios;
  /// ||d_{k+1}|| / ||d_k||^2 over the last two full Newton steps, NaN if unavailable.
  double quadratic_constant = std::numeric_limits<double>::quiet_NaN();
  double max_abs_slope = 0.0;
  bool state_constraint_ok = true; ///< |G'| <= 1 on every interval
  std::vector<std::string> warnings;
};

struct StateSolution {
  StatePair state;
  IterationReport report;
  /// Factorized local_jacobian at `state` (Newton with factorize_final only).
  std::shared_ptr<const Factorization> jacobian;
};

class NonConvergenceError : public std::runtime_error {
public:
  NonConvergenceError(const std::string &what, StatePair last, std::vector<double> history)
      : std::runtime_error(what), last_iterate(std::move(last)), history(std::move(history)) {}

  StatePair last_iterate;
  std::vector<double> history;
};

/// Damped Newton with the natural monotonicity test. With `factorize_final`
/// the Jacobian at the converged state is factorized and returned for the
/// adjoint solve.
StateSolution solve_newton(const StateModel &model, const BoundaryField &U,
                           const NewtonConfig &cfg = {},
                           const std::optional<StatePair> &initial = std::nullopt,
                           bool factorize_final = true);

/// Alternating fixed-point iteration: trace solve with the bulk state frozen,
/// then bulk solve on the updated geometry.
StateSolution solve_picard(const StateModel &model, const BoundaryField &U,
                           const PicardConfig &cfg = {},
                           const std::optional<StatePair> &initial = std::nullopt);

} // namespace fbc
