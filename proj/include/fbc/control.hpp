#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbc/adjoint.hpp"
#include "fbc/state.hpp"

namespace fbc {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

struct ControlConfig {
  double lambda = 1e-3;      ///< Tikhonov weight, > 0
  double radius = kUnbounded; ///< L2 radius of the admissible ball
  double grad_tol = 1e-9;    ///< on the L2 norm of U - P(U - g)
  int max_opt_iter = 20000;
  double armijo = 1e-4;
  double min_step = 1e-10;
  double max_step = 1e10;
  NewtonConfig newton;
};

/// M-weighted inner product and norm on trace coefficient vectors.
double l2_dot(const SparseMatrix &mass, const Vector &a, const Vector &b);
double l2_norm(const SparseMatrix &mass, const Vector &a);

/// J(U) = tracking_cost(G(U), Y(U)) + lambda/2 ||U||^2 on one discretization.
/// Keeps the last converged state as the Newton initial guess, so one instance
/// must not be shared between threads.
class ReducedFunctional {
public:
  ReducedFunctional(std::shared_ptr<const StateModel> model, TrackingData data, double lambda,
                    NewtonConfig newton = {});

  struct Evaluation {
    double cost = 0.0;
    StateSolution state;
    std::optional<AdjointPair> adjoint;
    std::optional<BoundaryField> gradient; ///< L2 Riesz representative lambda U + S
  };

  /// With the gradient, the cost is corrected by -w^T F using the adjoint
  /// multiplier w and the Newton residual F, which makes its error quadratic
  /// in the residual.
  Evaluation evaluate(const BoundaryField &U, bool with_gradient) const;
  double cost(const BoundaryField &U) const { return evaluate(U, true).cost; }
  BoundaryField gradient(const BoundaryField &U) const { return *evaluate(U, true).gradient; }

  const StateModel &model() const { return *model_; }
  const std::shared_ptr<const StateModel> &model_ptr() const { return model_; }
  const TrackingData &data() const { return data_; }
  const SparseMatrix &mass() const { return model_->mass(); }
  double lambda() const { return lambda_; }

  void set_warm_start(std::optional<StatePair> state) const { warm_ = std::move(state); }
  const std::optional<StatePair> &warm_start() const { return warm_; }
  int newton_iterations() const { return newton_iterations_; }

private:
  std::shared_ptr<const StateModel> model_;
  TrackingData data_;
  double lambda_;
  NewtonConfig newton_;
  mutable std::optional<StatePair> warm_;
  mutable int newton_iterations_ = 0;
};

double reduced_cost(const ReducedFunctional &f, const BoundaryField &U);
BoundaryField reduced_gradient(const ReducedFunctional &f, const BoundaryField &U);

/// Metric projection onto {||U||_L2 <= radius}; identity for an infinite radius.
BoundaryField project_ball(const BoundaryField &U, double radius, const SparseMatrix &mass);

struct OptimizationTrace {
  std::vector<double> cost;
  std::vector<double> gradient_map_norm;
  std::vector<double> control_norm;
  std::vector<double> step; ///< accepted t * alpha
  std::vector<int> newton_iterations;
  int iterations = 0;
};

struct OptimizationResult {
  BoundaryField U;
  StatePair state;
  AdjointPair adjoint;
  BoundaryField gradient;
  double cost = 0.0;
  double gradient_map_norm = 0.0;
  OptimizationTrace trace;
};

class OptimizationError : public std::runtime_error {
public:
  OptimizationError(const std::string &what, OptimizationTrace trace)
      : std::runtime_error(what), trace(std::move(trace)) {}
  OptimizationTrace trace;
};

/// Projected gradient with Barzilai-Borwein trial steps and monotone Armijo
/// backtracking along the projected arc's chord. Starts from P(U0).
OptimizationResult optimize(const ReducedFunctional &f, const ControlConfig &cfg,
                            const BoundaryField &U0);

struct VIReport {
  std::vector<double> pairings;
  double min_pairing = 0.0;
  double tolerance = 0.0;
  bool passed = true;
};

/// Evaluates (lambda U + S, U_s - U) for every sample.
VIReport check_variational_inequality(const OptimizationResult &opt,
                                      std::span<const BoundaryField> samples,
                                      const SparseMatrix &mass, double tol = 1e-8);

/// Random controls with ||U||_L2 <= radius (or <= 10 when the radius is infinite).
std::vector<BoundaryField> random_admissible_samples(std::shared_ptr<const TraceMesh> mesh,
                                                     const SparseMatrix &mass, double radius,
                                                     int count, std::uint64_t seed);

struct HessianReport {
  double min_eigenvalue = 0.0;
  double symmetry_error = 0.0; ///< ||H - H^T|| / ||H|| (dense build only)
  double noise_floor = 0.0;
  int dim = 0;
  bool dense = true;
  std::vector<std::string> warnings;
};

/// Maps control coefficients to the coefficients of the L2 gradient.
using GradientMap = std::function<Vector(const Vector &)>;

/// Smallest eigenvalue of the Hessian in the L2 metric, i.e. of the
/// generalized problem H x = theta M x, with Hessian-vector products from
/// central differences of `gradient`. Dense build up to `dense_limit`
/// unknowns, M-orthogonal Lanczos otherwise.
HessianReport hessian_min_eig(const GradientMap &gradient, const Vector &U,
                              const SparseMatrix &mass, double eps = 1e-4, int dense_limit = 80,
                              int lanczos_steps = 40);

HessianReport hessian_min_eig(const ReducedFunctional &f, const BoundaryField &U,
                              double eps = 1e-4, int dense_limit = 80);

} // namespace fbc
