#include "fbc/control.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include <Eigen/Eigenvalues>

#include "fbc/errors.hpp"

namespace fbc {

double l2_dot(const SparseMatrix &mass, const Vector &a, const Vector &b) {
  return a.dot(mass * b);
}

double l2_norm(const SparseMatrix &mass, const Vector &a) {
  return std::sqrt(std::max(0.0, l2_dot(mass, a, a)));
}

ReducedFunctional::ReducedFunctional(std::shared_ptr<const StateModel> model, TrackingData data,
                                     double lambda, NewtonConfig newton)
    : model_(std::move(model)), data_(std::move(data)), lambda_(lambda), newton_(newton) {
  if (!model_)
    throw std::invalid_argument("ReducedFunctional: null model");
  if (!(lambda_ > 0.0))
    throw std::invalid_argument("ReducedFunctional: lambda must be positive");
}

ReducedFunctional::Evaluation ReducedFunctional::evaluate(const BoundaryField &U,
                                                          bool with_gradient) const {
  StateSolution state = solve_newton(*model_, U, newton_, warm_, with_gradient);
  newton_iterations_ += state.report.iterations;
  warm_ = state.state;
  const double cost = tracking_cost(*model_, state.state, data_) +
                      0.5 * lambda_ * l2_dot(mass(), U.values(), U.values());
  Evaluation e{cost, std::move(state), std::nullopt, std::nullopt};
  if (with_gradient) {
    e.adjoint = solve_adjoint(*model_, e.state, adjoint_rhs(*model_, e.state.state, data_));
    e.gradient = BoundaryField(U.mesh_ptr(), lambda_ * U.values() + e.adjoint->S.values(),
                               TraceKind::free);
    // removes the first-order effect of the Newton residual on the cost
    e.cost -= e.adjoint->multiplier.dot(local_residual(*model_, e.state.state, U));
  }
  return e;
}

double reduced_cost(const ReducedFunctional &f, const BoundaryField &U) { return f.cost(U); }

BoundaryField reduced_gradient(const ReducedFunctional &f, const BoundaryField &U) {
  return f.gradient(U);
}

BoundaryField project_ball(const BoundaryField &U, double radius, const SparseMatrix &mass) {
  if (!(radius > 0.0))
    throw std::invalid_argument("project_ball: radius must be positive");
  const double norm = l2_norm(mass, U.values());
  if (norm <= radius)
    return U;
  return BoundaryField(U.mesh_ptr(), U.values() * (radius / norm), U.kind());
}

OptimizationResult optimize(const ReducedFunctional &f, const ControlConfig &cfg,
                            const BoundaryField &U0) {
  const SparseMatrix &M = f.mass();
  auto project = [&](const Vector &u) {
    return project_ball(BoundaryField(U0.mesh_ptr(), u), cfg.radius, M).values();
  };

  OptimizationTrace trace;
  Vector u = project(U0.values());
  ReducedFunctional::Evaluation current = f.evaluate(BoundaryField(U0.mesh_ptr(), u), true);
  Vector g = current.gradient->values();
  double alpha = 1.0;

  for (int k = 0;; ++k) {
    const double gm = l2_norm(M, u - project(u - g));
    trace.cost.push_back(current.cost);
    trace.gradient_map_norm.push_back(gm);
    trace.control_norm.push_back(l2_norm(M, u));
    if (gm <= cfg.grad_tol) {
      trace.iterations = k;
      OptimizationResult out{BoundaryField(U0.mesh_ptr(), u), current.state.state,
                             *current.adjoint, *current.gradient, current.cost, gm, trace};
      return out;
    }
    if (k >= cfg.max_opt_iter)
      throw OptimizationError("optimize: no convergence in " + std::to_string(k) +
                                  " iterations, gradient map " + std::to_string(gm),
                              trace);

    const Vector d = project(u - alpha * g) - u;
    const double slope = l2_dot(M, g, d);
    const int newton_before = f.newton_iterations();
    double t = 1.0;
    Vector trial;
    std::optional<ReducedFunctional::Evaluation> next;
    for (;;) {
      trial = u + t * d;
      try {
        next = f.evaluate(BoundaryField(U0.mesh_ptr(), trial), true);
        if (next->cost <= current.cost + cfg.armijo * t * slope)
          break;
      } catch (const NonConvergenceError &) {
      } catch (const DegenerateGeometryError &) {
      }
      next.reset();
      t *= 0.5;
      if (t * alpha < cfg.min_step) {
        char msg[96];
        std::snprintf(msg, sizeof msg, "optimize: line search failed at gradient map %.3e", gm);
        throw OptimizationError(msg, trace);
      }
    }
    const Vector s = trial - u;
    const Vector y = next->gradient->values() - g;
    const double sy = l2_dot(M, s, y);
    alpha = sy > 0.0 ? std::clamp(l2_dot(M, s, s) / sy, cfg.min_step, cfg.max_step)
                     : cfg.max_step;
    trace.step.push_back(t * alpha);
    trace.newton_iterations.push_back(f.newton_iterations() - newton_before);
    u = std::move(trial);
    g = next->gradient->values();
    current = std::move(*next);
  }
}

VIReport check_variational_inequality(const OptimizationResult &opt,
                                      std::span<const BoundaryField> samples,
                                      const SparseMatrix &mass, double tol) {
  VIReport r;
  r.tolerance = tol;
  r.min_pairing = std::numeric_limits<double>::infinity();
  for (const BoundaryField &s : samples) {
    const double p = l2_dot(mass, opt.gradient.values(), s.values() - opt.U.values());
    r.pairings.push_back(p);
    r.min_pairing = std::min(r.min_pairing, p);
  }
  if (samples.empty())
    r.min_pairing = 0.0;
  r.passed = r.min_pairing >= -tol;
  return r;
}

std::vector<BoundaryField> random_admissible_samples(std::shared_ptr<const TraceMesh> mesh,
                                                     const SparseMatrix &mass, double radius,
                                                     int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double r_max = std::isfinite(radius) ? radius : 10.0;
  std::vector<BoundaryField> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    Vector v(mesh->num_nodes());
    for (Eigen::Index i = 0; i < v.size(); ++i)
      v[i] = normal(rng);
    // every fourth sample sits on the sphere
    const double target = (k % 4 == 3 ? 1.0 : uniform(rng)) * r_max;
    v *= target / l2_norm(mass, v);
    out.emplace_back(mesh, std::move(v));
  }
  return out;
}

namespace {

Vector hessian_vector(const GradientMap &gradient, const Vector &U, const Vector &dir,
                      double eps) {
  return (gradient(U + eps * dir) - gradient(U - eps * dir)) / (2.0 * eps);
}

} // namespace

HessianReport hessian_min_eig(const GradientMap &gradient, const Vector &U,
                              const SparseMatrix &mass, double eps, int dense_limit,
                              int lanczos_steps) {
  HessianReport report;
  const int n = static_cast<int>(U.size());
  report.dim = n;
  const Eigen::MatrixXd Md = Eigen::MatrixXd(mass);

  if (n <= dense_limit) {
    // Columns of the L2 Hessian; M * H_L2 is the symmetric coefficient Hessian.
    Eigen::MatrixXd H(n, n);
    for (int j = 0; j < n; ++j)
      H.col(j) = hessian_vector(gradient, U, Vector::Unit(n, j), eps);
    const Eigen::MatrixXd Hc = Md * H;
    const double scale = Hc.norm();
    report.symmetry_error = scale > 0.0 ? (Hc - Hc.transpose()).norm() / scale : 0.0;
    const Eigen::MatrixXd Hs = 0.5 * (Hc + Hc.transpose());
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Hs, Md);
    report.min_eigenvalue = es.eigenvalues().minCoeff();
    report.noise_floor = report.symmetry_error * es.eigenvalues().cwiseAbs().maxCoeff();
    report.dense = true;
  } else {
    const int m = std::min(n, lanczos_steps);
    std::vector<Vector> basis;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> normal;
    Vector q(n);
    for (int i = 0; i < n; ++i)
      q[i] = normal(rng);
    q /= l2_norm(mass, q);
    int steps = 0;
    for (int k = 0; k < m; ++k) {
      basis.push_back(q);
      Vector w = hessian_vector(gradient, U, q, eps);
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= k; ++i) {
          const double c = l2_dot(mass, basis[i], w);
          if (pass == 0 && i >= k - 1)
            T(i, k) = c;
          w -= c * basis[i];
        }
      }
      ++steps;
      const double beta = l2_norm(mass, w);
      if (k + 1 < m) {
        T(k + 1, k) = beta;
        if (beta < 1e-14)
          break;
        q = w / beta;
      }
    }
    const Eigen::MatrixXd Tk = T.topLeftCorner(steps, steps);
    const Eigen::MatrixXd Ts = 0.5 * (Tk + Tk.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Ts);
    report.min_eigenvalue = es.eigenvalues().minCoeff();
    report.symmetry_error = Tk.norm() > 0 ? (Tk - Tk.transpose()).norm() / Tk.norm() : 0.0;
    report.noise_floor = report.symmetry_error * es.eigenvalues().cwiseAbs().maxCoeff();
    report.dense = false;
  }
  if (std::abs(report.min_eigenvalue) <= report.noise_floor)
    report.warnings.push_back("smallest eigenvalue is below the finite-difference noise floor " +
                              std::to_string(report.noise_floor));
  return report;
}

HessianReport hessian_min_eig(const ReducedFunctional &f, const BoundaryField &U, double eps,
                              int dense_limit) {
  const auto mesh = U.mesh_ptr();
  const std::optional<StatePair> saved = f.warm_start();
  GradientMap g = [&](const Vector &u) {
    f.set_warm_start(saved);
    return f.gradient(BoundaryField(mesh, u)).values();
  };
  HessianReport r = hessian_min_eig(g, U.values(), f.mass(), eps, dense_limit);
  f.set_warm_start(saved);
  return r;
}

} // namespace fbc
