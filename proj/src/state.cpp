#include "fbc/state.hpp"

#include <cmath>

#include "fbc/errors.hpp"

namespace fbc {

namespace {

double max_norm(const Vector &v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

double control_l2(const StateModel &model, const BoundaryField &U) {
  return std::sqrt(std::max(0.0, U.values().dot(model.mass() * U.values())));
}

void check_control(const StateModel &model, const BoundaryField &U) {
  if (U.size() != model.disc().trace->num_nodes())
    throw DimensionError("control does not live on the model's trace mesh");
}

Vector total_bulk(const StateModel &model, const StatePair &state) {
  return state.Y.values() + model.v().values();
}

void finish_report(const StateModel &model, const StatePair &state, const BoundaryField &U,
                   double admissible_radius, IterationReport &report) {
  report.max_abs_slope = state.G.max_abs_slope();
  report.state_constraint_ok = report.max_abs_slope <= 1.0;
  if (!report.state_constraint_ok)
    report.warnings.push_back("state constraint violated: max |G'| = " +
                              std::to_string(report.max_abs_slope));
  if (std::isfinite(admissible_radius) && control_l2(model, U) > admissible_radius)
    report.warnings.push_back("control outside the admissible ball");
}

} // namespace

StateModel::StateModel(std::shared_ptr<const Discretization> disc, double kappa, BulkField v)
    : disc_(std::move(disc)), kappa_(kappa), v_(std::move(v)) {
  if (!disc_)
    throw std::invalid_argument("StateModel: null discretization");
  if (v_.size() != disc_->bulk->num_nodes())
    throw DimensionError("StateModel: Dirichlet lifting does not match the bulk mesh");
  dofs_ = make_free_dofs(*disc_->bulk, *disc_->trace);
  b_gamma_ = assemble_b_gamma(*disc_->trace, kappa_).matrix;
  mass_ = assemble_mass_1d(*disc_->trace).matrix;
  lift_ = lift_matrix(*disc_->bulk, *disc_->trace);
  const TraceMesh &trace = *disc_->trace;
  local_lift_.resize(disc_->bulk->num_nodes(), trace.num_nodes());
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < trace.num_nodes(); ++i)
    t.emplace_back(trace.parent(i), i, 1.0);
  local_lift_.setFromTriplets(t.begin(), t.end());
}

StatePair StateModel::zero_state() const {
  return {BoundaryField::zero(disc_->trace, TraceKind::zero),
          BulkField::zero(disc_->bulk, TraceKind::zero)};
}

Vector StateModel::pack(const StatePair &state) const {
  Vector x(dofs_.size());
  x.head(dofs_.num_trace()) = dofs_.trace_select.transpose() * state.G.values();
  x.tail(dofs_.num_bulk()) = dofs_.bulk_select.transpose() * state.Y.values();
  return x;
}

StatePair StateModel::unpack(const Vector &x) const {
  if (x.size() != dofs_.size())
    throw DimensionError("StateModel::unpack: wrong vector length");
  return {BoundaryField(disc_->trace, dofs_.trace_select * x.head(dofs_.num_trace()),
                        TraceKind::zero),
          BulkField(disc_->bulk, dofs_.bulk_select * x.tail(dofs_.num_bulk()), TraceKind::zero)};
}

namespace {

Vector residual_with(const StateModel &model, const StatePair &state, const BoundaryField &U,
                     const SparseMatrix &lift) {
  check_control(model, U);
  const FreeDofs &d = model.dofs();
  const SparseMatrix K = assemble_b_omega(*model.disc().bulk, state.G).matrix;
  const Vector kw = K * total_bulk(model, state);
  const Vector trace_full =
      model.b_gamma() * state.G.values() + lift.transpose() * kw - model.mass() * U.values();
  Vector r(d.size());
  r.head(d.num_trace()) = d.trace_select.transpose() * trace_full;
  r.tail(d.num_bulk()) = d.bulk_select.transpose() * kw;
  return r;
}

StateJacobian jacobian_with(const StateModel &model, const StatePair &state,
                            const SparseMatrix &lift) {
  const FreeDofs &d = model.dofs();
  const BulkMesh &mesh = *model.disc().bulk;
  const SparseMatrix K = assemble_b_omega(mesh, state.G).matrix;
  const BulkField W(model.disc().bulk, total_bulk(model, state));
  const SparseMatrix C = assemble_coupling_blocks(mesh, state.G, W).combined();
  const SparseMatrix lift_t = SparseMatrix(lift.transpose());

  const SparseMatrix jgg =
      restrict_matrix(SparseMatrix(model.b_gamma() + lift_t * C), d.trace_select, d.trace_select);
  const SparseMatrix jgy = restrict_matrix(SparseMatrix(lift_t * K), d.trace_select, d.bulk_select);
  const SparseMatrix jyg = restrict_matrix(C, d.bulk_select, d.trace_select);
  const SparseMatrix jyy = restrict_matrix(K, d.bulk_select, d.bulk_select);
  return {block_matrix(jgg, jgy, jyg, jyy), d.num_trace(), d.num_bulk()};
}

} // namespace

Vector residual(const StateModel &model, const StatePair &state, const BoundaryField &U) {
  return residual_with(model, state, U, model.lift());
}

StateJacobian jacobian(const StateModel &model, const StatePair &state) {
  return jacobian_with(model, state, model.lift());
}

Vector local_residual(const StateModel &model, const StatePair &state, const BoundaryField &U) {
  return residual_with(model, state, U, model.local_lift());
}

StateJacobian local_jacobian(const StateModel &model, const StatePair &state) {
  return jacobian_with(model, state, model.local_lift());
}

StateSolution solve_newton(const StateModel &model, const BoundaryField &U,
                           const NewtonConfig &cfg, const std::optional<StatePair> &initial,
                           bool factorize_final) {
  check_control(model, U);
  IterationReport report;
  Vector x = model.pack(initial ? *initial : model.zero_state());
  StatePair state = model.unpack(x);
  std::vector<double> full_steps; // step norms of undamped iterations, in order

  for (int it = 0;; ++it) {
    const double rn = max_norm(residual(model, state, U));
    report.residual_norms.push_back(rn);
    if (rn <= cfg.tol) {
      report.converged = true;
      break;
    }
    if (!std::isfinite(rn) || it >= cfg.max_iter)
      throw NonConvergenceError("Newton: no convergence after " + std::to_string(it) +
                                    " iterations, residual " + std::to_string(rn),
                                state, report.residual_norms);

    const Factorization fac(local_jacobian(model, state).matrix);
    const Vector dx = -fac.solve(local_residual(model, state, U));
    const double dn = max_norm(dx);
    report.step_norms.push_back(dn);

    double lambda = 1.0;
    Vector x_trial;
    for (;;) {
      x_trial = x + lambda * dx;
      bool accept = false;
      try {
        const StatePair trial = model.unpack(x_trial);
        if (max_norm(residual(model, trial, U)) <= cfg.tol) {
          accept = true;
        } else {
          // natural monotonicity: simplified Newton correction must shrink
          const Vector dx_bar = -fac.solve(local_residual(model, trial, U));
          accept = max_norm(dx_bar) < dn;
        }
      } catch (const DegenerateGeometryError &) {
        accept = false;
      }
      if (accept)
        break;
      lambda *= 0.5;
      if (lambda < cfg.lambda_min)
        throw NonConvergenceError("Newton: damping factor fell below lambda_min", state,
                                  report.residual_norms);
    }
    report.damping.push_back(lambda);
    if (lambda == 1.0)
      full_steps.push_back(dn);
    else
      full_steps.clear();
    x = std::move(x_trial);
    state = model.unpack(x);
    ++report.iterations;
  }

  if (full_steps.size() >= 2) {
    const double prev = full_steps[full_steps.size() - 2];
    if (prev > 0.0)
      report.quadratic_constant = full_steps.back() / (prev * prev);
  }
  finish_report(model, state, U, cfg.admissible_radius, report);

  StateSolution out{std::move(state), std::move(report), nullptr};
  if (factorize_final)
    out.jacobian = std::make_shared<const Factorization>(local_jacobian(model, out.state).matrix);
  return out;
}

StateSolution solve_picard(const StateModel &model, const BoundaryField &U,
                           const PicardConfig &cfg, const std::optional<StatePair> &initial) {
  check_control(model, U);
  const FreeDofs &d = model.dofs();
  const BulkMesh &mesh = *model.disc().bulk;
  const Factorization trace_solver(
      restrict_matrix(model.b_gamma(), d.trace_select, d.trace_select));
  const Vector load = model.mass() * U.values();
  const SparseMatrix lift_t = SparseMatrix(model.lift().transpose());

  IterationReport report;
  StatePair state = initial ? *initial : model.zero_state();
  double previous = -1.0;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    const SparseMatrix K = assemble_b_omega(mesh, state.G).matrix;
    const Vector rhs_g =
        d.trace_select.transpose() * (load - lift_t * (K * total_bulk(model, state)));
    BoundaryField G(model.disc().trace, d.trace_select * trace_solver.solve(rhs_g),
                    TraceKind::zero);

    const SparseMatrix K_new = assemble_b_omega(mesh, G).matrix;
    const Factorization bulk_solver(restrict_matrix(K_new, d.bulk_select, d.bulk_select));
    const Vector rhs_y = -(d.bulk_select.transpose() * (K_new * model.v().values()));
    BulkField Y(model.disc().bulk, d.bulk_select * bulk_solver.solve(rhs_y), TraceKind::zero);

    const double diff = std::max(max_norm(G.values() - state.G.values()),
                                 max_norm(Y.values() - state.Y.values()));
    state = {std::move(G), std::move(Y)};
    report.iterations = it;
    report.step_norms.push_back(diff);
    if (previous > 0.0)
      report.contraction_ratios.push_back(diff / previous);
    previous = diff;
    if (diff <= cfg.tol) {
      report.converged = true;
      break;
    }
    if (!std::isfinite(diff) || diff > 1e6)
      throw NonConvergenceError("Picard: iterates diverge", state, report.step_norms);
  }
  if (!report.converged)
    throw NonConvergenceError("Picard: no contraction within " + std::to_string(cfg.max_iter) +
                                  " iterations",
                              state, report.step_norms);
  report.residual_norms.push_back(max_norm(residual(model, state, U)));
  finish_report(model, state, U, std::numeric_limits<double>::infinity(), report);
  return {std::move(state), std::move(report), nullptr};
}

} // namespace fbc
