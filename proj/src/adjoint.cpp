#include "fbc/adjoint.hpp"

#include "fbc/errors.hpp"

namespace fbc {

namespace {

void check_data(const StateModel &model, const TrackingData &data) {
  if (data.gamma_d.size() != model.disc().trace->num_nodes() ||
      data.y_d.size() != model.disc().bulk->num_nodes())
    throw DimensionError("tracking data does not match the discretization");
  if (data.mu < 0.0)
    throw std::invalid_argument("tracking weight mu must be nonnegative");
}

// Calls f(q, cell nodes, trace interval, G(q), deltaY(q)) for every bulk quadrature point.
template <class F>
void for_each_bulk_point(const StateModel &model, const StatePair &state,
                         const TrackingData &data, F &&f) {
  const BulkMesh &mesh = *model.disc().bulk;
  const Vector dy = state.Y.values() + model.v().values() - data.y_d.values();
  const Vector &g = state.G.values();
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto nodes = mesh.cell(c);
    const int col = cell_column(mesh, c);
    for (const QuadPoint &q : cell_quadrature(mesh, c)) {
      const double gq = (1.0 - q.xi) * g[col] + q.xi * g[col + 1];
      double dyq = 0.0;
      for (int a = 0; a < 4; ++a)
        dyq += q.phi[a] * dy[nodes[a]];
      f(q, nodes, col, gq, dyq);
    }
  }
}

} // namespace

Vector adjoint_rhs(const StateModel &model, const StatePair &state, const TrackingData &data) {
  check_data(model, data);
  const FreeDofs &d = model.dofs();
  Vector trace = model.mass() * (state.G.values() - data.gamma_d.values());
  Vector bulk = Vector::Zero(model.disc().bulk->num_nodes());
  if (data.mu > 0.0) {
    const double mu = data.mu;
    for_each_bulk_point(model, state, data,
                        [&](const QuadPoint &q, const std::array<int, 4> &nodes, int col,
                            double gq, double dyq) {
                          trace[col] += 0.5 * mu * q.weight * dyq * dyq * (1.0 - q.xi);
                          trace[col + 1] += 0.5 * mu * q.weight * dyq * dyq * q.xi;
                          for (int a = 0; a < 4; ++a)
                            bulk[nodes[a]] += mu * q.weight * dyq * (1.0 + gq) * q.phi[a];
                        });
  }
  Vector rhs(d.size());
  rhs.head(d.num_trace()) = d.trace_select.transpose() * trace;
  rhs.tail(d.num_bulk()) = d.bulk_select.transpose() * bulk;
  return rhs;
}

double tracking_cost(const StateModel &model, const StatePair &state, const TrackingData &data) {
  check_data(model, data);
  const Vector dg = state.G.values() - data.gamma_d.values();
  double cost = 0.5 * dg.dot(model.mass() * dg);
  if (data.mu > 0.0) {
    double bulk = 0.0;
    for_each_bulk_point(model, state, data,
                        [&](const QuadPoint &q, const std::array<int, 4> &, int, double gq,
                            double dyq) { bulk += q.weight * dyq * dyq * (1.0 + gq); });
    cost += 0.5 * data.mu * bulk;
  }
  return cost;
}

AdjointPair solve_adjoint(const StateModel &model, const StateSolution &solution,
                          const Vector &rhs) {
  if (!solution.jacobian)
    throw std::invalid_argument("solve_adjoint: state solution carries no Jacobian factorization");
  const FreeDofs &d = model.dofs();
  const Vector w = solution.jacobian->solve(rhs, Transpose::yes);
  BoundaryField S(model.disc().trace, d.trace_select * w.head(d.num_trace()), TraceKind::zero);
  // w is the adjoint of the local-lift system; its bulk part is R minus the
  // local extension of S.
  const Vector r = d.bulk_select * w.tail(d.num_bulk()) + model.local_lift() * S.values();
  BulkField R0(model.disc().bulk, r - model.lift() * S.values(), TraceKind::zero);
  BulkField R(model.disc().bulk, r, TraceKind::free);
  return {std::move(S), std::move(R0), std::move(R), w};
}

} // namespace fbc
