#include "fbc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "fbc/control.hpp"
#include "fbc/experiment.hpp"
#include "fbc/geometry.hpp"

namespace fbc {

namespace {

std::string fmt(const char *f, double a, double b = 0.0) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

CheckResult check_mesh(int max_level) {
  for (int l = 0; l < max_level; ++l) {
    const auto c = make_discretization(l);
    const auto f = make_discretization(l + 1);
    for (int j = 0; j <= c->n(); ++j)
      for (int i = 0; i <= c->n(); ++i) {
        const Point p = c->bulk->node(c->bulk->node_index(i, j));
        const Point q = f->bulk->node(f->bulk->node_index(2 * i, 2 * j));
        if (p.x1 != q.x1 || p.x2 != q.x2)
          return {"mesh nesting", false, "node mismatch at level " + std::to_string(l)};
      }
    for (int i = 0; i < c->trace->num_nodes(); ++i) {
      const Point p = c->bulk->node(c->trace->parent(i));
      if (p.x1 != c->trace->node(i) || p.x2 != 1.0)
        return {"mesh nesting", false, "trace parent mismatch"};
    }
  }
  return {"mesh nesting", true, "levels 0.." + std::to_string(max_level)};
}

CheckResult check_det() {
  double worst = 0.0;
  for (int a = 0; a < 10; ++a)
    for (int b = 0; b < 10; ++b)
      for (int c = 0; c < 10; ++c) {
        const double g = -0.5 + a / 9.0, dg = -1.0 + 2.0 * b / 9.0, x2 = c / 9.0;
        worst = std::max(worst, std::abs(eval_A(g, dg, x2).determinant() - 1.0));
      }
  return {"det A = 1", worst <= 1e-12, fmt("max |det - 1| = %.3e", worst)};
}

BoundaryField random_control(const std::shared_ptr<const TraceMesh> &mesh, std::mt19937_64 &rng,
                             double scale) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vector u = Vector::Zero(mesh->num_nodes());
  for (int i = 1; i + 1 < mesh->num_nodes(); ++i)
    u[i] = scale * n(rng);
  return BoundaryField(mesh, u, TraceKind::zero);
}

CheckResult check_jacobian(const Problem &p, std::mt19937_64 &rng) {
  const StateModel &m = *p.model;
  const auto U = random_control(m.disc().trace, rng, 0.2);
  const StateSolution sol = solve_newton(m, U);
  const Vector x = m.pack(sol.state);
  const SparseMatrix J = jacobian(m, sol.state).matrix;
  std::normal_distribution<double> n(0.0, 1.0);
  Vector d(x.size());
  for (auto &v : d)
    v = n(rng);
  const double eps = 1e-6;
  const Vector fd = (residual(m, m.unpack(x + eps * d), U) - residual(m, m.unpack(x - eps * d), U)) /
                    (2 * eps);
  const Vector jd = J * d;
  const double rel = (fd - jd).norm() / std::max(1e-30, jd.norm());
  return {"Jacobian vs central differences", rel <= 1e-6, fmt("relative mismatch %.3e", rel)};
}

CheckResult check_duality(const Problem &p, std::mt19937_64 &rng) {
  const StateModel &m = *p.model;
  const StateSolution sol = solve_newton(m, random_control(m.disc().trace, rng, 0.2));
  std::normal_distribution<double> n(0.0, 1.0);
  Vector a(m.dofs().size()), b(m.dofs().size());
  for (auto &v : a)
    v = n(rng);
  for (auto &v : b)
    v = n(rng);
  const Vector x = sol.jacobian->solve(a);
  const Vector w = sol.jacobian->solve(b, Transpose::yes);
  const double gap = std::abs(b.dot(x) - w.dot(a)) / std::max(1.0, std::abs(b.dot(x)));
  return {"transpose duality", gap <= 1e-10, fmt("relative gap %.3e", gap)};
}

CheckResult check_newton_picard(const Problem &p, std::mt19937_64 &rng) {
  const StateModel &m = *p.model;
  const auto U = random_control(m.disc().trace, rng, 0.1);
  const StateSolution a = solve_newton(m, U);
  const StateSolution b = solve_picard(m, U);
  const double d = std::max((a.state.G.values() - b.state.G.values()).lpNorm<Eigen::Infinity>(),
                            (a.state.Y.values() - b.state.Y.values()).lpNorm<Eigen::Infinity>());
  return {"Newton vs Picard", d <= 1e-10, fmt("max nodal difference %.3e", d)};
}

CheckResult check_gradient(const Problem &p, std::mt19937_64 &rng) {
  ReducedFunctional f(p.model, p.data, 1e-3);
  const auto mesh = p.model->disc().trace;
  const auto U = random_control(mesh, rng, 0.2);
  const auto h = random_control(mesh, rng, 1.0);
  const double g = l2_dot(f.mass(), f.gradient(U).values(), h.values());
  double best = std::numeric_limits<double>::infinity();
  for (double eps : {1e-2, 1e-3, 1e-4, 1e-5}) {
    const double fd = (f.cost(BoundaryField(mesh, U.values() + eps * h.values())) -
                       f.cost(BoundaryField(mesh, U.values() - eps * h.values()))) /
                      (2 * eps);
    best = std::min(best, std::abs(fd - g) / std::max(1e-30, std::abs(g)));
  }
  return {"gradient vs central differences", best <= 1e-6, fmt("best relative mismatch %.3e", best)};
}

CheckResult check_projection(const Problem &p, std::mt19937_64 &rng) {
  const auto mesh = p.model->disc().trace;
  const SparseMatrix &M = p.model->mass();
  const double r = 0.9;
  for (int k = 0; k < 50; ++k) {
    const auto a = random_control(mesh, rng, 2.0), b = random_control(mesh, rng, 2.0);
    const auto pa = project_ball(a, r, M), pb = project_ball(b, r, M);
    if (l2_norm(M, pa.values() - pb.values()) > l2_norm(M, a.values() - b.values()) + 1e-14)
      return {"projection", false, "not non-expansive"};
    if ((project_ball(pa, r, M).values() - pa.values()).lpNorm<Eigen::Infinity>() > 1e-15)
      return {"projection", false, "not idempotent"};
    if (l2_norm(M, pa.values()) > r * (1 + 1e-14))
      return {"projection", false, "leaves the ball"};
  }
  return {"projection", true, "non-expansive, idempotent, feasible on 50 pairs"};
}

} // namespace

std::vector<CheckResult> run_invariant_suite(std::uint64_t seed, int max_level) {
  std::mt19937_64 rng(seed);
  std::vector<CheckResult> out;
  out.push_back(check_mesh(max_level));
  out.push_back(check_det());
  ExperimentSpec spec;
  for (int level = 1; level <= max_level; ++level) {
    const Problem p = make_problem(spec, make_discretization(level));
    const std::string tag = " (level " + std::to_string(level) + ")";
    for (auto check : {check_jacobian, check_duality, check_newton_picard, check_gradient,
                       check_projection}) {
      CheckResult r;
      try {
        r = check(p, rng);
      } catch (const std::exception &e) {
        r = {"", false, e.what()};
      }
      r.name += tag;
      out.push_back(std::move(r));
    }
  }
  return out;
}

} // namespace fbc
