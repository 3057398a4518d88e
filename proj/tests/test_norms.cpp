#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "fbc/errors.hpp"
#include "fbc/norms.hpp"

namespace fbc {
namespace {

TEST(Norms, TraceExamples) {
  auto d = make_discretization(2);
  const auto x = BoundaryField::interpolate(d->trace, [](double t) { return t; });
  EXPECT_NEAR(norm_trace(x, TraceNorm::W1inf), 1.0, 1e-14);
  EXPECT_NEAR(norm_trace(x, TraceNorm::W11), 1.0, 1e-14);
  EXPECT_NEAR(norm_trace(x, TraceNorm::L2), std::sqrt(1.0 / 3.0), 1e-14);
  EXPECT_NEAR(norm_trace(x, TraceNorm::L1), 0.5, 1e-14);

  Vector hat = Vector::Zero(d->trace->num_nodes());
  hat[3] = 1.0;
  const BoundaryField h(d->trace, hat, TraceKind::zero);
  EXPECT_NEAR(norm_trace(h, TraceNorm::W1inf), 1.0 / d->h(), 1e-12);
  EXPECT_NEAR(norm_trace(h, TraceNorm::W11), 2.0, 1e-14);
  EXPECT_NEAR(norm_trace(h, TraceNorm::L1), d->h(), 1e-15);

  const auto z = BoundaryField::zero(d->trace);
  for (auto k : {TraceNorm::L2, TraceNorm::L1, TraceNorm::W1inf, TraceNorm::W11})
    EXPECT_EQ(norm_trace(z, k), 0.0);
}

TEST(Norms, TraceL1HandlesSignChange) {
  auto d = make_discretization(0);
  // 2x - 1 on nodes 0, 0.5, 1: integral of |2x - 1| is 1/2
  const auto f = BoundaryField::interpolate(d->trace, [](double t) { return 2 * t - 1; });
  EXPECT_NEAR(norm_trace(f, TraceNorm::L1), 0.5, 1e-15);
  Vector v(3);
  v << 1.0, -1.0, 0.0;
  // first interval crosses zero at 0.25: area 2 * (0.25 / 2), second 0.25
  EXPECT_NEAR(norm_trace(BoundaryField(d->trace, v), TraceNorm::L1), 0.5, 1e-15);
}

TEST(Norms, BulkExamples) {
  auto d = make_discretization(2);
  const auto x1 = BulkField::interpolate(d->bulk, [](double a, double) { return a; });
  for (double p : {1.5, 2.0, 2.1, 4.0})
    EXPECT_NEAR(norm_bulk(x1, BulkNorm::W1p, p), 1.0, 1e-13);
  const auto s = BulkField::interpolate(d->bulk, [](double a, double b) { return a + b; });
  EXPECT_NEAR(norm_bulk(s, BulkNorm::W1p, 2.0), std::sqrt(2.0), 1e-13);
  EXPECT_NEAR(norm_bulk(x1, BulkNorm::L2, 2.0), std::sqrt(1.0 / 3.0), 1e-14);
  EXPECT_EQ(norm_bulk(BulkField::zero(d->bulk), BulkNorm::W1p, 2.1), 0.0);
  EXPECT_THROW(norm_bulk(x1, BulkNorm::W1p, 1.0), std::invalid_argument);
}

TEST(Norms, BulkW12MatchesStiffnessQuadratic) {
  auto d = make_discretization(1);
  const auto f = BulkField::interpolate(d->bulk, [](double a, double b) { return a * a * b; });
  // Q1 gradient of the nodal interpolant, integrated exactly by 2x2 Gauss
  double acc = 0.0;
  const BulkMesh &m = *d->bulk;
  const double h = m.h();
  for (int c = 0; c < m.num_cells(); ++c) {
    const auto v = m.cell(c);
    const double f0 = f.values()[v[0]], f1 = f.values()[v[1]], f2 = f.values()[v[2]],
                 f3 = f.values()[v[3]];
    // d/dx is linear in y, d/dy linear in x; integrate squares exactly
    const double ax = (f1 - f0) / h, bx = (f2 - f3) / h;
    const double ay = (f3 - f0) / h, by = (f2 - f1) / h;
    acc += h * h * ((ax * ax + ax * bx + bx * bx) + (ay * ay + ay * by + by * by)) / 3.0;
  }
  EXPECT_NEAR(norm_bulk(f, BulkNorm::W1p, 2.0), std::sqrt(acc), 1e-14);
}

SolutionBundle bundle(const std::shared_ptr<const Discretization> &d,
                      const std::function<double(double)> &g) {
  return {d,
          BoundaryField::interpolate(d->trace, g, TraceKind::zero),
          BulkField::interpolate(d->bulk, [&](double a, double b) { return g(a) * b; }),
          BoundaryField::interpolate(d->trace, g, TraceKind::zero),
          BulkField::interpolate(d->bulk, [&](double a, double b) { return g(a) * b * b; }),
          BoundaryField::interpolate(d->trace, g, TraceKind::zero)};
}

TEST(Norms, ErrorAgainstItselfIsZero) {
  auto c = make_discretization(1);
  auto f = make_discretization(3);
  auto g = [](double x) { return x * (1 - x) * (0.5 + x); };
  const auto cb = bundle(c, g);
  // the coarse functions prolonged exactly are the same functions on the fine mesh
  SolutionBundle same{f,
                      cb.G.prolonged(make_discretization(2)->trace).prolonged(f->trace),
                      cb.Y.prolonged(make_discretization(2)->bulk).prolonged(f->bulk),
                      cb.S.prolonged(make_discretization(2)->trace).prolonged(f->trace),
                      cb.R.prolonged(make_discretization(2)->bulk).prolonged(f->bulk),
                      cb.U.prolonged(make_discretization(2)->trace).prolonged(f->trace)};
  const ErrorRow e = error_vs_reference(cb, same);
  EXPECT_LE(e.e_gamma_w1inf, 1e-14);
  EXPECT_LE(e.e_y_w1p, 1e-14);
  EXPECT_LE(e.e_s_w11, 1e-14);
  EXPECT_LE(e.e_r_w1q, 1e-14);
  EXPECT_LE(e.e_u_l2, 1e-15);
}

TEST(Norms, InterpolationErrorDecaysLinearlyInW1inf) {
  auto ref = make_discretization(7);
  auto g = [](double x) { return x * (1 - x); };
  const auto rb = bundle(ref, g);
  std::vector<double> hs, es, us, exact;
  for (int l = 1; l <= 4; ++l) {
    auto d = make_discretization(l);
    const ErrorRow e = error_vs_reference(bundle(d, g), rb);
    hs.push_back(d->h());
    es.push_back(e.e_gamma_w1inf);
    us.push_back(e.e_u_l2);
    // secant slope misses g' by h/2 per interval, less the reference's own h_ref/2
    EXPECT_NEAR(e.e_gamma_w1inf, d->h() - ref->h(), 1e-10);
    exact.push_back(d->h() - ref->h());
  }
  // h - h_ref bends the log-log line slightly above 1
  EXPECT_NEAR(*fitted_slope(hs, es), *fitted_slope(hs, exact), 1e-8);
  EXPECT_NEAR(*fitted_slope(hs, es), 1.0, 0.06);
  EXPECT_NEAR(*fitted_slope(hs, us), 2.0, 0.05);
}

TEST(Norms, NonNestedReferenceRejected) {
  auto a = make_discretization(2);
  auto b = make_discretization(2, 3);
  auto g = [](double x) { return x * (1 - x); };
  EXPECT_THROW(error_vs_reference(bundle(a, g), bundle(b, g)), DimensionError);
  EXPECT_THROW(error_vs_reference(bundle(a, g), bundle(a, g)), DimensionError);
}

TEST(Rates, SlopeExamples) {
  EXPECT_NEAR(*rate_slope(0.4, 0.2, 0.5, 0.25), 1.0, 1e-15);
  EXPECT_NEAR(*rate_slope(0.4, 0.1, 0.5, 0.25), 2.0, 1e-15);
  EXPECT_FALSE(rate_slope(0.4, 0.0, 0.5, 0.25));
  EXPECT_FALSE(rate_slope(-1.0, 0.1, 0.5, 0.25));
  EXPECT_FALSE(rate_slope(std::nan(""), 0.1, 0.5, 0.25));
  const std::vector<double> h{0.5, 0.25, 0.125}, e{0.4, 0.2, 0.1};
  EXPECT_NEAR(*fitted_slope(h, e), 1.0, 1e-14);
  EXPECT_FALSE(fitted_slope(std::vector<double>{0.5}, std::vector<double>{0.1}));
}

RateTable sample_table() {
  RateTable t;
  const double errs[3] = {0.4, 0.2, 0.1};
  for (int l = 3; l >= 1; --l) {
    RateRow r;
    r.example = 1;
    r.lambda = 1e-3;
    r.radius = 0.9;
    r.level = l;
    r.h = 0.5 / (1 << l);
    r.dofs = l * 10;
    r.errors = {errs[l - 1], errs[l - 1], errs[l - 1] * errs[l - 1], 0.0, errs[l - 1]};
    r.cost = 1.5e-4;
    r.control_norm = 0.135;
    t.rows.push_back(r);
  }
  return t;
}

TEST(Rates, ComputeSlopesPerConfiguration) {
  RateTable t = sample_table();
  RateRow other = t.rows[0];
  other.lambda = 1e-2;
  t.rows.push_back(other);
  const RateTable s = compute_slopes(t);
  ASSERT_EQ(s.rows.size(), 4u);
  // the lambda = 1e-2 group sorts first and has a single row
  EXPECT_EQ(s.rows[0].lambda, 1e-2);
  EXPECT_FALSE(s.rows[0].slopes[0]);
  EXPECT_EQ(s.rows[1].level, 1);
  EXPECT_FALSE(s.rows[1].slopes[0]);
  EXPECT_NEAR(*s.rows[2].slopes[0], 1.0, 1e-14);
  EXPECT_NEAR(*s.rows[3].slopes[2], 2.0, 1e-14);
  EXPECT_FALSE(s.rows[3].slopes[3]);
}

TEST(Rates, CsvRoundTrip) {
  RateTable t = compute_slopes(sample_table());
  t.rows[0].radius = std::numeric_limits<double>::infinity();
  std::stringstream ss;
  write_csv(t, ss);
  const std::string text = ss.str();
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "example,lambda,radius,mu,level,h,dofs,e_gamma_w1inf,e_y_w1p,e_s_w11,e_r_w1q,e_u_l2,"
            "cost,control_norm,slope_gamma,slope_y,slope_s,slope_r,slope_u");
  const RateTable back = read_csv(ss);
  ASSERT_EQ(back.rows.size(), t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    EXPECT_EQ(back.rows[i].errors, t.rows[i].errors);
    EXPECT_EQ(back.rows[i].radius, t.rows[i].radius);
    EXPECT_EQ(back.rows[i].h, t.rows[i].h);
    for (int c = 0; c < kNumErrorColumns; ++c)
      EXPECT_EQ(back.rows[i].slopes[c], t.rows[i].slopes[c]);
  }
  std::stringstream again;
  write_csv(back, again);
  EXPECT_EQ(again.str(), text);
}

TEST(Rates, CsvRejectsWrongHeader) {
  std::stringstream ss("example,lambda\n1,2\n");
  EXPECT_THROW(read_csv(ss), std::invalid_argument);
}

} // namespace
} // namespace fbc
