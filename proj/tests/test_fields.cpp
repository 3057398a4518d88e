#include <gtest/gtest.h>

#include <cmath>

#include "fbc/errors.hpp"
#include "fbc/fields.hpp"

namespace fbc {
namespace {

TEST(BoundaryField, ZeroKindRejectsNonzeroEndpoints) {
  auto d = make_discretization(1);
  Vector v = Vector::Zero(d->trace->num_nodes());
  v[0] = 1e-3;
  EXPECT_THROW(BoundaryField(d->trace, v, TraceKind::zero), std::invalid_argument);
  EXPECT_NO_THROW(BoundaryField(d->trace, v, TraceKind::free));
  EXPECT_THROW(BoundaryField(d->trace, Vector::Zero(3)), DimensionError);
}

TEST(BoundaryField, EvaluationAndSlopes) {
  auto d = make_discretization(1);
  const auto f = BoundaryField::interpolate(d->trace, [](double x) { return 2.0 * x - 1.0; });
  EXPECT_NEAR(f(0.3), -0.4, 1e-15);
  EXPECT_NEAR(f(1.0), 1.0, 1e-15);
  for (int i = 0; i < d->trace->num_intervals(); ++i)
    EXPECT_NEAR(f.slope(i), 2.0, 1e-14);
  EXPECT_NEAR(f.max_abs_slope(), 2.0, 1e-14);
}

TEST(BoundaryField, InterpolateZeroKindNeedsVanishingEnds) {
  auto d = make_discretization(1);
  EXPECT_THROW(BoundaryField::interpolate(d->trace, [](double) { return 1.0; }, TraceKind::zero),
               std::invalid_argument);
  const auto s = BoundaryField::interpolate(
      d->trace, [](double x) { return std::sin(M_PI * x); }, TraceKind::zero);
  EXPECT_EQ(s.values()[0], 0.0);
  EXPECT_EQ(s.values()[s.size() - 1], 0.0);
}

TEST(BulkField, BilinearEvaluationIsExact) {
  auto d = make_discretization(1);
  auto fn = [](double x, double y) { return 1.0 + x - 2.0 * y + 3.0 * x * y; };
  const auto f = BulkField::interpolate(d->bulk, fn);
  for (double x : {0.0, 0.13, 0.5, 0.99, 1.0})
    for (double y : {0.0, 0.4, 0.77, 1.0})
      EXPECT_NEAR(f(x, y), fn(x, y), 1e-14);
}

TEST(BulkField, TopTraceReadsGammaRow) {
  auto d = make_discretization(1);
  const auto f = BulkField::interpolate(d->bulk, [](double x, double y) { return x * y; });
  const Vector top = f.top_trace();
  ASSERT_EQ(top.size(), d->trace->num_nodes());
  for (int i = 0; i < top.size(); ++i)
    EXPECT_NEAR(top[i], d->trace->node(i), 1e-15);
}

TEST(BulkField, ProlongedKeepsValues) {
  auto c = make_discretization(1), f = make_discretization(2);
  auto fn = [](double x, double y) { return x * (1 - x) * y * (1 - y); };
  const auto u = BulkField::interpolate(c->bulk, fn, TraceKind::zero);
  const auto v = u.prolonged(f->bulk);
  EXPECT_EQ(v.kind(), TraceKind::zero);
  for (double x : {0.1, 0.35, 0.8})
    for (double y : {0.2, 0.6})
      EXPECT_NEAR(u(x, y), v(x, y), 1e-15);
  EXPECT_THROW(u.prolonged(make_discretization(3)->bulk), DimensionError);
}

} // namespace
} // namespace fbc
