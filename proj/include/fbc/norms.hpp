#pragma once

#include <array>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fbc/fields.hpp"
#include "fbc/mesh.hpp"

namespace fbc {

/// W1inf and W11 are the seminorms ||f'||_Linf and ||f'||_L1; on zero-trace
/// fields they are norms.
enum class TraceNorm { L2, L1, W1inf, W11 };

/// W1p is the seminorm (int |grad f|^p)^(1/p) under the 2x2 Gauss rule.
enum class BulkNorm { L2, W1p };

double norm_trace(const BoundaryField &field, TraceNorm kind);
double norm_bulk(const BulkField &field, BulkNorm kind, double p = 2.1);

/// Optimal control triple plus adjoint on one discretization.
struct SolutionBundle {
  std::shared_ptr<const Discretization> disc;
  BoundaryField G;
  BulkField Y;
  BoundaryField S;
  BulkField R;
  BoundaryField U;
};

struct ErrorRow {
  double e_gamma_w1inf = 0.0;
  double e_y_w1p = 0.0;
  double e_s_w11 = 0.0;
  double e_r_w1q = 0.0;
  double e_u_l2 = 0.0;
};

/// Prolongs `coarse` onto the reference mesh and measures the difference:
/// G in W1inf, Y in W1p, S in W11, R in W1q with q = p/(p-1), U in L2.
/// Throws DimensionError unless the reference mesh is a strict uniform
/// refinement of the coarse one.
ErrorRow error_vs_reference(const SolutionBundle &coarse, const SolutionBundle &reference,
                            double p = 2.1);

inline constexpr int kNumErrorColumns = 5;

struct RateRow {
  int example = 0;
  double lambda = 0.0;
  double radius = 0.0;
  double mu = 0.0;
  int level = 0;
  double h = 0.0;
  long dofs = 0;
  std::array<double, kNumErrorColumns> errors{}; ///< gamma, y, s, r, u
  double cost = 0.0;
  double control_norm = 0.0;
  std::array<std::optional<double>, kNumErrorColumns> slopes{}; ///< vs the previous row
};

struct RateTable {
  std::vector<RateRow> rows;
};

/// log(e_coarse / e_fine) / log(h_coarse / h_fine); nullopt unless both errors
/// are positive and finite.
std::optional<double> rate_slope(double e_coarse, double e_fine, double h_coarse, double h_fine);

/// Least-squares slope of log e against log h; nullopt if any error is not
/// positive or fewer than two points are given.
std::optional<double> fitted_slope(std::span<const double> h, std::span<const double> e);

/// Fills slope columns between consecutive rows of the same configuration
/// (example, lambda, radius, mu). Rows are ordered by configuration, then level.
RateTable compute_slopes(RateTable table);

extern const std::array<const char *, 19> kRateTableColumns;

void write_csv(const RateTable &table, std::ostream &out);
RateTable read_csv(std::istream &in);

/// Fixed-precision text for doubles: "%.17g", with inf/nan spelled out.
std::string format_double(double v);

} // namespace fbc
