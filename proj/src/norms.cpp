#include "fbc/norms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <tuple>

#include "fbc/assembly.hpp"
#include "fbc/errors.hpp"

namespace fbc {

double norm_trace(const BoundaryField &field, TraceNorm kind) {
  const TraceMesh &mesh = field.mesh();
  const Vector &v = field.values();
  double acc = 0.0;
  for (int k = 0; k < mesh.num_intervals(); ++k) {
    const double h = mesh.interval_length(k);
    const double a = v[k], b = v[k + 1];
    switch (kind) {
    case TraceNorm::L2:
      acc += h * (a * a + a * b + b * b) / 3.0;
      break;
    case TraceNorm::L1:
      if (a * b >= 0.0)
        acc += 0.5 * h * (std::abs(a) + std::abs(b));
      else
        acc += 0.5 * h * (a * a + b * b) / (std::abs(a) + std::abs(b));
      break;
    case TraceNorm::W1inf:
      acc = std::max(acc, std::abs(b - a) / h);
      break;
    case TraceNorm::W11:
      acc += std::abs(b - a);
      break;
    }
  }
  return kind == TraceNorm::L2 ? std::sqrt(acc) : acc;
}

double norm_bulk(const BulkField &field, BulkNorm kind, double p) {
  if (kind == BulkNorm::W1p && !(p > 1.0 && std::isfinite(p)))
    throw std::invalid_argument("norm_bulk: p must lie in (1, inf)");
  const BulkMesh &mesh = field.mesh();
  const Vector &v = field.values();
  double acc = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto nodes = mesh.cell(c);
    for (const QuadPoint &q : cell_quadrature(mesh, c)) {
      if (kind == BulkNorm::L2) {
        double f = 0.0;
        for (int a = 0; a < 4; ++a)
          f += q.phi[a] * v[nodes[a]];
        acc += q.weight * f * f;
      } else {
        Eigen::Vector2d g = Eigen::Vector2d::Zero();
        for (int a = 0; a < 4; ++a)
          g += v[nodes[a]] * q.grad[a];
        acc += q.weight * std::pow(g.norm(), p);
      }
    }
  }
  return kind == BulkNorm::L2 ? std::sqrt(acc) : std::pow(acc, 1.0 / p);
}

namespace {

template <class Field, class MeshPtr> Field lift_to(Field f, const std::vector<MeshPtr> &chain) {
  for (const auto &m : chain)
    f = f.prolonged(m);
  return f;
}

} // namespace

ErrorRow error_vs_reference(const SolutionBundle &coarse, const SolutionBundle &reference,
                            double p) {
  const Discretization &dc = *coarse.disc;
  const Discretization &dr = *reference.disc;
  if (dc.n_base != dr.n_base || dc.level >= dr.level)
    throw DimensionError("error_vs_reference: reference level " + std::to_string(dr.level) +
                         " is not a strict refinement of level " + std::to_string(dc.level));
  if (dr.n() != (dc.n() << (dr.level - dc.level)))
    throw DimensionError("error_vs_reference: meshes are not nested");

  std::vector<std::shared_ptr<const BulkMesh>> bulk_chain;
  std::vector<std::shared_ptr<const TraceMesh>> trace_chain;
  for (int l = dc.level + 1; l < dr.level; ++l) {
    auto d = make_discretization(l, dc.n_base);
    bulk_chain.push_back(d->bulk);
    trace_chain.push_back(d->trace);
  }
  bulk_chain.push_back(dr.bulk);
  trace_chain.push_back(dr.trace);

  auto diff_trace = [&](const BoundaryField &c, const BoundaryField &r) {
    const BoundaryField f = lift_to(c, trace_chain);
    return BoundaryField(dr.trace, r.values() - f.values());
  };
  auto diff_bulk = [&](const BulkField &c, const BulkField &r) {
    const BulkField f = lift_to(c, bulk_chain);
    return BulkField(dr.bulk, r.values() - f.values());
  };

  const double q = p / (p - 1.0);
  ErrorRow e;
  e.e_gamma_w1inf = norm_trace(diff_trace(coarse.G, reference.G), TraceNorm::W1inf);
  e.e_y_w1p = norm_bulk(diff_bulk(coarse.Y, reference.Y), BulkNorm::W1p, p);
  e.e_s_w11 = norm_trace(diff_trace(coarse.S, reference.S), TraceNorm::W11);
  e.e_r_w1q = norm_bulk(diff_bulk(coarse.R, reference.R), BulkNorm::W1p, q);
  e.e_u_l2 = norm_trace(diff_trace(coarse.U, reference.U), TraceNorm::L2);
  return e;
}

std::optional<double> rate_slope(double e_coarse, double e_fine, double h_coarse,
                                 double h_fine) {
  if (!(e_coarse > 0.0 && e_fine > 0.0 && std::isfinite(e_coarse) && std::isfinite(e_fine)))
    return std::nullopt;
  if (!(h_coarse > 0.0 && h_fine > 0.0) || h_coarse == h_fine)
    return std::nullopt;
  return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

std::optional<double> fitted_slope(std::span<const double> h, std::span<const double> e) {
  if (h.size() != e.size() || h.size() < 2)
    return std::nullopt;
  const std::size_t n = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(e[i] > 0.0 && std::isfinite(e[i]) && h[i] > 0.0))
      return std::nullopt;
    const double x = std::log(h[i]), y = std::log(e[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0)
    return std::nullopt;
  return (n * sxy - sx * sy) / den;
}

RateTable compute_slopes(RateTable table) {
  auto key = [](const RateRow &r) { return std::make_tuple(r.example, r.lambda, r.radius, r.mu); };
  std::stable_sort(table.rows.begin(), table.rows.end(), [&](const RateRow &a, const RateRow &b) {
    if (key(a) != key(b)) {
      // descending lambda within an example reads like the usual sweep tables
      if (a.example != b.example)
        return a.example < b.example;
      if (a.lambda != b.lambda)
        return a.lambda > b.lambda;
      return key(a) < key(b);
    }
    return a.level < b.level;
  });
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    RateRow &row = table.rows[i];
    row.slopes.fill(std::nullopt);
    if (i == 0 || key(table.rows[i - 1]) != key(row))
      continue;
    const RateRow &prev = table.rows[i - 1];
    for (int c = 0; c < kNumErrorColumns; ++c)
      row.slopes[c] = rate_slope(prev.errors[c], row.errors[c], prev.h, row.h);
  }
  return table;
}

const std::array<const char *, 19> kRateTableColumns = {
    "example",     "lambda",      "radius",        "mu",           "level",
    "h",           "dofs",        "e_gamma_w1inf", "e_y_w1p",      "e_s_w11",
    "e_r_w1q",     "e_u_l2",      "cost",          "control_norm", "slope_gamma",
    "slope_y",     "slope_s",     "slope_r",       "slope_u"};

std::string format_double(double v) {
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

double parse_double(const std::string &s) {
  if (s == "inf")
    return std::numeric_limits<double>::infinity();
  if (s == "-inf")
    return -std::numeric_limits<double>::infinity();
  if (s == "nan")
    return std::numeric_limits<double>::quiet_NaN();
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size())
    throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

} // namespace

void write_csv(const RateTable &table, std::ostream &out) {
  for (std::size_t i = 0; i < kRateTableColumns.size(); ++i)
    out << (i ? "," : "") << kRateTableColumns[i];
  out << '\n';
  for (const RateRow &r : table.rows) {
    out << r.example << ',' << format_double(r.lambda) << ',' << format_double(r.radius) << ','
        << format_double(r.mu) << ',' << r.level << ',' << format_double(r.h) << ',' << r.dofs;
    for (double e : r.errors)
      out << ',' << format_double(e);
    out << ',' << format_double(r.cost) << ',' << format_double(r.control_norm);
    for (const auto &s : r.slopes)
      out << ',' << (s ? format_double(*s) : std::string("undef"));
    out << '\n';
  }
}

RateTable read_csv(std::istream &in) {
  RateTable table;
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("read_csv: empty input");
  {
    std::stringstream header(line);
    std::string cell;
    std::size_t i = 0;
    while (std::getline(header, cell, ',')) {
      if (i >= kRateTableColumns.size() || cell != kRateTableColumns[i])
        throw std::invalid_argument("read_csv: unexpected column '" + cell + "'");
      ++i;
    }
    if (i != kRateTableColumns.size())
      throw std::invalid_argument("read_csv: missing columns");
  }
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty())
      continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
      cells.push_back(cell);
    if (cells.size() != kRateTableColumns.size())
      throw std::invalid_argument("read_csv: line " + std::to_string(line_no) + " has " +
                                  std::to_string(cells.size()) + " fields");
    RateRow r;
    r.example = std::stoi(cells[0]);
    r.lambda = parse_double(cells[1]);
    r.radius = parse_double(cells[2]);
    r.mu = parse_double(cells[3]);
    r.level = std::stoi(cells[4]);
    r.h = parse_double(cells[5]);
    r.dofs = std::stol(cells[6]);
    for (int c = 0; c < kNumErrorColumns; ++c)
      r.errors[c] = parse_double(cells[7 + c]);
    r.cost = parse_double(cells[12]);
    r.control_norm = parse_double(cells[13]);
    for (int c = 0; c < kNumErrorColumns; ++c)
      if (cells[14 + c] != "undef")
        r.slopes[c] = parse_double(cells[14 + c]);
    table.rows.push_back(r);
  }
  return table;
}

} // namespace fbc
