#include "fbc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "fbc/errors.hpp"

namespace fbc {

using nlohmann::json;

double ExperimentSpec::effective_radius() const {
  if (radius)
    return *radius;
  return example == 1 ? 0.9 : kUnbounded;
}

void validate(const ExperimentSpec &spec) {
  auto fail = [](const std::string &msg) { throw std::invalid_argument("experiment: " + msg); };
  if (spec.example < 0 || spec.example > 3)
    fail("unknown example id " + std::to_string(spec.example));
  if (spec.example == 0 && spec.gamma_d_file.empty())
    fail("a custom example needs gamma_d_file");
  if (spec.example == 3 && !(spec.hat_depth >= 0.0 && spec.hat_depth < 1.0))
    fail("hat_depth must lie in [0, 1)");
  if (spec.v != "default" && spec.v != "zero")
    fail("v must be 'default' or 'zero'");
  if (!(spec.kappa > 0.0 && std::isfinite(spec.kappa)))
    fail("kappa must be positive");
  for (double l : spec.lambdas)
    if (!(l > 0.0 && std::isfinite(l)))
      fail("lambda values must be positive");
  if (!(spec.effective_radius() > 0.0))
    fail("radius must be positive");
  if (!(spec.mu >= 0.0 && std::isfinite(spec.mu)))
    fail("mu must be nonnegative");
  if (spec.n_base < 1)
    fail("n_base must be positive");
  if (spec.ref_level < 1 || spec.ref_level > 10)
    fail("ref_level must lie in [1, 10]");
  for (int l : spec.levels)
    if (l < 0 || l >= spec.ref_level)
      fail("levels must lie in [0, ref_level)");
  if (spec.workers < 0)
    fail("workers must be nonnegative");
  if (spec.vi_samples < 0)
    fail("vi_samples must be nonnegative");
  if (!(spec.grad_tol > 0.0))
    fail("grad_tol must be positive");
}

namespace {

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string &s) {
  if (s == "inf")
    return std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size())
    throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

long to_long(const std::string &s) {
  std::size_t pos = 0;
  const long v = std::stol(s, &pos);
  if (pos != s.size())
    throw std::invalid_argument("not an integer: '" + s + "'");
  return v;
}

bool to_bool(const std::string &s) {
  if (s == "true" || s == "1")
    return true;
  if (s == "false" || s == "0")
    return false;
  throw std::invalid_argument("not a boolean: '" + s + "'");
}

template <class T, class F> std::vector<T> to_list(const std::string &s, F conv) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!trim(item).empty())
      out.push_back(static_cast<T>(conv(trim(item))));
  return out;
}

} // namespace

ExperimentSpec parse_config(std::istream &in) {
  ExperimentSpec spec;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "example")
        spec.example = static_cast<int>(to_long(value));
      else if (key == "gamma_d_file")
        spec.gamma_d_file = value;
      else if (key == "hat_depth")
        spec.hat_depth = to_double(value);
      else if (key == "v")
        spec.v = value;
      else if (key == "kappa")
        spec.kappa = to_double(value);
      else if (key == "lambda")
        spec.lambdas = to_list<double>(value, to_double);
      else if (key == "radius")
        spec.radius = to_double(value);
      else if (key == "levels")
        spec.levels = to_list<int>(value, to_long);
      else if (key == "ref_level")
        spec.ref_level = static_cast<int>(to_long(value));
      else if (key == "mu")
        spec.mu = to_double(value);
      else if (key == "n_base")
        spec.n_base = static_cast<int>(to_long(value));
      else if (key == "out")
        spec.out_dir = value;
      else if (key == "seed")
        spec.seed = static_cast<std::uint64_t>(to_long(value));
      else if (key == "workers")
        spec.workers = static_cast<int>(to_long(value));
      else if (key == "hessian")
        spec.hessian = to_bool(value);
      else if (key == "vi_samples")
        spec.vi_samples = static_cast<int>(to_long(value));
      else if (key == "grad_tol")
        spec.grad_tol = to_double(value);
      else if (key == "snapshots")
        spec.snapshots = to_bool(value);
      else
        throw std::invalid_argument("unknown key '" + key + "'");
    } catch (const std::logic_error &e) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return spec;
}

ExperimentSpec load_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open config " + path.string());
  return parse_config(in);
}

void write_config(const ExperimentSpec &spec, std::ostream &out) {
  auto join = [](const auto &xs, auto fmt) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i)
      s += (i ? "," : "") + fmt(xs[i]);
    return s;
  };
  out << "example = " << spec.example << '\n';
  if (!spec.gamma_d_file.empty())
    out << "gamma_d_file = " << spec.gamma_d_file << '\n';
  out << "hat_depth = " << format_double(spec.hat_depth) << '\n'
      << "v = " << spec.v << '\n'
      << "kappa = " << format_double(spec.kappa) << '\n'
      << "lambda = " << join(spec.lambdas, format_double) << '\n';
  if (spec.radius)
    out << "radius = " << format_double(*spec.radius) << '\n';
  out << "levels = " << join(spec.levels, [](int l) { return std::to_string(l); }) << '\n'
      << "ref_level = " << spec.ref_level << '\n'
      << "mu = " << format_double(spec.mu) << '\n'
      << "n_base = " << spec.n_base << '\n'
      << "out = " << spec.out_dir << '\n'
      << "seed = " << spec.seed << '\n'
      << "workers = " << spec.workers << '\n'
      << "hessian = " << (spec.hessian ? "true" : "false") << '\n'
      << "vi_samples = " << spec.vi_samples << '\n'
      << "grad_tol = " << format_double(spec.grad_tol) << '\n'
      << "snapshots = " << (spec.snapshots ? "true" : "false") << '\n';
}

double sine_target(double x1) {
  using std::numbers::pi;
  return std::sin(2 * pi * x1) / (16 * pi) - std::sin(4 * pi * x1) / (16 * pi) +
         std::sin(6 * pi * x1) / (32 * pi);
}

double inverted_hat(double x1, double depth) { return -depth * (1.0 - std::abs(2.0 * x1 - 1.0)); }

BoundaryField builtin_gamma_d(int example, std::shared_ptr<const TraceMesh> mesh,
                              double hat_depth) {
  switch (example) {
  case 1:
  case 2:
    return BoundaryField::interpolate(std::move(mesh), sine_target, TraceKind::zero);
  case 3:
    return BoundaryField::interpolate(
        std::move(mesh), [hat_depth](double x) { return inverted_hat(x, hat_depth); },
        TraceKind::zero);
  default:
    throw std::invalid_argument("builtin_gamma_d: unknown example " + std::to_string(example));
  }
}

BoundaryField sampled_gamma_d(const std::vector<std::pair<double, double>> &samples,
                              std::shared_ptr<const TraceMesh> mesh) {
  if (samples.size() < 2 || samples.front().first != 0.0 || samples.back().first != 1.0)
    throw std::invalid_argument("sampled_gamma_d: samples must cover [0, 1]");
  for (std::size_t k = 1; k < samples.size(); ++k)
    if (!(samples[k].first > samples[k - 1].first))
      throw std::invalid_argument("sampled_gamma_d: abscissae must increase strictly");
  auto f = [&samples](double x) {
    auto it = std::upper_bound(samples.begin(), samples.end(), x,
                               [](double a, const auto &p) { return a < p.first; });
    if (it == samples.end())
      return samples.back().second;
    const auto &[x1, y1] = *it;
    const auto &[x0, y0] = *std::prev(it);
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
  };
  return BoundaryField::interpolate(std::move(mesh), f, TraceKind::zero);
}

std::vector<std::pair<double, double>> read_samples(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path.string());
  std::vector<std::pair<double, double>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    if (trim(line).empty())
      continue;
    std::istringstream ss(line);
    double x, y;
    if (!(ss >> x >> y))
      throw std::runtime_error(path.string() + ": malformed line '" + line + "'");
    out.emplace_back(x, y);
  }
  return out;
}

BulkField dirichlet_lifting(const std::string &kind, std::shared_ptr<const BulkMesh> mesh) {
  if (kind == "zero")
    return BulkField::zero(std::move(mesh));
  if (kind == "default")
    return BulkField::interpolate(std::move(mesh), [](double x1, double x2) {
      return x2 * (1.0 - x2) * (1.0 - 2.0 * x1);
    });
  throw std::invalid_argument("dirichlet_lifting: unknown kind '" + kind + "'");
}

Problem make_problem(const ExperimentSpec &spec, std::shared_ptr<const Discretization> disc) {
  BoundaryField gamma_d = spec.example == 0
                              ? sampled_gamma_d(read_samples(spec.gamma_d_file), disc->trace)
                              : builtin_gamma_d(spec.example, disc->trace, spec.hat_depth);
  auto model =
      std::make_shared<const StateModel>(disc, spec.kappa, dirichlet_lifting(spec.v, disc->bulk));
  return {model, TrackingData{gamma_d, BulkField::zero(disc->bulk), spec.mu}};
}

namespace {

SolutionBundle bundle_of(const std::shared_ptr<const Discretization> &disc,
                         const OptimizationResult &opt) {
  return {disc, opt.state.G, opt.state.Y, opt.adjoint.S, opt.adjoint.R, opt.U};
}

/// Solves one lambda over all levels; `cells` receives one entry per level.
std::vector<CellResult> run_chain(const ExperimentSpec &spec, double lambda, int lambda_index,
                                  bool keep_solutions) {
  const int first = *std::min_element(spec.levels.begin(), spec.levels.end());
  const double radius = spec.effective_radius();
  std::vector<CellResult> cells;
  std::optional<OptimizationResult> previous;
  std::vector<SolutionBundle> bundles;

  for (int level = first; level <= spec.ref_level; ++level) {
    auto disc = make_discretization(level, spec.n_base);
    const Problem problem = make_problem(spec, disc);
    CellResult cell;
    cell.lambda = lambda;
    cell.level = level;

    ControlConfig cfg;
    cfg.lambda = lambda;
    cfg.radius = radius;
    cfg.grad_tol = spec.grad_tol;
    ReducedFunctional f(problem.model, problem.data, lambda, cfg.newton);

    BoundaryField U0 = BoundaryField::zero(disc->trace, TraceKind::zero);
    if (previous) {
      U0 = previous->U.prolonged(disc->trace);
      f.set_warm_start(StatePair{previous->state.G.prolonged(disc->trace),
                                 previous->state.Y.prolonged(disc->bulk)});
    }
    try {
      OptimizationResult opt = optimize(f, cfg, U0);
      cell.ok = true;
      cell.cost = opt.cost;
      cell.control_norm = l2_norm(f.mass(), opt.U.values());
      cell.gradient_map_norm = opt.gradient_map_norm;
      cell.iterations = opt.trace.iterations;
      cell.constraint_active =
          std::isfinite(radius) && std::abs(cell.control_norm - radius) <= 1e-10 * radius;
      if (spec.vi_samples > 0) {
        const std::uint64_t seed = spec.seed + 1000003ULL * lambda_index + 7919ULL * level;
        const auto samples =
            random_admissible_samples(disc->trace, f.mass(), radius, spec.vi_samples, seed);
        cell.vi = check_variational_inequality(opt, samples, f.mass());
      }
      if (spec.hessian && level == *std::max_element(spec.levels.begin(), spec.levels.end())) {
        f.set_warm_start(opt.state);
        cell.hessian = hessian_min_eig(f, opt.U);
      }
      bundles.push_back(bundle_of(disc, opt));
      previous = std::move(opt);
    } catch (const std::exception &e) {
      cell.error = e.what();
      bundles.push_back(SolutionBundle{disc, BoundaryField::zero(disc->trace),
                                       BulkField::zero(disc->bulk), BoundaryField::zero(disc->trace),
                                       BulkField::zero(disc->bulk), BoundaryField::zero(disc->trace)});
      previous.reset();
    }
    cells.push_back(std::move(cell));
  }

  const CellResult &ref = cells.back();
  for (std::size_t k = 0; k + 1 < cells.size(); ++k) {
    if (ref.ok && cells[k].ok)
      cells[k].errors = error_vs_reference(bundles[k], bundles.back());
  }
  if (keep_solutions)
    for (std::size_t k = 0; k < cells.size(); ++k)
      if (cells[k].ok)
        cells[k].solution = bundles[k];
  return cells;
}

} // namespace

ExperimentResult run_experiment(const ExperimentSpec &spec, bool keep_solutions) {
  validate(spec);
  ExperimentResult result;
  result.spec = spec;
  if (spec.lambdas.empty() || spec.levels.empty())
    return result;

  const int n = static_cast<int>(spec.lambdas.size());
  std::vector<std::vector<CellResult>> chains(n);
  int workers = spec.workers > 0 ? spec.workers
                                 : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, n);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < n; i = next++)
      chains[i] = run_chain(spec, spec.lambdas[i], i, keep_solutions);
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w)
    pool.emplace_back(work);
  work();
  for (auto &t : pool)
    t.join();

  const double radius = spec.effective_radius();
  for (const auto &chain : chains) {
    for (const CellResult &c : chain) {
      result.cells.push_back(c);
      if (std::find(spec.levels.begin(), spec.levels.end(), c.level) == spec.levels.end())
        continue;
      RateRow row;
      row.example = spec.example;
      row.lambda = c.lambda;
      row.radius = radius;
      row.mu = spec.mu;
      row.level = c.level;
      const auto disc = make_discretization(c.level, spec.n_base);
      row.h = disc->h();
      row.dofs = static_cast<long>(disc->n() - 1) + static_cast<long>(disc->n() - 1) * (disc->n() - 1);
      const double nan = std::numeric_limits<double>::quiet_NaN();
      if (c.errors)
        row.errors = {c.errors->e_gamma_w1inf, c.errors->e_y_w1p, c.errors->e_s_w11,
                      c.errors->e_r_w1q, c.errors->e_u_l2};
      else
        row.errors.fill(nan);
      row.cost = c.ok ? c.cost : nan;
      row.control_norm = c.ok ? c.control_norm : nan;
      result.table.rows.push_back(row);
    }
  }
  result.table = compute_slopes(std::move(result.table));
  return result;
}

namespace {

json number(double v) {
  if (std::isfinite(v))
    return v;
  return format_double(v);
}

json cell_json(const CellResult &c) {
  json j;
  j["lambda"] = c.lambda;
  j["level"] = c.level;
  j["ok"] = c.ok;
  if (!c.ok) {
    j["error"] = c.error;
    return j;
  }
  j["cost"] = c.cost;
  j["control_norm"] = c.control_norm;
  j["gradient_map_norm"] = c.gradient_map_norm;
  j["iterations"] = c.iterations;
  j["constraint_active"] = c.constraint_active;
  if (c.vi)
    j["vi"] = {{"min_pairing", c.vi->min_pairing},
               {"tolerance", c.vi->tolerance},
               {"passed", c.vi->passed},
               {"samples", c.vi->pairings.size()}};
  if (c.hessian)
    j["hessian"] = {{"min_eigenvalue", c.hessian->min_eigenvalue},
                    {"symmetry_error", c.hessian->symmetry_error},
                    {"noise_floor", c.hessian->noise_floor},
                    {"dim", c.hessian->dim},
                    {"dense", c.hessian->dense},
                    {"warnings", c.hessian->warnings}};
  if (c.errors)
    j["errors"] = {{"gamma_w1inf", c.errors->e_gamma_w1inf}, {"y_w1p", c.errors->e_y_w1p},
                   {"s_w11", c.errors->e_s_w11},             {"r_w1q", c.errors->e_r_w1q},
                   {"u_l2", c.errors->e_u_l2}};
  return j;
}

std::ofstream open_out(const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
  return out;
}

} // namespace

void write_outputs(const ExperimentResult &result, const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir);
  const ExperimentSpec &spec = result.spec;
  {
    auto out = open_out(dir / "rate_table.csv");
    write_csv(result.table, out);
  }

  json summary;
  std::ostringstream cfg;
  write_config(spec, cfg);
  summary["config"] = cfg.str();
  summary["example"] = spec.example;
  summary["radius"] = number(spec.effective_radius());
  summary["reference_level"] = spec.ref_level;
  summary["lambdas"] = json::array();
  for (std::size_t i = 0; i < spec.lambdas.size(); ++i) {
    json entry;
    entry["lambda"] = spec.lambdas[i];
    entry["cells"] = json::array();
    std::vector<double> hs;
    std::array<std::vector<double>, kNumErrorColumns> es;
    for (const CellResult &c : result.cells) {
      if (c.lambda != spec.lambdas[i])
        continue;
      entry["cells"].push_back(cell_json(c));
      if (c.level == spec.ref_level && c.ok) {
        entry["cost"] = c.cost;
        entry["control_norm"] = c.control_norm;
      }
    }
    for (const RateRow &r : result.table.rows) {
      if (r.lambda != spec.lambdas[i])
        continue;
      hs.push_back(r.h);
      for (int k = 0; k < kNumErrorColumns; ++k)
        es[k].push_back(r.errors[k]);
    }
    static const char *names[] = {"gamma_w1inf", "y_w1p", "s_w11", "r_w1q", "u_l2"};
    for (int k = 0; k < kNumErrorColumns; ++k) {
      const auto s = fitted_slope(hs, es[k]);
      entry["fitted_slopes"][names[k]] = s ? json(*s) : json(nullptr);
    }
    summary["lambdas"].push_back(entry);
  }
  {
    auto out = open_out(dir / "summary.json");
    out << summary.dump(2) << '\n';
  }

  for (std::size_t i = 0; i < spec.lambdas.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "plot_%zu.dat", i);
    auto out = open_out(dir / name);
    out << "# lambda " << format_double(spec.lambdas[i])
        << "\n# dofs e_gamma_w1inf e_y_w1p e_s_w11 e_r_w1q e_u_l2\n";
    for (const RateRow &r : result.table.rows) {
      if (r.lambda != spec.lambdas[i])
        continue;
      out << r.dofs;
      for (double e : r.errors)
        out << ' ' << format_double(e);
      out << '\n';
    }
  }

  if (spec.snapshots) {
    for (std::size_t i = 0; i < spec.lambdas.size(); ++i) {
      for (const CellResult &c : result.cells) {
        if (c.lambda != spec.lambdas[i] || c.level != spec.ref_level || !c.solution)
          continue;
        const std::string stem = "lambda_" + std::to_string(i);
        emit_field_snapshot(StatePair{c.solution->G, c.solution->Y}, dir, stem);
        write_trace_profile(c.solution->S, dir / (stem + "_S.txt"));
        write_bulk_snapshot(c.solution->R, dir / (stem + "_R.txt"));
        write_trace_profile(c.solution->U, dir / (stem + "_U.txt"));
      }
    }
  }
}

void write_bulk_snapshot(const BulkField &field, const std::filesystem::path &path) {
  auto out = open_out(path);
  const int n = field.mesh().cells_per_side();
  out << "n " << n << '\n';
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i)
      out << (i ? " " : "") << format_double(field.values()[field.mesh().node_index(i, j)]);
    out << '\n';
  }
  if (!out)
    throw std::runtime_error("write failed: " + path.string());
}

void write_trace_profile(const BoundaryField &field, const std::filesystem::path &path) {
  auto out = open_out(path);
  for (int i = 0; i < field.size(); ++i)
    out << format_double(field.mesh().node(i)) << ' ' << format_double(field.values()[i]) << '\n';
  if (!out)
    throw std::runtime_error("write failed: " + path.string());
}

BulkSnapshot read_bulk_snapshot(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path.string());
  std::string tag;
  BulkSnapshot snap;
  if (!(in >> tag >> snap.n) || tag != "n" || snap.n < 1)
    throw std::runtime_error(path.string() + ": bad header");
  const std::size_t count = static_cast<std::size_t>(snap.n + 1) * (snap.n + 1);
  snap.values.reserve(count);
  std::string tok;
  while (in >> tok)
    snap.values.push_back(std::stod(tok));
  if (snap.values.size() != count)
    throw std::runtime_error(path.string() + ": expected " + std::to_string(count) + " values");
  return snap;
}

std::vector<std::pair<double, double>> read_trace_profile(const std::filesystem::path &path) {
  return read_samples(path);
}

void emit_field_snapshot(const StatePair &state, const std::filesystem::path &dir,
                         const std::string &stem) {
  std::filesystem::create_directories(dir);
  write_bulk_snapshot(state.Y, dir / (stem + "_Y.txt"));
  write_trace_profile(state.G, dir / (stem + "_G.txt"));
}

void emit_field_snapshot(const AdjointPair &adjoint, const std::filesystem::path &dir,
                         const std::string &stem) {
  std::filesystem::create_directories(dir);
  write_bulk_snapshot(adjoint.R, dir / (stem + "_R.txt"));
  write_trace_profile(adjoint.S, dir / (stem + "_S.txt"));
}

} // namespace fbc
