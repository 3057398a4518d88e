#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fbc/adjoint.hpp"
#include "fbc/control.hpp"
#include "fbc/norms.hpp"

namespace fbc {

/// One experiment: a target, a lambda sweep, and a refinement study against a
/// fine reference level. Example 0 is a custom target read from a file.
struct ExperimentSpec {
  int example = 1;
  std::string gamma_d_file; ///< two columns (x1, value), example 0 only
  double hat_depth = 0.5;   ///< depth of the inverted hat, example 3 only
  std::string v = "default"; ///< "default": x2 (1 - x2)(1 - 2 x1); "zero"
  double kappa = 1.0;
  std::vector<double> lambdas = {1e0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  std::optional<double> radius; ///< 0.9 for example 1, unbounded otherwise
  std::vector<int> levels = {1, 2, 3, 4};
  int ref_level = 7;
  double mu = 0.0;
  int n_base = 2;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  int workers = 0; ///< 0: one per lambda up to the hardware concurrency
  bool hessian = false;
  int vi_samples = 100;
  double grad_tol = 1e-9;
  bool snapshots = true;

  double effective_radius() const;
};

/// Throws std::invalid_argument describing the first violated constraint.
void validate(const ExperimentSpec &spec);

/// Flat "key = value" text; '#' starts a comment, lists are comma separated.
/// Unknown keys and malformed values are rejected with the line number.
ExperimentSpec parse_config(std::istream &in);
ExperimentSpec load_config(const std::filesystem::path &path);
/// Inverse of parse_config for every field.
void write_config(const ExperimentSpec &spec, std::ostream &out);

/// Smooth target of examples 1 and 2.
double sine_target(double x1);
/// -depth (1 - |2 x1 - 1|).
double inverted_hat(double x1, double depth);

BoundaryField builtin_gamma_d(int example, std::shared_ptr<const TraceMesh> mesh,
                              double hat_depth = 0.5);
/// Piecewise-linear interpolant of sampled (x1, value) pairs; the samples must
/// cover [0, 1], be strictly increasing in x1 and vanish at both ends.
BoundaryField sampled_gamma_d(const std::vector<std::pair<double, double>> &samples,
                              std::shared_ptr<const TraceMesh> mesh);
std::vector<std::pair<double, double>> read_samples(const std::filesystem::path &path);

BulkField dirichlet_lifting(const std::string &kind, std::shared_ptr<const BulkMesh> mesh);

/// The optimal control problem of `spec` on one discretization.
struct Problem {
  std::shared_ptr<const StateModel> model;
  TrackingData data;
};
Problem make_problem(const ExperimentSpec &spec, std::shared_ptr<const Discretization> disc);

/// Outcome for one (lambda, level) pair.
struct CellResult {
  double lambda = 0.0;
  int level = 0;
  bool ok = false;
  std::string error;
  double cost = 0.0;
  double control_norm = 0.0;
  double gradient_map_norm = 0.0;
  int iterations = 0;
  bool constraint_active = false;
  std::optional<VIReport> vi;
  std::optional<HessianReport> hessian;
  std::optional<ErrorRow> errors;
  std::optional<SolutionBundle> solution;
};

struct ExperimentResult {
  ExperimentSpec spec;
  RateTable table;
  std::vector<CellResult> cells; ///< lambda-major, levels ascending, reference last
};

/// Runs every lambda as an independent chain over the levels min(levels) ..
/// ref_level, each level warm-started from the prolonged previous one.
/// Chains run concurrently; results are collected in spec order so the
/// outputs do not depend on the worker count. Solver failures are recorded
/// in the affected cells.
ExperimentResult run_experiment(const ExperimentSpec &spec, bool keep_solutions = false);

/// rate_table.csv, summary.json, plot_<k>.dat per lambda and, if requested,
/// snapshots of the reference-level solution of every lambda.
void write_outputs(const ExperimentResult &result, const std::filesystem::path &dir);

/// Bulk snapshot: a line "n <n>", then n+1 rows of n+1 values ("%.17g")
/// ordered by x2, then x1.
void write_bulk_snapshot(const BulkField &field, const std::filesystem::path &path);
/// Two columns (x1, value), one line per trace node.
void write_trace_profile(const BoundaryField &field, const std::filesystem::path &path);

struct BulkSnapshot {
  int n = 0;
  std::vector<double> values;
};
BulkSnapshot read_bulk_snapshot(const std::filesystem::path &path);
std::vector<std::pair<double, double>> read_trace_profile(const std::filesystem::path &path);

/// <stem>_Y.txt, <stem>_G.txt for a state; <stem>_R.txt, <stem>_S.txt for an adjoint.
void emit_field_snapshot(const StatePair &state, const std::filesystem::path &dir,
                         const std::string &stem);
void emit_field_snapshot(const AdjointPair &adjoint, const std::filesystem::path &dir,
                         const std::string &stem);

} // namespace fbc
