#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fbc/diagnostics.hpp"
#include "fbc/experiment.hpp"
#include "fbc/norms.hpp"

namespace {

struct Overrides {
  std::optional<int> example;
  std::vector<double> lambdas;
  std::vector<int> levels;
  std::optional<std::string> radius;
  std::optional<double> mu;
  std::optional<double> kappa;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> ref_level;
  std::optional<int> workers;
  bool hessian = false;
};

void apply(const Overrides &o, fbc::ExperimentSpec &spec) {
  if (o.example)
    spec.example = *o.example;
  if (!o.lambdas.empty())
    spec.lambdas = o.lambdas;
  if (!o.levels.empty())
    spec.levels = o.levels;
  if (o.radius)
    spec.radius = *o.radius == "inf" ? fbc::kUnbounded : std::stod(*o.radius);
  if (o.mu)
    spec.mu = *o.mu;
  if (o.kappa)
    spec.kappa = *o.kappa;
  if (o.out)
    spec.out_dir = *o.out;
  if (o.seed)
    spec.seed = *o.seed;
  if (o.ref_level)
    spec.ref_level = *o.ref_level;
  if (o.workers)
    spec.workers = *o.workers;
  if (o.hessian)
    spec.hessian = true;
}

void print_summary(const fbc::ExperimentResult &r) {
  std::printf("%-10s %-6s %-14s %-14s %-6s %s\n", "lambda", "level", "J", "||U||", "iter",
              "status");
  for (const auto &c : r.cells) {
    if (c.ok)
      std::printf("%-10.3g %-6d %-14.6e %-14.6e %-6d ok%s\n", c.lambda, c.level, c.cost,
                  c.control_norm, c.iterations, c.constraint_active ? " (active)" : "");
    else
      std::printf("%-10.3g %-6d failed: %s\n", c.lambda, c.level, c.error.c_str());
  }
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Optimal control of a free boundary problem with surface tension"};
  app.require_subcommand(1);

  Overrides o;
  std::string config;
  auto *run = app.add_subcommand("run", "Run an experiment from a config file");
  run->add_option("config", config, "Config file (key = value)")->check(CLI::ExistingFile);
  run->add_option("--example", o.example, "Example id (0 custom, 1, 2, 3)");
  run->add_option("--lambda", o.lambdas, "Comma-separated lambda list")->delimiter(',');
  run->add_option("--levels", o.levels, "Comma-separated refinement levels")->delimiter(',');
  run->add_option("--radius", o.radius, "Control ball radius or 'inf'");
  run->add_option("--mu", o.mu, "Weight of the bulk tracking term");
  run->add_option("--kappa", o.kappa, "Surface tension coefficient");
  run->add_option("--out", o.out, "Output directory");
  run->add_option("--seed", o.seed, "Seed for randomized checks");
  run->add_option("--ref-level", o.ref_level, "Reference refinement level");
  run->add_option("--workers", o.workers, "Concurrent lambda chains (0: automatic)");
  run->add_flag("--hessian", o.hessian, "Estimate the smallest Hessian eigenvalue");

  std::string csv_in, csv_out;
  auto *rates = app.add_subcommand("rates", "Recompute slopes of a stored rate table");
  rates->add_option("csv", csv_in, "rate_table.csv")->required()->check(CLI::ExistingFile);
  rates->add_option("--out", csv_out, "Write the updated table here instead of stdout");

  std::uint64_t check_seed = 1;
  int check_level = 3;
  auto *check = app.add_subcommand("check", "Run the invariant suite");
  check->add_option("--seed", check_seed, "Seed for random inputs");
  check->add_option("--levels", check_level, "Highest level to check");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      fbc::ExperimentSpec spec = config.empty() ? fbc::ExperimentSpec{} : fbc::load_config(config);
      apply(o, spec);
      fbc::validate(spec);
      const auto result = fbc::run_experiment(spec, spec.snapshots);
      fbc::write_outputs(result, spec.out_dir);
      print_summary(result);
      std::printf("outputs written to %s\n", spec.out_dir.c_str());
      for (const auto &c : result.cells)
        if (!c.ok)
          return 2;
      return 0;
    }
    if (*rates) {
      std::ifstream in(csv_in);
      const auto table = fbc::compute_slopes(fbc::read_csv(in));
      if (csv_out.empty()) {
        fbc::write_csv(table, std::cout);
      } else {
        std::ofstream out(csv_out);
        if (!out)
          throw std::runtime_error("cannot write " + csv_out);
        fbc::write_csv(table, out);
      }
      return 0;
    }
    if (*check) {
      bool ok = true;
      for (const auto &r : fbc::run_invariant_suite(check_seed, check_level)) {
        std::printf("%s %s: %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
        ok = ok && r.passed;
      }
      return ok ? 0 : 1;
    }
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
