// stokesmor: validate, run, sweep and grid-export scenarios.
//
// Exit codes: 0 ok or tolerance met, 1 parse/usage/I/O/runtime error,
// 2 invalid configuration, 3 iteration limit reached, 4 divergence.

#include "stokesmor/io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using namespace stokesmor;

namespace {

enum Exit { kOk = 0, kError = 1, kInvalidConfig = 2, kMaxIter = 3, kDiverged = 4 };

struct Common {
  std::string scenario;
  std::string out;
  unsigned threads = 0;
  int quad_order = 0;
  bool timings = false;
};

fs::path output_dir(const Common& c) {
  if (!c.out.empty()) return c.out;
  if (const char* env = std::getenv("STOKESMOR_OUT"); env && *env) return env;
  return ".";
}

Scenario load(const Common& c) {
  Scenario s = parse_scenario(read_file(c.scenario));
  s.solver.threads = c.threads > 0 ? c.threads : std::max(1u, std::thread::hardware_concurrency());
  if (c.quad_order > 0) {
    s.solver.quad_degree = c.quad_order;
    SphereQuadrature check(s.solver.quad_degree, s.solver.radial_nodes);
  }
  return s;
}

// Returns kOk when the configuration is usable, otherwise prints why.
int check_config(const Scenario& s) {
  if (s.config.empty()) {
    std::cerr << "error: scenario has no particles\n";
    return kInvalidConfig;
  }
  const ValidationReport r = validate_config(s.config);
  if (r.separated()) return kOk;
  std::cerr << "error: invalid configuration";
  if (!r.overlapping_pairs.empty()) {
    std::cerr << "; overlapping pairs:";
    for (const auto& [a, b] : r.overlapping_pairs) std::cerr << " (" << a << ", " << b << ")";
  } else {
    std::cerr << "; spheres touch (theta_max = " << r.theta_max << ")";
  }
  std::cerr << "\n";
  return kInvalidConfig;
}

const AmbientField& need_ambient(const Scenario& s) {
  if (!s.ambient) throw Error(ErrorKind::invalid_input, "scenario needs an 'ambient' field");
  return *s.ambient;
}

int cmd_validate(const Common& c) {
  const Scenario s = load(c);
  if (s.config.empty()) {
    std::cerr << "error: scenario has no particles\n";
    return kInvalidConfig;
  }
  const ValidationReport r = validate_config(s.config);
  std::cout << to_json(r, s.config.size()).dump(2) << "\n";
  return check_config(s);
}

int cmd_run(const Common& c) {
  const Scenario s = load(c);
  if (int rc = check_config(s); rc != kOk) return rc;
  const AmbientField& ambient = need_ambient(s);
  const fs::path dir = output_dir(c);
  try {
    const RunResult res = run(s.config, ambient, s.solver);
    write_atomic(dir / "report.json", report_json(res.report, &res.field, c.timings).dump(2) + "\n");
    write_atomic(dir / "residuals.csv", residual_csv(res.report, c.timings));
    if (s.grid) write_atomic(dir / "grid.csv", grid_csv(res.field, *s.grid, s.grid->strain));
    std::cout << "terminated: " << to_string(res.report.terminated) << ", iterations " << res.report.iterations
              << ", rho " << fmt(res.report.rho) << "\n";
    return res.report.terminated == Termination::tolerance ? kOk : kMaxIter;
  } catch (const DivergenceError& e) {
    write_atomic(dir / "report.json", report_json(e.report(), nullptr, c.timings).dump(2) + "\n");
    write_atomic(dir / "residuals.csv", residual_csv(e.report(), c.timings));
    std::cerr << "error: " << e.what() << "\n";
    return kDiverged;
  }
}

int cmd_sweep(const Common& c) {
  const Scenario s = load(c);
  if (!s.sweep) throw Error(ErrorKind::invalid_input, "scenario needs a 'sweep' section");
  if (s.sweep->phi0.empty()) throw Error(ErrorKind::invalid_input, "sweep.phi0 must list at least one value");
  const SweepResult res = contraction_sweep(s.sweep->family, s.sweep->phi0, s.solver);
  const fs::path dir = output_dir(c);
  write_atomic(dir / "sweep.csv", sweep_csv(res));
  write_atomic(dir / "sweep.json", sweep_json(res).dump(2) + "\n");
  if (res.fit) {
    std::cout << "slope " << fmt(res.fit->slope) << " +- " << fmt(res.fit->slope_stderr) << "\n";
  } else {
    std::cout << "slope unavailable: fewer than two usable points\n";
  }
  return kOk;
}

int cmd_grid(const Common& c, const std::string& field_path, bool strain) {
  const Scenario s = load(c);
  if (!s.grid) throw Error(ErrorKind::invalid_input, "scenario needs a 'grid' section");
  if (int rc = check_config(s); rc != kOk) return rc;
  const AmbientField& ambient = need_ambient(s);
  const bool with_strain = strain || s.grid->strain;
  std::optional<FlowField> field;
  if (!field_path.empty()) {
    field = field_from_report(parse_json(read_file(field_path)), s.config, ambient);
  } else {
    field = run(s.config, ambient, s.solver).field;
  }
  write_atomic(output_dir(c) / "grid.csv", grid_csv(*field, *s.grid, with_strain));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Method of reflections for Stokes flow around rigid spheres"};
  app.require_subcommand(1);
  Common common;
  std::string field_path;
  bool strain = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("scenario", common.scenario, "Scenario JSON file")->required();
    sub->add_option("--threads", common.threads, "Maximum worker threads (default: hardware)")->check(CLI::PositiveNumber);
    sub->add_option("--quad-order", common.quad_order, "Lebedev surface degree")->check(CLI::PositiveNumber);
  };
  auto add_output = [&](CLI::App* sub) {
    sub->add_option("--out", common.out, "Output directory (default: $STOKESMOR_OUT or .)");
  };

  CLI::App* validate = app.add_subcommand("validate", "Check separation and print the validation report");
  add_common(validate);
  CLI::App* run_cmd = app.add_subcommand("run", "Iterate to tolerance; write report.json and residuals.csv");
  add_common(run_cmd);
  add_output(run_cmd);
  run_cmd->add_flag("--timings", common.timings, "Include wall-clock times in outputs");
  CLI::App* sweep = app.add_subcommand("sweep", "Contraction-rate sweep over phi0; write sweep.csv and sweep.json");
  add_common(sweep);
  add_output(sweep);
  CLI::App* grid = app.add_subcommand("grid", "Evaluate the converged field on a grid; write grid.csv");
  add_common(grid);
  add_output(grid);
  grid->add_option("--field", field_path, "report.json from a previous run instead of solving inline");
  grid->add_flag("--strain", strain, "Include strain columns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kError;
  }

  try {
    if (*validate) return cmd_validate(common);
    if (*run_cmd) return cmd_run(common);
    if (*sweep) return cmd_sweep(common);
    if (*grid) return cmd_grid(common, field_path, strain);
  } catch (const ParseError& e) {
    std::cerr << common.scenario << ": " << e.what() << "\n";
    return kError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::overlap:
      case ErrorKind::generation_failed:
        return kInvalidConfig;
      case ErrorKind::divergence:
        return kDiverged;
      default:
        return kError;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
