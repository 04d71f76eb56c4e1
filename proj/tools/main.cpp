// Command line front end: run | verify | sweep | fit.
//
// Exit codes: 0 success, 1 usage or config error, 2 inconclusive
// classification, 3 verification tolerance failure.

#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nlwave/io.hpp"

namespace fs = std::filesystem;
using namespace nlwave;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir_override;
  unsigned threads = 1;
};

RunConfig load_config(const CommonArgs& args) {
  if (args.config_path.empty()) throw ConfigError("usage: --config is required");
  RunConfig cfg = load_config_file(args.config_path);
  if (!args.out_dir_override.empty()) cfg.output_dir = args.out_dir_override;
  return cfg;
}

fs::path prepare_out_dir(const RunConfig& cfg) {
  fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("output_dir: cannot create '" + cfg.output_dir + "'");
  return dir;
}

int cmd_run(const CommonArgs& args) {
  RunConfig cfg = load_config(args);
  const fs::path dir = prepare_out_dir(cfg);

  const Grid grid = realize_grid(cfg);
  const PhysParams params = phys_params(cfg);
  auto [u0, u1] = initial_data(cfg.initial_data.family, cfg.initial_data.amplitude,
                               cfg.initial_data.width, grid, cfg.initial_data.which);

  std::fprintf(stderr, "run: mu=%g grid=%s n=%zu dx=%g t_max=%g\n", cfg.mu,
               to_string(grid.dim_mode), grid.n_points, grid.spacing,
               cfg.solver.t_max);

  RunOutcome outcome = evolve(u0, u1, params, cfg.solver);

  std::optional<DecayFit> fit;
  if (outcome.classification == Classification::global_to_horizon &&
      cfg.solver.t_max > 10.0) {
    std::vector<std::pair<double, double>> series;
    for (const EnergyRecord& r : outcome.records) {
      if (r.bundle > 0.0) series.emplace_back(r.t, std::sqrt(r.bundle));
    }
    try {
      fit = fit_decay(series, default_fit_window(cfg.solver.t_max));
    } catch (const std::exception&) {
      // Decayed-to-zero or sparse series: report the run without a fit.
    }
  }

  write_timeseries_csv((dir / "timeseries.csv").string(), outcome.records);
  write_outcome_json((dir / "outcome.json").string(), outcome, fit);

  std::fprintf(stderr, "run: %s%s\n", to_string(outcome.classification),
               outcome.t_star ? (" t*=" + fmt17(*outcome.t_star)).c_str() : "");
  return outcome.classification == Classification::inconclusive ? 2 : 0;
}

int cmd_verify(const CommonArgs& args) {
  RunConfig cfg = load_config(args);
  const fs::path dir = prepare_out_dir(cfg);

  VerifyReport report = run_verification(cfg);
  write_verify_json((dir / "verify.json").string(), report);

  for (const VerifyCheck& c : report.checks) {
    std::fprintf(stderr, "verify: %-24s %-4s value=%.3e bounds=[%.3g, %.3g]\n",
                 c.name.c_str(), c.pass ? "ok" : "FAIL", c.value, c.bound_lo,
                 c.bound_hi);
  }
  return report.all_pass ? 0 : 3;
}

int cmd_sweep(const CommonArgs& args) {
  RunConfig cfg = load_config(args);
  if (!cfg.sweep) throw ConfigError("sweep: config lacks a 'sweep' section");
  const fs::path dir = prepare_out_dir(cfg);

  SweepBase base;
  base.grid = realize_grid(cfg);
  base.family = cfg.initial_data.family;
  base.width = cfg.initial_data.width;
  base.which = cfg.initial_data.which;
  base.kind = cfg.nonlinearity ? cfg.nonlinearity->kind
                               : NonlinearityKind::unsigned_power;
  base.eta = cfg.eta;
  base.solver = cfg.solver;

  std::fprintf(stderr, "sweep: %zu x %zu cells, eps=%g, threads=%u\n",
               cfg.sweep->mu_values.size(), cfg.sweep->p_values.size(),
               cfg.sweep->eps, args.threads);

  SweepResult result = run_sweep(cfg.sweep->mu_values, cfg.sweep->p_values,
                                 cfg.sweep->eps, base, args.threads);

  write_sweep_csv((dir / "sweep.csv").string(), result, cfg.sweep->eps);
  write_boundary_json((dir / "boundary.json").string(), result, cfg.sweep->eps);

  for (const BoundaryBracket& b : result.boundaries) {
    if (b.bracket) {
      std::fprintf(stderr, "sweep: mu=%g bracket=[%g, %g]\n", b.mu,
                   b.bracket->first, b.bracket->second);
    } else {
      std::fprintf(stderr, "sweep: mu=%g open (%s)\n", b.mu, b.open_flag.c_str());
    }
  }
  return 0;
}

int cmd_fit(const std::string& timeseries, const std::string& column,
            double t_min, double t_max, const std::string& out_path) {
  TimeseriesColumn data = read_timeseries_column(timeseries, column);
  if (data.series.empty()) {
    throw ConfigError("fit: column '" + column + "' has no populated rows");
  }
  if (t_max <= 0.0) t_max = data.series.back().first;
  if (t_min <= 0.0) t_min = std::max(10.0, t_max / 20.0);

  DecayFit fit;
  try {
    fit = fit_decay(data.series, FitWindow{t_min, t_max});
  } catch (const std::exception& e) {
    throw ConfigError(std::string("fit: ") + e.what());
  }
  write_fit_json(out_path, column, fit);
  std::fprintf(stderr, "fit: %s ~ (1+t)^%.6f over [%g, %g], rms=%.3e\n",
               column.c_str(), fit.exponent, t_min, t_max, fit.rms_residual);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Damped wave equation laboratory"};
  app.require_subcommand(1);

  CommonArgs common;

  CLI::App* run = app.add_subcommand("run", "Evolve one configuration");
  run->add_option("--config", common.config_path, "JSON config file");
  run->add_option("--out-dir", common.out_dir_override, "Override output directory");

  CLI::App* verify = app.add_subcommand("verify", "Homogeneous identity suite");
  verify->add_option("--config", common.config_path, "JSON config file");
  verify->add_option("--out-dir", common.out_dir_override, "Override output directory");

  CLI::App* sweep = app.add_subcommand("sweep", "Classification sweep over (mu, p)");
  sweep->add_option("--config", common.config_path, "JSON config file");
  sweep->add_option("--out-dir", common.out_dir_override, "Override output directory");
  sweep->add_option("--threads", common.threads, "Worker threads for sweep cells");

  std::string fit_timeseries, fit_column = "l2_v", fit_out = "fit.json";
  double fit_tmin = 0.0, fit_tmax = 0.0;
  CLI::App* fit = app.add_subcommand("fit", "Power-law fit of a timeseries column");
  fit->add_option("--timeseries", fit_timeseries, "timeseries.csv path")->required();
  fit->add_option("--column", fit_column, "Column to fit");
  fit->add_option("--tmin", fit_tmin, "Window start (default max(10, tmax/20))");
  fit->add_option("--tmax", fit_tmax, "Window end (default last sample)");
  fit->add_option("--out", fit_out, "Output JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) return cmd_run(common);
    if (verify->parsed()) return cmd_verify(common);
    if (sweep->parsed()) return cmd_sweep(common);
    if (fit->parsed()) {
      return cmd_fit(fit_timeseries, fit_column, fit_tmin, fit_tmax, fit_out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
