#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlwave/analysis.hpp"

namespace nlwave {

// Configuration or usage problem; what() names the offending field. The CLI
// maps this to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GridConfig {
  DimMode dim_mode = DimMode::line1d;
  // Either an explicit (extent, n_points) pair or auto sizing, which picks
  // extent = data support + t_max + 2 and the node count from target_spacing.
  bool auto_extent = false;
  double target_spacing = 0.0;
  double extent = 0.0;
  std::size_t n_points = 0;

  bool operator==(const GridConfig&) const = default;
};

struct InitialDataConfig {
  DataFamily family = DataFamily::compact_bump;
  double amplitude = 1e-3;
  double width = 1.0;
  DataWhich which = DataWhich::both;

  bool operator==(const InitialDataConfig&) const = default;
};

struct SweepConfig {
  std::vector<double> mu_values;
  std::vector<double> p_values;
  double eps = 1e-3;

  bool operator==(const SweepConfig&) const = default;
};

struct RunConfig {
  double mu = 1.0;
  double eta = 0.5;
  std::optional<NonlinearitySpec> nonlinearity;
  GridConfig grid;
  InitialDataConfig initial_data;
  SolverConfig solver;
  std::optional<SweepConfig> sweep;
  std::string output_dir = "out";
  std::uint64_t seed = 0;

  bool operator==(const RunConfig&) const = default;
};

// Strict parse: unknown keys, wrong types and out-of-range values are all
// ConfigError with the JSON path of the field in the message.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config_file(const std::string& path);
std::string config_to_json(const RunConfig& config);

// Builds the grid, applying auto sizing against the initial data and
// horizon when requested.
Grid realize_grid(const RunConfig& config);
PhysParams phys_params(const RunConfig& config);

// Formats a double with 17 significant digits (enough to round-trip).
std::string fmt17(double x);

void write_timeseries_csv(const std::string& path,
                          const std::vector<EnergyRecord>& records);

struct TimeseriesColumn {
  std::vector<std::pair<double, double>> series;  // (t, value); blanks skipped
};
TimeseriesColumn read_timeseries_column(const std::string& path,
                                        const std::string& column);

void write_outcome_json(const std::string& path, const RunOutcome& outcome,
                        const std::optional<DecayFit>& fit);
void write_sweep_csv(const std::string& path, const SweepResult& result,
                     double eps);
void write_boundary_json(const std::string& path, const SweepResult& result,
                         double eps);
void write_fit_json(const std::string& path, const std::string& column,
                    const DecayFit& fit);

// One check of the verification suite run by the CLI verify command.
struct VerifyCheck {
  std::string name;
  double value = 0.0;
  double bound_lo = 0.0;
  double bound_hi = 0.0;
  bool pass = false;
};

struct VerifyReport {
  double mu = 0.0;
  double eta = 0.0;
  std::vector<VerifyCheck> checks;
  bool all_pass = false;
};

// Homogeneous identity suite on the configured regime: monotonicity of the
// weighted functional, second-order shrink of its identity residual under
// (dx, dt) halving, positive finite equivalence ratios, and round-off level
// reconstruction of the final state from the homogeneous flow.
VerifyReport run_verification(const RunConfig& config);

void write_verify_json(const std::string& path, const VerifyReport& report);

}  // namespace nlwave
