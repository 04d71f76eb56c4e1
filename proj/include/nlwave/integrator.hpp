#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "nlwave/energy.hpp"
#include "nlwave/grid.hpp"
#include "nlwave/physics.hpp"

namespace nlwave {

enum class DataFamily { gaussian, compact_bump };
enum class DataWhich { u0_only, u1_only, both };

// gaussian:      amplitude * exp(-(x/width)^2)
// compact_bump:  amplitude * (1 - (x/width)^2)^4 inside |x| < width, else 0
// (x is the radius in the radial modes). The bump is C^3 at its edge.
std::pair<Field, Field> initial_data(DataFamily family, double amplitude,
                                     double width, const Grid& grid,
                                     DataWhich which);

// Radius outside which the family is treated as zero. The bump is exactly
// supported in [-width, width]; for the gaussian the tail is below 1e-14 of
// the peak beyond 6 * width, which is the truncation this returns.
double support_radius(DataFamily family, double width);

// Largest |x| carrying data above 1e-14 of the peak, measured on the grid.
double data_support_radius(const Field& u0, const Field& u1);

struct SolverConfig {
  double cfl = 0.4;              // dt = cfl * spacing; must lie in (0, 0.5]
  double t_max = 10.0;
  std::size_t sample_every = 10; // record stride in steps
  double blowup_threshold = 1e8; // on linf of v
  bool confirm_refinement = true;
  std::size_t snapshot_every = 0; // full-state stride in steps; 0 = none

  bool operator==(const SolverConfig&) const = default;
};

enum class Classification { global_to_horizon, blowup, inconclusive };

const char* to_string(Classification c);

// records are sampled at a uniform stride; snapshots (when requested)
// always include the initial state. final_state is the state at t_max for
// global runs and the last finite state for the other classes.
struct RunOutcome {
  Classification classification = Classification::global_to_horizon;
  std::optional<double> t_star;
  std::vector<EnergyRecord> records;
  std::vector<State> snapshots;
  std::optional<State> final_state;
};

// One classical fourth-order Runge-Kutta step of the first-order system
//   u' = v,   v' = Lap u - mu/(1+t) v + f(v)
// with the damping coefficient evaluated at the stage times.
State step(const State& state, const PhysParams& params, double dt);

// March to config.t_max. A candidate blow-up (linf of v crossing the
// threshold, or a non-finite value) is re-run at dt/2 when
// confirm_refinement is set; the run is classified inconclusive unless the
// refined run blows up too, with t_star within 5 percent.
RunOutcome evolve(const Field& u0, const Field& u1, const PhysParams& params,
                  const SolverConfig& config);

// Flow of the homogeneous equation from time s to time t >= s, applied to
// data posed at time s. params.nonlinearity must be empty.
State propagate_homogeneous(double s, double t,
                            const std::pair<Field, Field>& data,
                            const PhysParams& params, double cfl = 0.4);

// Relative L2 mismatch at the final time between the evolved u and its
// reconstruction from the variation-of-constants formula: the homogeneous
// flow of the data plus the trapezoid sum over n_quad intervals of the
// forcing f(v(s)) propagated homogeneously from s. v(s) is interpolated
// linearly between stored snapshots. Homogeneous runs reduce to replaying
// the flow, so their residual is round-off.
double duhamel_residual(const RunOutcome& outcome, const PhysParams& params,
                        std::size_t n_quad, double cfl = 0.4);

}  // namespace nlwave
