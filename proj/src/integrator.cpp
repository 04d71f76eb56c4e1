#include "nlwave/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nlwave/operators.hpp"

namespace nlwave {

namespace {

struct Work {
  std::vector<double> lap;
  std::vector<double> k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
  std::vector<double> su, sv;

  explicit Work(std::size_t n)
      : lap(n), k1u(n), k1v(n), k2u(n), k2v(n), k3u(n), k3v(n), k4u(n), k4v(n),
        su(n), sv(n) {}
};

// du = v, dv = Lap u - mu/(1+t) v + f(v). The nonlinearity branch is hoisted
// out of the node loop; this is the innermost kernel of every run.
void eval_rhs(const Grid& grid, const PhysParams& params, double t,
              const std::vector<double>& u, const std::vector<double>& v,
              std::vector<double>& du, std::vector<double>& dv, Work& w) {
  detail::laplacian_into(grid, u, w.lap);
  const double damp = params.mu / (1.0 + t);
  const std::size_t n = grid.n_points;
  const double* lap = w.lap.data();
  if (!params.nonlinearity) {
    for (std::size_t i = 0; i < n; ++i) {
      du[i] = v[i];
      dv[i] = lap[i] - damp * v[i];
    }
  } else if (params.nonlinearity->kind == NonlinearityKind::unsigned_power) {
    const double p = params.nonlinearity->p;
    for (std::size_t i = 0; i < n; ++i) {
      du[i] = v[i];
      dv[i] = lap[i] - damp * v[i] + std::pow(std::abs(v[i]), p);
    }
  } else {
    const double pm1 = params.nonlinearity->p - 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      du[i] = v[i];
      dv[i] = lap[i] - damp * v[i] + std::pow(std::abs(v[i]), pm1) * v[i];
    }
  }
}

void rk4_step(const Grid& grid, const PhysParams& params, double t, double dt,
              std::vector<double>& u, std::vector<double>& v, Work& w) {
  const std::size_t n = grid.n_points;
  const double half = 0.5 * dt;

  eval_rhs(grid, params, t, u, v, w.k1u, w.k1v, w);
  for (std::size_t i = 0; i < n; ++i) {
    w.su[i] = u[i] + half * w.k1u[i];
    w.sv[i] = v[i] + half * w.k1v[i];
  }
  eval_rhs(grid, params, t + half, w.su, w.sv, w.k2u, w.k2v, w);
  for (std::size_t i = 0; i < n; ++i) {
    w.su[i] = u[i] + half * w.k2u[i];
    w.sv[i] = v[i] + half * w.k2v[i];
  }
  eval_rhs(grid, params, t + half, w.su, w.sv, w.k3u, w.k3v, w);
  for (std::size_t i = 0; i < n; ++i) {
    w.su[i] = u[i] + dt * w.k3u[i];
    w.sv[i] = v[i] + dt * w.k3v[i];
  }
  eval_rhs(grid, params, t + dt, w.su, w.sv, w.k4u, w.k4v, w);

  const double sixth = dt / 6.0;
  for (std::size_t i = 0; i < n; ++i) {
    u[i] += sixth * (w.k1u[i] + 2.0 * w.k2u[i] + 2.0 * w.k3u[i] + w.k4u[i]);
    v[i] += sixth * (w.k1v[i] + 2.0 * w.k2v[i] + 2.0 * w.k3v[i] + w.k4v[i]);
  }
}

struct Schedule {
  std::size_t n_full = 0;
  double rem = 0.0;
};

Schedule make_schedule(double t0, double t1, double dt) {
  const double span = t1 - t0;
  if (span < 0.0) throw std::invalid_argument("march: target time precedes start");
  if (!(dt > 0.0)) throw std::invalid_argument("march: dt must be positive");
  Schedule s;
  s.n_full = static_cast<std::size_t>(std::floor(span / dt + 1e-9));
  s.rem = span - static_cast<double>(s.n_full) * dt;
  if (s.rem <= 1e-9 * dt) s.rem = 0.0;
  return s;
}

// Fixed-step RK4 march from t0 to t1. Callback runs after every step as
// after_step(step_index, t_now, is_partial) and stops the march by
// returning false. Step times are recomputed as t0 + i*dt so marches with
// identical arguments take bitwise identical paths.
template <typename Cb>
bool march(const Grid& grid, const PhysParams& params, double t0, double t1,
           double dt, std::vector<double>& u, std::vector<double>& v, Work& w,
           Cb&& after_step) {
  const Schedule sched = make_schedule(t0, t1, dt);
  for (std::size_t i = 1; i <= sched.n_full; ++i) {
    const double t_prev = t0 + static_cast<double>(i - 1) * dt;
    rk4_step(grid, params, t_prev, dt, u, v, w);
    const double t_now = (i == sched.n_full && sched.rem == 0.0)
                             ? t1
                             : t0 + static_cast<double>(i) * dt;
    if (!after_step(i, t_now, false)) return false;
  }
  if (sched.rem > 0.0) {
    const double t_prev = t0 + static_cast<double>(sched.n_full) * dt;
    rk4_step(grid, params, t_prev, sched.rem, u, v, w);
    if (!after_step(sched.n_full + 1, t1, true)) return false;
  }
  return true;
}

// linf of v plus finiteness in one pass; a non-finite entry reports as an
// infinite norm so a single threshold comparison covers both triggers.
double guarded_linf(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) return std::numeric_limits<double>::infinity();
    m = std::max(m, std::abs(x));
  }
  return m;
}

void validate_common(const Grid& grid, const PhysParams& params) {
  if (grid.n_points < 16) throw std::invalid_argument("evolve: grid too small");
  if (!(params.mu >= 0.0) || !std::isfinite(params.mu)) {
    throw std::invalid_argument("evolve: mu must be nonnegative and finite");
  }
  if (params.nonlinearity && !(params.nonlinearity->p > 1.0)) {
    throw std::invalid_argument("evolve: nonlinearity exponent must exceed 1");
  }
  if (params.mu == 2.0 && !(params.eta > 0.0 && params.eta < 2.0)) {
    throw std::invalid_argument("evolve: eta must lie in (0, 2) when mu == 2");
  }
}

void validate_cfl(double cfl) {
  if (!(cfl > 0.0) || cfl > 0.5) {
    throw std::invalid_argument("cfl must lie in (0, 0.5]");
  }
}

}  // namespace

const char* to_string(Classification c) {
  switch (c) {
    case Classification::global_to_horizon: return "global_to_horizon";
    case Classification::blowup: return "blowup";
    case Classification::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::pair<Field, Field> initial_data(DataFamily family, double amplitude,
                                     double width, const Grid& grid,
                                     DataWhich which) {
  if (!(width > 0.0)) throw std::invalid_argument("initial_data: width must be positive");
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
    throw std::invalid_argument("initial_data: amplitude must be nonnegative");
  }
  if (width > grid.extent) {
    throw std::invalid_argument("initial_data: width exceeds the grid extent");
  }

  Field shape = make_field(grid);
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const double s = grid.node(i) / width;
    if (family == DataFamily::gaussian) {
      shape.values[i] = amplitude * std::exp(-s * s);
    } else {
      const double q = 1.0 - s * s;
      shape.values[i] = (q > 0.0) ? amplitude * (q * q) * (q * q) : 0.0;
    }
  }

  Field zero = make_field(grid);
  switch (which) {
    case DataWhich::u0_only: return {shape, zero};
    case DataWhich::u1_only: return {zero, shape};
    case DataWhich::both: return {shape, shape};
  }
  return {shape, zero};
}

double support_radius(DataFamily family, double width) {
  if (!(width > 0.0)) throw std::invalid_argument("support_radius: width must be positive");
  return (family == DataFamily::compact_bump) ? width : 6.0 * width;
}

double data_support_radius(const Field& u0, const Field& u1) {
  if (!(u0.grid == u1.grid)) {
    throw std::invalid_argument("data_support_radius: fields on different grids");
  }
  const double peak = std::max(linf_norm(u0), linf_norm(u1));
  if (peak == 0.0) return 0.0;
  const double thr = 1e-14 * peak;
  double radius = 0.0;
  for (std::size_t i = 0; i < u0.grid.n_points; ++i) {
    if (std::abs(u0.values[i]) > thr || std::abs(u1.values[i]) > thr) {
      radius = std::max(radius, std::abs(u0.grid.node(i)));
    }
  }
  return radius;
}

State step(const State& state, const PhysParams& params, double dt) {
  if (!(state.u.grid == state.v.grid)) {
    throw std::invalid_argument("step: u and v on different grids");
  }
  validate_common(state.u.grid, params);
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");

  State out = state;
  Work w(state.u.grid.n_points);
  rk4_step(state.u.grid, params, state.t, dt, out.u.values, out.v.values, w);
  out.t = state.t + dt;
  return out;
}

namespace {

struct MarchResult {
  bool blew = false;
  double t_star = 0.0;
};

// One full detection march. Records and snapshots are only collected when
// outcome is non-null; the dt/2 confirmation pass reuses this with no
// collection.
MarchResult run_detection(const Grid& grid, const PhysParams& params,
                          const SolverConfig& config, double dt,
                          std::vector<double>& u, std::vector<double>& v,
                          RunOutcome* outcome) {
  Work w(grid.n_points);
  MarchResult result;

  // A blow-up can overshoot to non-finite values within one step; keep the
  // previous step around so a finite final state can be reported. Only
  // nonlinear runs can trigger, so homogeneous marches skip the copies.
  const bool track_prev = params.nonlinearity.has_value();
  std::vector<double> prev_u, prev_v;
  double prev_t = 0.0;

  auto record_state = [&](double t_now) {
    if (!outcome) return;
    State s{t_now, Field{grid, u}, Field{grid, v}};
    outcome->records.push_back(compute_record(s, params));
  };
  auto snapshot_state = [&](double t_now) {
    if (!outcome || config.snapshot_every == 0) return;
    outcome->snapshots.push_back(State{t_now, Field{grid, u}, Field{grid, v}});
  };

  record_state(0.0);
  snapshot_state(0.0);
  if (track_prev) {
    prev_u = u;
    prev_v = v;
  }

  bool completed = march(
      grid, params, 0.0, config.t_max, dt, u, v, w,
      [&](std::size_t i, double t_now, bool partial) {
        const double linf_v = guarded_linf(v);
        if (linf_v > config.blowup_threshold) {
          result.blew = true;
          result.t_star = t_now;
          if (outcome) {
            const bool finite_now =
                std::isfinite(linf_v) &&
                std::isfinite(guarded_linf(u));
            if (finite_now) {
              outcome->final_state = State{t_now, Field{grid, u}, Field{grid, v}};
            } else if (track_prev) {
              outcome->final_state =
                  State{prev_t, Field{grid, prev_u}, Field{grid, prev_v}};
            }
          }
          return false;
        }
        if (!partial) {
          if (i % config.sample_every == 0) record_state(t_now);
          if (config.snapshot_every != 0 && i % config.snapshot_every == 0) {
            snapshot_state(t_now);
          }
        }
        if (track_prev) {
          prev_u = u;
          prev_v = v;
          prev_t = t_now;
        }
        return true;
      });

  if (completed && outcome) {
    outcome->final_state = State{config.t_max, Field{grid, u}, Field{grid, v}};
  }
  return result;
}

}  // namespace

RunOutcome evolve(const Field& u0, const Field& u1, const PhysParams& params,
                  const SolverConfig& config) {
  if (!(u0.grid == u1.grid)) {
    throw std::invalid_argument("evolve: u0 and u1 on different grids");
  }
  const Grid& grid = u0.grid;
  validate_common(grid, params);
  validate_cfl(config.cfl);
  if (!(config.t_max > 0.0)) throw std::invalid_argument("evolve: t_max must be positive");
  if (config.sample_every == 0) {
    throw std::invalid_argument("evolve: sample_every must be at least 1");
  }
  if (!(config.blowup_threshold > 0.0)) {
    throw std::invalid_argument("evolve: blowup_threshold must be positive");
  }

  // Waves travel at unit speed, so this margin keeps the Dirichlet cutoff
  // outside every influence cone through the whole run.
  const double needed = data_support_radius(u0, u1) + config.t_max + 2.0;
  if (grid.extent + 1e-9 < needed) {
    throw std::invalid_argument(
        "evolve: grid extent below data support + t_max + 2");
  }

  const double dt = config.cfl * grid.spacing;

  RunOutcome outcome;
  std::vector<double> u = u0.values;
  std::vector<double> v = u1.values;
  MarchResult coarse = run_detection(grid, params, config, dt, u, v, &outcome);

  if (!coarse.blew) {
    outcome.classification = Classification::global_to_horizon;
    return outcome;
  }

  if (!config.confirm_refinement) {
    outcome.classification = Classification::blowup;
    outcome.t_star = coarse.t_star;
    return outcome;
  }

  std::vector<double> u2 = u0.values;
  std::vector<double> v2 = u1.values;
  MarchResult fine =
      run_detection(grid, params, config, 0.5 * dt, u2, v2, nullptr);

  const bool agrees =
      fine.blew && std::abs(fine.t_star - coarse.t_star) <=
                       0.05 * std::max(fine.t_star, coarse.t_star);
  if (agrees) {
    outcome.classification = Classification::blowup;
    outcome.t_star = coarse.t_star;
  } else {
    outcome.classification = Classification::inconclusive;
  }
  return outcome;
}

State propagate_homogeneous(double s, double t,
                            const std::pair<Field, Field>& data,
                            const PhysParams& params, double cfl) {
  if (params.nonlinearity) {
    throw std::invalid_argument("propagate_homogeneous: params must be homogeneous");
  }
  if (!(t >= s)) throw std::invalid_argument("propagate_homogeneous: needs t >= s");
  if (!(data.first.grid == data.second.grid)) {
    throw std::invalid_argument("propagate_homogeneous: fields on different grids");
  }
  validate_common(data.first.grid, params);
  validate_cfl(cfl);

  State out{t, data.first, data.second};
  if (t == s) return out;

  const Grid& grid = data.first.grid;
  const double dt = cfl * grid.spacing;
  Work w(grid.n_points);
  march(grid, params, s, t, dt, out.u.values, out.v.values, w,
        [](std::size_t, double, bool) { return true; });
  return out;
}

double duhamel_residual(const RunOutcome& outcome, const PhysParams& params,
                        std::size_t n_quad, double cfl) {
  if (!outcome.final_state) {
    throw std::invalid_argument("duhamel_residual: outcome has no final state");
  }
  const State& final_state = *outcome.final_state;
  const double tfin = final_state.t;
  if (!(tfin > 0.0)) throw std::invalid_argument("duhamel_residual: final time not positive");
  if (outcome.snapshots.empty() ||
      !(std::abs(outcome.snapshots.front().t) <= 1e-12)) {
    throw std::invalid_argument(
        "duhamel_residual: snapshots must start with the initial state");
  }

  const Grid& grid = final_state.u.grid;
  PhysParams hom = params;
  hom.nonlinearity.reset();

  const State& init = outcome.snapshots.front();
  State rterm = propagate_homogeneous(0.0, tfin, {init.u, init.v}, hom, cfl);
  std::vector<double> acc = std::move(rterm.u.values);

  if (params.nonlinearity) {
    if (n_quad < 2) {
      throw std::invalid_argument("duhamel_residual: n_quad must be at least 2");
    }
    if (outcome.snapshots.size() < 2) {
      throw std::invalid_argument("duhamel_residual: insufficient stored snapshots");
    }

    // Interpolation table over the stored states, extended by the final
    // state when it lies past the last snapshot.
    std::vector<const State*> table;
    table.reserve(outcome.snapshots.size() + 1);
    for (const State& s : outcome.snapshots) table.push_back(&s);
    if (final_state.t > table.back()->t + 1e-12) table.push_back(&final_state);

    std::vector<double> vq(grid.n_points);
    const NonlinearitySpec& nl = *params.nonlinearity;
    const double wbase = tfin / static_cast<double>(n_quad);

    // j = n_quad contributes nothing: forcing injected at the final time has
    // not yet entered u.
    for (std::size_t j = 0; j < n_quad; ++j) {
      const double sj = tfin * static_cast<double>(j) / static_cast<double>(n_quad);
      std::size_t hi = 1;
      while (hi + 1 < table.size() && table[hi]->t < sj) ++hi;
      const State& a = *table[hi - 1];
      const State& b = *table[hi];
      const double lam = std::clamp((sj - a.t) / (b.t - a.t), 0.0, 1.0);
      for (std::size_t i = 0; i < grid.n_points; ++i) {
        vq[i] = (1.0 - lam) * a.v.values[i] + lam * b.v.values[i];
      }

      Field g = apply_nonlinearity(Field{grid, vq}, nl);
      State contrib =
          propagate_homogeneous(sj, tfin, {make_field(grid), g}, hom, cfl);
      const double wj = (j == 0) ? 0.5 * wbase : wbase;
      for (std::size_t i = 0; i < grid.n_points; ++i) {
        acc[i] += wj * contrib.u.values[i];
      }
    }
  }

  Field diff{grid, std::move(acc)};
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    diff.values[i] -= final_state.u.values[i];
  }
  const double num = l2_norm(diff);
  const double den = l2_norm(final_state.u);
  return (den > 0.0) ? num / den : num;
}

}  // namespace nlwave
