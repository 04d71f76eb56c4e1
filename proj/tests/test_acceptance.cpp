// Acceptance gate: eight end-to-end criteria, one printed line each.
// Exit status is the number of failed criteria, so the test harness fails
// when any criterion does. Tolerances are pinned in code next to each check.

#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "nlwave/analysis.hpp"
#include "nlwave/energy.hpp"
#include "nlwave/integrator.hpp"
#include "nlwave/operators.hpp"
#include "test_support.hpp"

using namespace nlwave;

namespace {

double difference_ratio(double a, double b, double p, DifferenceVariant variant) {
  const double pa = std::pow(std::abs(a), p - 1.0);
  const double pb = std::pow(std::abs(b), p - 1.0);
  const double rhs = (pa + pb) * std::abs(a - b);
  if (rhs == 0.0) return 0.0;
  const double lhs = (variant == DifferenceVariant::abs_power)
                         ? std::abs(pa * std::abs(a) - pb * std::abs(b))
                         : std::abs(pa * a - pb * b);
  return lhs / rhs;
}

struct DecayCase {
  double mu;
  double eta;
  double want;      // predicted norm exponent -alpha0/2
  bool one_sided;   // at mu = 2 the prediction is an upper bound on the rate
  PhysParams params;
  RunOutcome run;
};

RunOutcome horizon_run(double mu, double eta, double t_max, double h,
                       std::size_t snapshot_every) {
  const double extent = 1.0 + t_max + 2.0;
  const std::size_t n =
      static_cast<std::size_t>(std::llround(2.0 * extent / h)) + 1;
  const Grid g = make_grid(DimMode::line1d, extent, n);
  auto data = initial_data(DataFamily::compact_bump, 1.0, 1.0, g, DataWhich::both);
  PhysParams params;
  params.mu = mu;
  params.eta = eta;
  SolverConfig config;
  config.t_max = t_max;
  config.snapshot_every = snapshot_every;
  return evolve(data.first, data.second, params, config);
}

double fit_series_exponent(const std::vector<std::pair<double, double>>& series,
                           double t_max) {
  return fit_decay(series, default_fit_window(t_max)).exponent;
}

double norm_level_exponent(const RunOutcome& run, double t_max) {
  std::vector<std::pair<double, double>> series;
  for (const EnergyRecord& r : run.records) {
    const double level = std::sqrt(r.l2_grad_u * r.l2_grad_u + r.l2_v * r.l2_v);
    if (level > 0.0) series.emplace_back(r.t, level);
  }
  return fit_series_exponent(series, t_max);
}

double max_abs_residual(const std::vector<EnergyRecord>& records,
                        const PhysParams& params) {
  double m = 0.0;
  for (double r : lyapunov_residual(records, params)) m = std::max(m, std::abs(r));
  return m;
}

bool report(int index, const char* name, bool pass, const std::string& detail) {
  std::printf("ACCEPTANCE %d %s: %s (%s)\n", index, name, pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  return pass;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", x);
  return buf;
}

}  // namespace

int main() {
  int failures = 0;
  const double kHorizon = 200.0;
  const double kSpacing = 0.1;

  // Shared homogeneous long-horizon runs: one per damping regime point.
  std::vector<DecayCase> cases = {
      {0.5, 0.5, -0.25, false, {}, {}},
      {1.0, 0.5, -0.50, false, {}, {}},
      {1.5, 0.5, -0.75, false, {}, {}},
      {3.0, 0.5, -1.00, false, {}, {}},
      {2.0, 0.5, -0.75, true, {}, {}},
  };
  for (DecayCase& c : cases) {
    // The mu = 1 run doubles as the snapshot source for criterion 4.
    const std::size_t snap = (c.mu == 1.0) ? 250 : 0;
    c.run = horizon_run(c.mu, c.eta, kHorizon, kSpacing, snap);
    c.params.mu = c.mu;
    c.params.eta = c.eta;
  }

  // 1. Fitted exponent of |(grad u, d_t u)| vs the predicted -alpha0/2,
  //    window [10, 200], tolerance 0.1 (upper bound only at mu = 2).
  {
    bool pass = true;
    std::string detail;
    for (const DecayCase& c : cases) {
      const double expnt = norm_level_exponent(c.run, kHorizon);
      const bool ok = c.one_sided ? (expnt <= c.want + 0.1)
                                  : (std::abs(expnt - c.want) <= 0.1);
      pass = pass && ok;
      if (!detail.empty()) detail += ", ";
      detail += "mu=" + fmt(c.mu) + ": " + fmt(expnt) +
                (c.one_sided ? " <=? " : " ~ ") + fmt(c.want) +
                (ok ? "" : " OFF");
    }
    failures += !report(1, "linear_decay_rates", pass, detail);
  }

  // 2. The regime-weighted functional is nonincreasing along every shared
  //    run, per-sample relative slack 1e-6.
  {
    bool pass = true;
    std::string detail;
    for (const DecayCase& c : cases) {
      const bool ok = lyapunov_monotone(c.run.records, c.params, 1e-6);
      pass = pass && ok;
      if (!detail.empty()) detail += ", ";
      detail += "mu=" + fmt(c.mu) + (ok ? ": ok" : ": uptick");
    }
    failures += !report(2, "lyapunov_monotone", pass, detail);
  }

  // 3. The identity residual of the regime functional shrinks by a factor
  //    in [3, 5] when dx and dt are halved, in all three regimes.
  {
    bool pass = true;
    std::string detail;
    for (auto [mu, eta] : {std::pair{1.0, 0.5}, {3.0, 0.5}, {2.0, 0.5}}) {
      PhysParams params;
      params.mu = mu;
      params.eta = eta;
      const RunOutcome coarse = testsupport::bump_run(mu, eta, 5.0, 0.10, 0.4, 1);
      const RunOutcome fine = testsupport::bump_run(mu, eta, 5.0, 0.05, 0.4, 1);
      const double factor = max_abs_residual(coarse.records, params) /
                            max_abs_residual(fine.records, params);
      const bool ok = factor >= 3.0 && factor <= 5.0;
      pass = pass && ok;
      if (!detail.empty()) detail += ", ";
      detail += "mu=" + fmt(mu) + ": x" + fmt(factor) + (ok ? "" : " OFF");
    }
    failures += !report(3, "identity_residual_order", pass, detail);
  }

  // 4. Derivative-level decay at mu = 1: exponents of |(grad v, lap u)| and
  //    |(lap v, grad lap u)| from the stored snapshots, within 0.15 of -1/2.
  {
    const DecayCase& c = cases[1];
    std::vector<std::pair<double, double>> grad_series, lap_series;
    for (const State& s : c.run.snapshots) {
      const DerivedRecord d = derived_record(s);
      if (d.grad_level > 0.0) grad_series.emplace_back(d.t, d.grad_level);
      if (d.lap_level > 0.0) lap_series.emplace_back(d.t, d.lap_level);
    }
    const double grad_exp = fit_series_exponent(grad_series, kHorizon);
    const double lap_exp = fit_series_exponent(lap_series, kHorizon);
    const bool pass =
        std::abs(grad_exp + 0.5) <= 0.15 && std::abs(lap_exp + 0.5) <= 0.15;
    failures += !report(4, "derivative_level_decay", pass,
                        "grad: " + fmt(grad_exp) + ", lap: " + fmt(lap_exp) +
                            " ~ -0.5 +/- 0.15");
  }

  // 5. Duhamel self-consistency: global nonlinear run at mu=1, p=3.5,
  //    eps=1e-3, T=50. Residual < 5e-2 at n_quad=64, improving by >= 1.8x
  //    at n_quad=128; homogeneous replay at round-off.
  {
    const double extent = 53.0;
    const std::size_t n =
        static_cast<std::size_t>(std::llround(2.0 * extent / 0.1)) + 1;
    const Grid g = make_grid(DimMode::line1d, extent, n);
    auto data = initial_data(DataFamily::compact_bump, 1e-3, 1.0, g, DataWhich::both);

    PhysParams params;
    params.mu = 1.0;
    params.nonlinearity = NonlinearitySpec{NonlinearityKind::unsigned_power, 3.5};
    SolverConfig config;
    config.t_max = 50.0;
    config.snapshot_every = 2;
    const RunOutcome run = evolve(data.first, data.second, params, config);

    PhysParams homog = params;
    homog.nonlinearity.reset();
    SolverConfig sparse = config;
    sparse.snapshot_every = 1u << 30;  // initial snapshot only
    const RunOutcome ho = evolve(data.first, data.second, homog, sparse);

    const double r64 = duhamel_residual(run, params, 64);
    const double r128 = duhamel_residual(run, params, 128);
    const double rho = duhamel_residual(ho, homog, 8);
    const bool pass = run.classification == Classification::global_to_horizon &&
                      r64 < 5e-2 && r64 / r128 >= 1.8 && rho < 1e-10;
    failures += !report(5, "duhamel_consistency", pass,
                        "r64=" + fmt(r64) + ", r64/r128=x" + fmt(r64 / r128) +
                            ", homogeneous=" + fmt(rho));
  }

  // 6. Criticality bracketing at eps = 1e-3, horizon 500: the first
  //    blowup/global flip should land in a bracket of width <= 0.5
  //    containing 1 + 2/mu, with blow-ups confirmed under dt/2.
  {
    SweepBase base;
    const double extent = 503.0;
    const std::size_t n =
        static_cast<std::size_t>(std::llround(2.0 * extent / 0.25)) + 1;
    base.grid = make_grid(DimMode::line1d, extent, n);
    base.solver.t_max = 500.0;

    bool pass = true;
    std::string detail;
    const std::vector<std::pair<double, std::vector<double>>> rows = {
        {1.0, {1.4, 1.6, 2.75, 3.0, 3.25}},
        {2.0, {1.2, 1.4, 1.75, 2.0, 2.25}},
    };
    for (const auto& [mu, p_values] : rows) {
      const double p_crit = 1.0 + 2.0 / mu;
      const SweepResult result = run_sweep({mu}, p_values, 1e-3, base, 4);
      const BoundaryBracket& b = result.boundaries.at(0);
      bool ok = b.bracket.has_value();
      std::string where = "none";
      if (ok) {
        const auto [lo, hi] = *b.bracket;
        where = "[" + fmt(lo) + ", " + fmt(hi) + "]";
        ok = (hi - lo) <= 0.5 && lo <= p_crit && p_crit <= hi;
      } else {
        where += " (" + b.open_flag + ")";
      }
      pass = pass && ok;
      if (!detail.empty()) detail += ", ";
      detail += "mu=" + fmt(mu) + ": bracket " + where + " vs p=" + fmt(p_crit) +
                (ok ? "" : " MISS");
    }
    failures += !report(6, "criticality_bracketing", pass, detail);
  }

  // 7. Inequality property suites. Scalar: 1e6-sample constant calibration
  //    per (p, variant), capped by the mean value theorem at p, then 1e5
  //    fresh samples at 1.1x. Fields: 2000 calibration pairs and 1000 fresh
  //    pairs of strictly positive smooth fields at safety factor 1.5.
  {
    bool pass = true;
    std::string detail;

    int scalar_failures = 0;
    double worst_cstar = 0.0;
    for (double p : {1.5, 2.0, 3.0}) {
      for (DifferenceVariant variant :
           {DifferenceVariant::abs_power, DifferenceVariant::signed_power}) {
        std::mt19937_64 oracle_rng(1234);
        std::uniform_real_distribution<double> dist(-10.0, 10.0);
        double c_star = 0.0;
        for (int k = 0; k < 1000000; ++k) {
          c_star = std::max(c_star, difference_ratio(dist(oracle_rng),
                                                     dist(oracle_rng), p, variant));
        }
        if (!(c_star > 0.0) || c_star > p * (1.0 + 1e-12)) ++scalar_failures;
        worst_cstar = std::max(worst_cstar, c_star / p);
        std::mt19937_64 fresh_rng(4321);
        for (int k = 0; k < 100000; ++k) {
          if (!check_difference_inequality(dist(fresh_rng), dist(fresh_rng), p,
                                           1.1 * c_star, variant)) {
            ++scalar_failures;
          }
        }
      }
    }
    pass = pass && scalar_failures == 0;
    detail += "scalar failures=" + std::to_string(scalar_failures) +
              " (sup C*/p=" + fmt(worst_cstar) + ")";

    int field_failures = 0;
    const Grid g = make_grid(DimMode::line1d, 8.0, 513);
    for (CompositionVariant variant :
         {CompositionVariant::abs_power, CompositionVariant::signed_power}) {
      for (double p : {2.5, 3.0, 4.0}) {
        const bool with_laplacian = p >= 3.0;
        std::mt19937_64 rng_a(1000 + static_cast<int>(10 * p));
        double c_grad = 0.0, c_lap = 0.0;
        for (int k = 0; k < 2000; ++k) {
          const Field u = testsupport::positive_random_field(g, rng_a, 4, 0.0);
          const Field v = testsupport::positive_random_field(g, rng_a, 4, 0.0);
          c_grad = std::max(c_grad, gradient_composition_ratio(u, v, p, variant));
          if (with_laplacian) {
            c_lap = std::max(c_lap, laplacian_composition_ratio(u, v, p, variant));
          }
        }
        if (!(c_grad > 0.0 && c_grad < 2.0 * p * (p - 1.0))) ++field_failures;
        if (with_laplacian && !(c_lap > 0.0 && c_lap < 2.0 * p * (p - 1.0))) {
          ++field_failures;
        }
        std::mt19937_64 rng_b(9000 + static_cast<int>(10 * p));
        for (int k = 0; k < 1000; ++k) {
          const Field u = testsupport::positive_random_field(g, rng_b, 4, 0.0);
          const Field v = testsupport::positive_random_field(g, rng_b, 4, 0.0);
          if (!check_gradient_composition_bound(u, v, p, 1.5 * c_grad, variant)) {
            ++field_failures;
          }
          if (with_laplacian &&
              !check_laplacian_composition_bound(u, v, p, 1.5 * c_lap, variant)) {
            ++field_failures;
          }
        }
      }
    }
    pass = pass && field_failures == 0;
    detail += ", field failures=" + std::to_string(field_failures);
    failures += !report(7, "inequality_suites", pass, detail);
  }

  // 8. Solver order against a 4x-refined reference at mu = 1, and exact
  //    preservation of zero data.
  {
    auto solve = [](double h) {
      const double extent = 8.0;
      const std::size_t n =
          static_cast<std::size_t>(std::llround(2.0 * extent / h)) + 1;
      const Grid g = make_grid(DimMode::line1d, extent, n);
      auto data = initial_data(DataFamily::compact_bump, 1.0, 1.0, g, DataWhich::both);
      PhysParams params;
      params.mu = 1.0;
      return propagate_homogeneous(0.0, 5.0, data, params);
    };
    const State coarse = solve(0.1);
    const State mid = solve(0.05);
    const State ref = solve(0.025);
    auto diff_on_coarse = [&](const State& a, std::size_t stride) {
      double ss = 0.0;
      for (std::size_t i = 0; i < coarse.u.grid.n_points; ++i) {
        const double d = a.u.values[i * stride] - ref.u.values[i * 4];
        ss += d * d;
      }
      return std::sqrt(ss);
    };
    const double order =
        std::log2(diff_on_coarse(coarse, 1) / diff_on_coarse(mid, 2));

    const Grid g = make_grid(DimMode::line1d, 8.0, 161);
    const Field zero = make_field(g);
    PhysParams params;
    params.mu = 1.0;
    params.nonlinearity = NonlinearitySpec{NonlinearityKind::unsigned_power, 2.0};
    SolverConfig config;
    config.t_max = 5.0;
    const RunOutcome zrun = evolve(zero, zero, params, config);
    const double zmax = zrun.final_state
                            ? std::max(linf_norm(zrun.final_state->u),
                                       linf_norm(zrun.final_state->v))
                            : 1.0;

    const bool pass = order >= 1.9 && zmax < 1e-10;
    failures += !report(8, "solver_order", pass,
                        "order=" + fmt(order) + ", zero-data max=" + fmt(zmax));
  }

  std::printf("ACCEPTANCE SUMMARY: %d of 8 criteria failed\n", failures);
  return failures;
}
