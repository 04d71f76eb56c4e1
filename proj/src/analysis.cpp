#include "nlwave/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace nlwave {

DecayFit fit_decay(const std::vector<std::pair<double, double>>& series,
                   FitWindow window) {
  if (!(window.t_min >= 1.0)) {
    throw std::invalid_argument("fit_decay: window must start at t >= 1");
  }
  if (!(window.t_max > window.t_min)) {
    throw std::invalid_argument("fit_decay: empty window");
  }

  std::vector<double> xs, ys;
  for (const auto& [t, value] : series) {
    if (t < window.t_min || t > window.t_max) continue;
    if (!(value > 0.0)) {
      throw std::domain_error("fit_decay: nonpositive value inside the window");
    }
    xs.push_back(std::log1p(t));
    ys.push_back(std::log(value));
  }
  if (xs.size() < 10) {
    throw std::invalid_argument("fit_decay: fewer than 10 samples in the window");
  }

  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  if (!(std::abs(denom) > 0.0)) {
    throw std::domain_error("fit_decay: degenerate abscissas");
  }

  DecayFit fit;
  fit.window = window;
  fit.exponent = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.exponent * sx) / n;

  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.exponent * xs[i]);
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / n);
  return fit;
}

FitWindow default_fit_window(double horizon) {
  if (!(horizon > 10.0)) {
    throw std::invalid_argument("default_fit_window: horizon must exceed 10");
  }
  return FitWindow{std::max(10.0, horizon / 20.0), horizon};
}

double glassey_exponent(int n) {
  if (n <= 1) {
    throw std::invalid_argument(
        "glassey_exponent: undefined for n <= 1 (no 1/(n-1) scaling)");
  }
  return 1.0 + 2.0 / static_cast<double>(n - 1);
}

double shifted_glassey(int n, double mu) {
  const double shifted = static_cast<double>(n - 1) + mu;
  if (!(shifted > 0.0)) {
    throw std::invalid_argument("shifted_glassey: needs n - 1 + mu > 0");
  }
  return 1.0 + 2.0 / shifted;
}

ThresholdCondition predicted_existence_threshold(int n, double mu) {
  if (!(mu > 0.0)) {
    throw std::invalid_argument("predicted_existence_threshold: mu must be positive");
  }
  if (n == 1) {
    return ThresholdCondition{1.0 + 2.0 / std::min(mu, 2.0), true};
  }
  if (n == 2 || n == 3) {
    if (mu <= 1.0) return ThresholdCondition{1.0 + 2.0 / mu, true};
    return ThresholdCondition{3.0, false};
  }
  throw std::invalid_argument("predicted_existence_threshold: n must be 1, 2 or 3");
}

namespace {

// The mu = 2 diagnostics need an eta small enough for the decay weight to
// stay below the nonlinearity's scaling margin; cap at the default 0.5.
double eta_for_cell(double mu, double p, double base_eta) {
  if (mu != 2.0 || !(p > 2.0)) return base_eta;
  return std::min(0.5, (p - 2.0) / (p - 1.0));
}

SweepCell compute_cell(double mu, double p, double eps, const SweepBase& base) {
  SweepCell cell;
  cell.mu = mu;
  cell.p = p;
  try {
    PhysParams params;
    params.mu = mu;
    params.nonlinearity = NonlinearitySpec{base.kind, p};
    params.dim_mode = base.grid.dim_mode;
    params.eta = eta_for_cell(mu, p, base.eta);

    auto [u0, u1] = initial_data(base.family, eps, base.width, base.grid,
                                 base.which);
    RunOutcome outcome = evolve(u0, u1, params, base.solver);
    cell.classification = outcome.classification;
    cell.t_star = outcome.t_star;

    if (outcome.classification == Classification::global_to_horizon) {
      std::vector<std::pair<double, double>> series;
      series.reserve(outcome.records.size());
      for (const EnergyRecord& r : outcome.records) {
        if (r.bundle > 0.0) series.emplace_back(r.t, std::sqrt(r.bundle));
      }
      try {
        cell.fit = fit_decay(series, default_fit_window(base.solver.t_max));
      } catch (const std::exception&) {
        // A decaying-to-zero or too sparse series just leaves the cell unfit.
      }
    }
  } catch (const std::exception& e) {
    cell.classification = Classification::inconclusive;
    cell.t_star.reset();
    cell.fit.reset();
    cell.error = e.what();
  }
  return cell;
}

}  // namespace

SweepResult run_sweep(const std::vector<double>& mu_values,
                      const std::vector<double>& p_values, double eps,
                      const SweepBase& base, std::size_t n_threads) {
  if (mu_values.empty()) throw std::invalid_argument("run_sweep: empty mu grid");
  if (p_values.empty()) throw std::invalid_argument("run_sweep: empty p grid");
  if (!std::is_sorted(p_values.begin(), p_values.end())) {
    throw std::invalid_argument("run_sweep: p_values must be sorted ascending");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("run_sweep: eps must be positive");
  if (n_threads == 0) n_threads = 1;

  const std::size_t n_cells = mu_values.size() * p_values.size();
  SweepResult result;
  result.cells.resize(n_cells);

  // Static round-robin partition; every worker owns disjoint slots, and the
  // (mu, p) ordering of the result never depends on the thread count.
  auto worker = [&](std::size_t first) {
    for (std::size_t idx = first; idx < n_cells; idx += n_threads) {
      const double mu = mu_values[idx / p_values.size()];
      const double p = p_values[idx % p_values.size()];
      result.cells[idx] = compute_cell(mu, p, eps, base);
    }
  };

  if (n_threads == 1 || n_cells == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t k = 0; k < std::min(n_threads, n_cells); ++k) {
      pool.emplace_back(worker, k);
    }
    for (std::thread& th : pool) th.join();
  }

  // Monotonicity pass: within a row, a blow-up after a global cell is
  // not trusted, only flagged.
  for (std::size_t row = 0; row < mu_values.size(); ++row) {
    bool seen_global = false;
    for (std::size_t col = 0; col < p_values.size(); ++col) {
      SweepCell& cell = result.cells[row * p_values.size() + col];
      if (cell.classification == Classification::global_to_horizon) {
        seen_global = true;
      } else if (cell.classification == Classification::blowup && seen_global) {
        cell.classification = Classification::inconclusive;
        cell.error = "blowup above a global cell; monotonicity violated";
      }
    }
  }

  for (std::size_t row = 0; row < mu_values.size(); ++row) {
    BoundaryBracket bracket;
    bracket.mu = mu_values[row];
    std::size_t n_blow = 0, n_global = 0;
    for (std::size_t col = 0; col + 1 < p_values.size(); ++col) {
      const SweepCell& lo = result.cells[row * p_values.size() + col];
      const SweepCell& hi = result.cells[row * p_values.size() + col + 1];
      if (!bracket.bracket &&
          lo.classification == Classification::blowup &&
          hi.classification == Classification::global_to_horizon) {
        bracket.bracket = std::make_pair(lo.p, hi.p);
      }
    }
    for (std::size_t col = 0; col < p_values.size(); ++col) {
      const SweepCell& cell = result.cells[row * p_values.size() + col];
      if (cell.classification == Classification::blowup) ++n_blow;
      if (cell.classification == Classification::global_to_horizon) ++n_global;
    }
    if (!bracket.bracket) {
      if (n_blow == p_values.size()) {
        bracket.open_flag = "all_blowup";
      } else if (n_global == p_values.size()) {
        bracket.open_flag = "all_global";
      } else {
        bracket.open_flag = "no_flip";
      }
    }
    result.boundaries.push_back(bracket);
  }

  return result;
}

}  // namespace nlwave
