#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlwave/integrator.hpp"

namespace nlwave {

struct FitWindow {
  double t_min = 0.0;
  double t_max = 0.0;
};

// Power-law fit value ~ A (1+t)^exponent, least squares in
// (log(1+t), log value) over the window.
struct DecayFit {
  double exponent = 0.0;
  double intercept = 0.0;  // log A
  FitWindow window;
  double rms_residual = 0.0;
};

DecayFit fit_decay(const std::vector<std::pair<double, double>>& series,
                   FitWindow window);

// [max(10, horizon/20), horizon]: late enough to clear the transient.
FitWindow default_fit_window(double horizon);

// 1 + 2/(n-1); meaningless in one space dimension (throws for n <= 1).
double glassey_exponent(int n);

// 1 + 2/(n-1+mu): the Glassey exponent at the damping-shifted dimension.
double shifted_glassey(int n, double mu);

struct ThresholdCondition {
  double threshold = 0.0;
  bool strict = true;  // p > threshold if strict, p >= threshold otherwise
};

// Smallest power for which small-data global existence is expected:
//   n = 1:     p > 1 + 2/min(mu, 2)
//   n = 2, 3:  p > 1 + 2/mu for mu <= 1;  p >= 3 for mu > 1
ThresholdCondition predicted_existence_threshold(int n, double mu);

struct SweepCell {
  double mu = 0.0;
  double p = 0.0;
  Classification classification = Classification::inconclusive;
  std::optional<double> t_star;
  std::optional<DecayFit> fit;  // decay of sqrt(bundle), global cells only
  std::string error;            // nonempty if the cell run failed
};

struct BoundaryBracket {
  double mu = 0.0;
  // First adjacent (p_blowup, p_global) flip in ascending p.
  std::optional<std::pair<double, double>> bracket;
  // "all_blowup", "all_global" or "no_flip" when no bracket exists.
  std::string open_flag;
};

struct SweepResult {
  std::vector<SweepCell> cells;  // ordered mu-major, p ascending
  std::vector<BoundaryBracket> boundaries;
};

// Everything a sweep cell needs besides (mu, p, eps).
struct SweepBase {
  Grid grid;
  DataFamily family = DataFamily::compact_bump;
  double width = 1.0;
  DataWhich which = DataWhich::both;
  NonlinearityKind kind = NonlinearityKind::unsigned_power;
  double eta = 0.5;
  SolverConfig solver;
};

// Runs the (mu, p) grid of classification runs. Within a row, once a cell
// is global at some p, a blow-up at a larger p contradicts the expected
// monotonicity and is downgraded to inconclusive rather than accepted.
// Cells are computed in parallel over n_threads; assembly order is fixed,
// so results do not depend on thread count.
SweepResult run_sweep(const std::vector<double>& mu_values,
                      const std::vector<double>& p_values, double eps,
                      const SweepBase& base, std::size_t n_threads = 1);

}  // namespace nlwave
