#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "nlwave/grid.hpp"
#include "nlwave/physics.hpp"

namespace nlwave {

// The weighted-energy construction changes shape at mu = 2.
enum class MuRegime { below_two, at_two, above_two };

MuRegime mu_regime(double mu);

// Scalar diagnostics of one state. E0 is the plain energy
//   E0 = 1/2 int (|grad u|^2 + v^2).
// Exactly one auxiliary pair is populated, by regime:
//   mu < 2:  E1 = int (u v + u^2/(2(1+t))),          E2 = E0 + mu/(2(1+t)) E1
//   mu > 2:  E3 = int (u v + (mu-1) u^2/(2(1+t))),   E4 = E0 + E3/(1+t)
//   mu = 2:  E5 = int (u v + (1+eta) u^2/(2(1+t))),  E6 = E0 + (2-eta)/(2(1+t)) E5
// lyapunov carries the matching weighted functional:
//   (1+t)^mu E2   |   (1+t)^2 E4   |   (1+t)^{2-eta} E6
// bundle = l2_u^2/(1+t)^2 + l2_v^2 + l2_grad_u^2 is the decay quantity.
struct EnergyRecord {
  double t = 0.0;
  double l2_u = 0.0;
  double l2_v = 0.0;
  double l2_grad_u = 0.0;
  double linf_v = 0.0;
  double E0 = 0.0;
  std::optional<double> E1, E2;
  std::optional<double> E3, E4;
  std::optional<double> E5, E6;
  double lyapunov = 0.0;
  double bundle = 0.0;
};

// Predicted decay rates: alpha = min(mu, 2); alpha0 = mu for mu < 2,
// 2 - eta at mu = 2, and 2 for mu > 2. The bundle is expected to decay like
// (1+t)^{-alpha0}, hence exponent -alpha0 for squared norms and -alpha0/2
// for the norms themselves.
struct DecayLaw {
  double alpha = 0.0;
  double alpha0 = 0.0;
  double predicted_energy_exponent = 0.0;
  double predicted_norm_exponent = 0.0;
};

EnergyRecord compute_record(const State& state, const PhysParams& params);

// Residual of the differential identity satisfied by the regime functional,
// evaluated at interior records by central differencing in t. Requires a
// uniformly sampled record list; the two endpoint records are skipped.
// For smooth homogeneous runs the residual is O(dt^2 + dx^2).
std::vector<double> lyapunov_residual(const std::vector<EnergyRecord>& records,
                                      const PhysParams& params);

// True iff the lyapunov column is nonincreasing up to a per-sample relative
// slack.
bool lyapunov_monotone(const std::vector<EnergyRecord>& records,
                       const PhysParams& params, double rel_slack = 1e-6);

// (min, max) over records of bundle / regime functional. Errors if the
// regime functional vanishes at some record.
std::pair<double, double> equivalence_constants(
    const std::vector<EnergyRecord>& records, const PhysParams& params);

DecayLaw decay_law(const PhysParams& params);

// Norm bundles of the differentiated fields, for derivative-level decay
// fits: the same decay law is expected of grad u and Lap u because both
// satisfy the homogeneous equation again.
struct DerivedRecord {
  double t = 0.0;
  double grad_level = 0.0;  // sqrt(||grad v||^2 + ||Lap u||^2)
  double lap_level = 0.0;   // sqrt(||Lap v||^2 + ||grad Lap u||^2)
};

DerivedRecord derived_record(const State& state);

}  // namespace nlwave
