#include "nlwave/energy.hpp"

#include <cmath>
#include <stdexcept>

#include "nlwave/operators.hpp"

namespace nlwave {

MuRegime mu_regime(double mu) {
  if (mu < 2.0) return MuRegime::below_two;
  if (mu > 2.0) return MuRegime::above_two;
  return MuRegime::at_two;
}

namespace {

void validate_params(const PhysParams& params) {
  if (!(params.mu >= 0.0) || !std::isfinite(params.mu)) {
    throw std::invalid_argument("energy: mu must be nonnegative and finite");
  }
  if (mu_regime(params.mu) == MuRegime::at_two &&
      !(params.eta > 0.0 && params.eta < 2.0)) {
    throw std::invalid_argument("energy: eta must lie in (0, 2) when mu == 2");
  }
}

double regime_functional(const EnergyRecord& r, MuRegime regime) {
  std::optional<double> v;
  switch (regime) {
    case MuRegime::below_two: v = r.E2; break;
    case MuRegime::above_two: v = r.E4; break;
    case MuRegime::at_two: v = r.E6; break;
  }
  if (!v) throw std::invalid_argument("energy: record lacks the regime functional");
  return *v;
}

void check_uniform_sampling(const std::vector<EnergyRecord>& records) {
  const double dt0 = records[1].t - records[0].t;
  if (!(dt0 > 0.0)) throw std::invalid_argument("energy: record times not increasing");
  for (std::size_t k = 1; k + 1 < records.size(); ++k) {
    const double dt = records[k + 1].t - records[k].t;
    if (std::abs(dt - dt0) > 1e-9 * dt0) {
      throw std::invalid_argument("energy: records not uniformly sampled");
    }
  }
}

}  // namespace

EnergyRecord compute_record(const State& state, const PhysParams& params) {
  validate_params(params);
  if (!(state.u.grid == state.v.grid)) {
    throw std::invalid_argument("compute_record: u and v on different grids");
  }

  EnergyRecord r;
  r.t = state.t;
  const double w = 1.0 + state.t;

  r.l2_u = l2_norm(state.u);
  r.l2_v = l2_norm(state.v);
  r.l2_grad_u = l2_norm(gradient(state.u));
  r.linf_v = linf_norm(state.v);
  r.E0 = 0.5 * (r.l2_grad_u * r.l2_grad_u + r.l2_v * r.l2_v);

  const double uv = inner_product(state.u, state.v);
  const double u2 = r.l2_u * r.l2_u;
  const double mu = params.mu;

  switch (mu_regime(mu)) {
    case MuRegime::below_two:
      r.E1 = uv + u2 / (2.0 * w);
      r.E2 = r.E0 + mu / (2.0 * w) * *r.E1;
      r.lyapunov = std::pow(w, mu) * *r.E2;
      break;
    case MuRegime::above_two:
      r.E3 = uv + (mu - 1.0) * u2 / (2.0 * w);
      r.E4 = r.E0 + *r.E3 / w;
      r.lyapunov = w * w * *r.E4;
      break;
    case MuRegime::at_two: {
      const double eta = params.eta;
      r.E5 = uv + (1.0 + eta) * u2 / (2.0 * w);
      r.E6 = r.E0 + (2.0 - eta) / (2.0 * w) * *r.E5;
      r.lyapunov = std::pow(w, 2.0 - eta) * *r.E6;
      break;
    }
  }

  r.bundle = u2 / (w * w) + r.l2_v * r.l2_v + r.l2_grad_u * r.l2_grad_u;
  return r;
}

std::vector<double> lyapunov_residual(const std::vector<EnergyRecord>& records,
                                      const PhysParams& params) {
  validate_params(params);
  if (records.size() < 3) {
    throw std::invalid_argument("lyapunov_residual: needs at least 3 records");
  }
  check_uniform_sampling(records);

  const MuRegime regime = mu_regime(params.mu);
  const double mu = params.mu;
  const double eta = params.eta;
  const double dt = records[1].t - records[0].t;

  std::vector<double> res;
  res.reserve(records.size() - 2);
  for (std::size_t k = 1; k + 1 < records.size(); ++k) {
    const EnergyRecord& r = records[k];
    const double w = 1.0 + r.t;
    const double u2 = r.l2_u * r.l2_u;
    const double v2 = r.l2_v * r.l2_v;
    const double dE = (regime_functional(records[k + 1], regime) -
                       regime_functional(records[k - 1], regime)) /
                      (2.0 * dt);
    double value = 0.0;
    switch (regime) {
      case MuRegime::below_two:
        value = dE + mu / w * *r.E2 + mu * (2.0 - mu) / (4.0 * w * w * w) * u2;
        break;
      case MuRegime::above_two:
        value = dE + 2.0 / w * *r.E4 + (mu - 2.0) / w * v2;
        break;
      case MuRegime::at_two:
        value = dE + (2.0 - eta) / w * *r.E6 +
                eta * (1.0 + eta) * (2.0 - eta) / (4.0 * w * w * w) * u2 +
                eta / w * v2;
        break;
    }
    res.push_back(value);
  }
  return res;
}

bool lyapunov_monotone(const std::vector<EnergyRecord>& records,
                       const PhysParams& params, double rel_slack) {
  validate_params(params);
  if (records.size() < 2) {
    throw std::invalid_argument("lyapunov_monotone: needs at least 2 records");
  }
  for (std::size_t k = 0; k + 1 < records.size(); ++k) {
    const double prev = records[k].lyapunov;
    const double next = records[k + 1].lyapunov;
    if (next > prev + rel_slack * std::abs(prev)) return false;
  }
  return true;
}

std::pair<double, double> equivalence_constants(
    const std::vector<EnergyRecord>& records, const PhysParams& params) {
  validate_params(params);
  if (records.empty()) {
    throw std::invalid_argument("equivalence_constants: no records");
  }
  const MuRegime regime = mu_regime(params.mu);
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const EnergyRecord& r : records) {
    const double e = regime_functional(r, regime);
    if (e <= 0.0) {
      throw std::domain_error(
          "equivalence_constants: regime functional vanishes at a record");
    }
    const double ratio = r.bundle / e;
    if (first) {
      lo = hi = ratio;
      first = false;
    } else {
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  }
  return {lo, hi};
}

DecayLaw decay_law(const PhysParams& params) {
  validate_params(params);
  if (!(params.mu > 0.0)) {
    throw std::invalid_argument("decay_law: mu must be positive");
  }
  DecayLaw law;
  law.alpha = std::min(params.mu, 2.0);
  switch (mu_regime(params.mu)) {
    case MuRegime::below_two: law.alpha0 = params.mu; break;
    case MuRegime::at_two: law.alpha0 = 2.0 - params.eta; break;
    case MuRegime::above_two: law.alpha0 = 2.0; break;
  }
  law.predicted_energy_exponent = -law.alpha0;
  law.predicted_norm_exponent = -0.5 * law.alpha0;
  return law;
}

DerivedRecord derived_record(const State& state) {
  DerivedRecord d;
  d.t = state.t;
  const Field grad_v = gradient(state.v);
  const Field lap_u = laplacian(state.u);
  const Field lap_v = laplacian(state.v);
  const Field grad_lap_u = gradient(lap_u);
  const double gv = l2_norm(grad_v);
  const double lu = l2_norm(lap_u);
  const double lv = l2_norm(lap_v);
  const double glu = l2_norm(grad_lap_u);
  d.grad_level = std::sqrt(gv * gv + lu * lu);
  d.lap_level = std::sqrt(lv * lv + glu * glu);
  return d;
}

}  // namespace nlwave
