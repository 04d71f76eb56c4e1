#include "nlwave/operators.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nlwave {

namespace detail {

void gradient_into(const Grid& grid, const std::vector<double>& f,
                   std::vector<double>& out) {
  const std::size_t n = grid.n_points;
  const double h = grid.spacing;
  out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    out[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
  }
  out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
}

void laplacian_into(const Grid& grid, const std::vector<double>& f,
                    std::vector<double>& out) {
  const std::size_t n = grid.n_points;
  const double h = grid.spacing;
  const double inv_h2 = 1.0 / (h * h);

  if (grid.dim_mode == DimMode::line1d) {
    out[0] = (-2.0 * f[0] + f[1]) * inv_h2;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      out[i] = (f[i - 1] - 2.0 * f[i] + f[i + 1]) * inv_h2;
    }
    out[n - 1] = (f[n - 2] - 2.0 * f[n - 1]) * inv_h2;
    return;
  }

  const double dim = static_cast<double>(grid.spatial_dim());
  // r = 0: even extension gives u_r(0) = 0 and Lap u = n * u_rr(0).
  out[0] = dim * 2.0 * (f[1] - f[0]) * inv_h2;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double r = grid.node(i);
    const double u_rr = (f[i - 1] - 2.0 * f[i] + f[i + 1]) * inv_h2;
    const double u_r = (f[i + 1] - f[i - 1]) / (2.0 * h);
    out[i] = u_rr + (dim - 1.0) / r * u_r;
  }
  const double r_last = grid.node(n - 1);
  const double u_rr_last = (f[n - 2] - 2.0 * f[n - 1]) * inv_h2;
  const double u_r_last = (0.0 - f[n - 2]) / (2.0 * h);
  out[n - 1] = u_rr_last + (dim - 1.0) / r_last * u_r_last;
}

}  // namespace detail

double apply_nonlinearity(double v, const NonlinearitySpec& spec) {
  if (!(spec.p > 1.0)) throw std::invalid_argument("apply_nonlinearity: p must exceed 1");
  const double a = std::abs(v);
  if (spec.kind == NonlinearityKind::unsigned_power) return std::pow(a, spec.p);
  return std::pow(a, spec.p - 1.0) * v;
}

Field apply_nonlinearity(const Field& v, const NonlinearitySpec& spec) {
  if (!(spec.p > 1.0)) throw std::invalid_argument("apply_nonlinearity: p must exceed 1");
  Field out = v;
  const double p = spec.p;
  if (spec.kind == NonlinearityKind::unsigned_power) {
    for (double& x : out.values) x = std::pow(std::abs(x), p);
  } else {
    for (double& x : out.values) x = std::pow(std::abs(x), p - 1.0) * x;
  }
  return out;
}

Field gradient(const Field& f) {
  if (f.grid.n_points < 3) throw std::invalid_argument("gradient: grid too small");
  Field out = make_field(f.grid);
  detail::gradient_into(f.grid, f.values, out.values);
  return out;
}

Field laplacian(const Field& f) {
  if (f.grid.n_points < 3) throw std::invalid_argument("laplacian: grid too small");
  Field out = make_field(f.grid);
  detail::laplacian_into(f.grid, f.values, out.values);
  return out;
}

bool check_difference_inequality(double a, double b, double p, double C,
                                 DifferenceVariant variant) {
  if (!(p > 1.0)) throw std::invalid_argument("check_difference_inequality: p must exceed 1");
  const double pa = std::pow(std::abs(a), p - 1.0);
  const double pb = std::pow(std::abs(b), p - 1.0);
  double lhs;
  if (variant == DifferenceVariant::abs_power) {
    lhs = std::abs(pa * std::abs(a) - pb * std::abs(b));
  } else {
    lhs = std::abs(pa * a - pb * b);
  }
  return lhs <= C * (pa + pb) * std::abs(a - b);
}

namespace {

constexpr double kNearZero = 1e-8;

NonlinearitySpec power_map(CompositionVariant variant, double p) {
  NonlinearitySpec s;
  s.kind = (variant == CompositionVariant::abs_power)
               ? NonlinearityKind::unsigned_power
               : NonlinearityKind::signed_power;
  s.p = p;
  return s;
}

struct BoundScan {
  double max_ratio = 0.0;  // sup of LHS / RHS over admitted nodes
  bool degenerate = false; // some node had RHS == 0 with LHS > 0
};

template <typename LhsFn, typename RhsFn>
BoundScan scan_bound(const Grid& grid, const std::vector<double>& u,
                     const std::vector<double>& v, LhsFn lhs_at, RhsFn rhs_at) {
  BoundScan scan;
  for (std::size_t i = 1; i + 1 < grid.n_points; ++i) {
    if (std::min(std::abs(u[i]), std::abs(v[i])) < kNearZero) continue;
    const double lhs = lhs_at(i);
    const double rhs = rhs_at(i);
    if (rhs == 0.0) {
      if (lhs > 0.0) scan.degenerate = true;
      continue;
    }
    scan.max_ratio = std::max(scan.max_ratio, lhs / rhs);
  }
  return scan;
}

BoundScan gradient_bound_scan(const Field& u, const Field& v, double p,
                              CompositionVariant variant) {
  if (!(u.grid == v.grid)) throw std::invalid_argument("composition bound: grid mismatch");
  if (!(p >= 2.0)) throw std::invalid_argument("gradient composition bound: needs p >= 2");
  const Grid& g = u.grid;
  const NonlinearitySpec map = power_map(variant, p);

  std::vector<double> fu = apply_nonlinearity(u, map).values;
  std::vector<double> fv = apply_nonlinearity(v, map).values;
  std::vector<double> dfu(g.n_points), dfv(g.n_points), du(g.n_points), dv(g.n_points);
  detail::gradient_into(g, fu, dfu);
  detail::gradient_into(g, fv, dfv);
  detail::gradient_into(g, u.values, du);
  detail::gradient_into(g, v.values, dv);

  auto lhs_at = [&](std::size_t i) { return std::abs(dfu[i] - dfv[i]); };
  auto rhs_at = [&](std::size_t i) {
    const double au = std::abs(u.values[i]);
    const double av = std::abs(v.values[i]);
    return std::pow(au, p - 1.0) * std::abs(du[i] - dv[i]) +
           std::abs(dv[i]) * (std::pow(au, p - 2.0) + std::pow(av, p - 2.0)) *
               std::abs(u.values[i] - v.values[i]);
  };
  return scan_bound(g, u.values, v.values, lhs_at, rhs_at);
}

BoundScan laplacian_bound_scan(const Field& u, const Field& v, double p,
                               CompositionVariant variant) {
  if (!(u.grid == v.grid)) throw std::invalid_argument("composition bound: grid mismatch");
  if (!(p >= 3.0)) throw std::invalid_argument("laplacian composition bound: needs p >= 3");
  const Grid& g = u.grid;
  const NonlinearitySpec map = power_map(variant, p);

  std::vector<double> fu = apply_nonlinearity(u, map).values;
  std::vector<double> fv = apply_nonlinearity(v, map).values;
  std::vector<double> lfu(g.n_points), lfv(g.n_points), lu(g.n_points), lv(g.n_points);
  std::vector<double> du(g.n_points), dv(g.n_points);
  detail::laplacian_into(g, fu, lfu);
  detail::laplacian_into(g, fv, lfv);
  detail::laplacian_into(g, u.values, lu);
  detail::laplacian_into(g, v.values, lv);
  detail::gradient_into(g, u.values, du);
  detail::gradient_into(g, v.values, dv);

  auto lhs_at = [&](std::size_t i) { return std::abs(lfu[i] - lfv[i]); };
  auto rhs_at = [&](std::size_t i) {
    const double au = std::abs(u.values[i]);
    const double av = std::abs(v.values[i]);
    const double diff = std::abs(u.values[i] - v.values[i]);
    return std::pow(au, p - 1.0) * std::abs(lu[i] - lv[i]) +
           std::abs(lv[i]) * (std::pow(au, p - 2.0) + std::pow(av, p - 2.0)) * diff +
           std::pow(au, p - 2.0) * (std::abs(du[i]) + std::abs(dv[i])) *
               std::abs(du[i] - dv[i]) +
           dv[i] * dv[i] * (std::pow(au, p - 3.0) + std::pow(av, p - 3.0)) * diff;
  };
  return scan_bound(g, u.values, v.values, lhs_at, rhs_at);
}

}  // namespace

bool check_gradient_composition_bound(const Field& u, const Field& v, double p,
                                      double C, CompositionVariant variant) {
  const BoundScan scan = gradient_bound_scan(u, v, p, variant);
  return !scan.degenerate && scan.max_ratio <= C;
}

bool check_laplacian_composition_bound(const Field& u, const Field& v, double p,
                                       double C, CompositionVariant variant) {
  const BoundScan scan = laplacian_bound_scan(u, v, p, variant);
  return !scan.degenerate && scan.max_ratio <= C;
}

double gradient_composition_ratio(const Field& u, const Field& v, double p,
                                  CompositionVariant variant) {
  const BoundScan scan = gradient_bound_scan(u, v, p, variant);
  if (scan.degenerate) return std::numeric_limits<double>::infinity();
  return scan.max_ratio;
}

double laplacian_composition_ratio(const Field& u, const Field& v, double p,
                                   CompositionVariant variant) {
  const BoundScan scan = laplacian_bound_scan(u, v, p, variant);
  if (scan.degenerate) return std::numeric_limits<double>::infinity();
  return scan.max_ratio;
}

}  // namespace nlwave
