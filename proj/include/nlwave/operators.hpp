#pragma once

#include "nlwave/grid.hpp"

namespace nlwave {

enum class NonlinearityKind { unsigned_power, signed_power };

// f(v) = |v|^p (unsigned_power) or |v|^{p-1} v (signed_power), p > 1.
struct NonlinearitySpec {
  NonlinearityKind kind = NonlinearityKind::unsigned_power;
  double p = 2.0;

  bool operator==(const NonlinearitySpec&) const = default;
};

double apply_nonlinearity(double v, const NonlinearitySpec& spec);
Field apply_nonlinearity(const Field& v, const NonlinearitySpec& spec);

// Central differences in the interior, second-order one-sided stencils at
// the boundary nodes.
Field gradient(const Field& f);

// Three-point Laplacian with Dirichlet zero ghosts beyond the boundary.
// Radial modes use u_rr + (n-1)/r u_r, with the r = 0 node regularized to
// n * u_rr(0) via the even extension u(-h) = u(h).
Field laplacian(const Field& f);

enum class DifferenceVariant { abs_power, signed_power };

// Pointwise difference bound:  | |a|^p - |b|^p |  (abs_power) resp.
// | |a|^{p-1} a - |b|^{p-1} b |  (signed_power)  <=  C (|a|^{p-1} + |b|^{p-1}) |a - b|.
bool check_difference_inequality(double a, double b, double p, double C,
                                 DifferenceVariant variant);

// Which composed map the field-level bounds are applied to.
enum class CompositionVariant { abs_power, signed_power };

// Gradient composition bound (needs p >= 2). With D the discrete gradient,
// N the pointwise power map, checks at every interior node
//   |D[N(u)] - D[N(v)]| <= C ( |u|^{p-1} |Du - Dv|
//                              + |Dv| (|u|^{p-2} + |v|^{p-2}) |u - v| ).
// Nodes with min(|u|,|v|) < 1e-8 are excluded: the pointwise bound only
// holds almost everywhere and discrete stencils straddle the kink at 0.
bool check_gradient_composition_bound(const Field& u, const Field& v, double p,
                                      double C, CompositionVariant variant);

// Laplacian composition bound (needs p >= 3); four right-hand terms:
//   |L[N(u)] - L[N(v)]| <= C ( |u|^{p-1} |L(u-v)|
//                              + |Lv| (|u|^{p-2} + |v|^{p-2}) |u - v|
//                              + |u|^{p-2} (|Du| + |Dv|) |Du - Dv|
//                              + |Dv|^2 (|u|^{p-3} + |v|^{p-3}) |u - v| ).
// Same near-zero node exclusion as the gradient bound.
bool check_laplacian_composition_bound(const Field& u, const Field& v, double p,
                                       double C, CompositionVariant variant);

// Smallest constant that would make the corresponding bound hold on this
// pair of fields (sup over admitted nodes of LHS / RHS). Used by the
// sampling oracles that calibrate the constants the checks are run with.
double gradient_composition_ratio(const Field& u, const Field& v, double p,
                                  CompositionVariant variant);
double laplacian_composition_ratio(const Field& u, const Field& v, double p,
                                   CompositionVariant variant);

namespace detail {
// Raw stencils shared with the time stepper; out is resized by the caller.
void gradient_into(const Grid& grid, const std::vector<double>& f,
                   std::vector<double>& out);
void laplacian_into(const Grid& grid, const std::vector<double>& f,
                    std::vector<double>& out);
}  // namespace detail

}  // namespace nlwave
