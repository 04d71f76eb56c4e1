#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace nlwave {

// Spatial discretization modes. line1d covers [-extent, extent]; the radial
// modes cover [0, extent] with the first node at r = 0 and represent
// rotationally symmetric fields in 2 or 3 space dimensions.
enum class DimMode { line1d, radial2d, radial3d };

enum class Boundary { dirichlet_zero };

struct Grid {
  DimMode dim_mode = DimMode::line1d;
  std::size_t n_points = 0;
  double spacing = 0.0;
  double extent = 0.0;
  Boundary boundary = Boundary::dirichlet_zero;

  // Coordinate of node i (x for line1d, r for radial modes).
  double node(std::size_t i) const;
  // Dimension of the underlying space: 1, 2 or 3.
  int spatial_dim() const;

  bool operator==(const Grid&) const = default;
};

Grid make_grid(DimMode dim_mode, double extent, std::size_t n_points);

// Scalar field sampled on a grid. Plain value type; the grid is carried by
// value so fields from different grids can be detected cheaply.
struct Field {
  Grid grid;
  std::vector<double> values;
};

Field make_field(const Grid& grid);
Field make_field(const Grid& grid, std::vector<double> values);

// Solution state of the first-order system: u and v = du/dt at time t.
struct State {
  double t = 0.0;
  Field u;
  Field v;
};

// Quadrature weight of node i: trapezoid weight times the radial measure
// r^{n-1} and surface constant (2*pi for radial2d, 4*pi for radial3d).
double quad_weight(const Grid& grid, std::size_t i);

// Integral of f over the domain with the mode's measure.
double integrate(const Field& f);

double l2_norm(const Field& f);
double linf_norm(const Field& f);
double inner_product(const Field& f, const Field& g);

const char* to_string(DimMode m);
DimMode dim_mode_from_string(const std::string& s);

}  // namespace nlwave
