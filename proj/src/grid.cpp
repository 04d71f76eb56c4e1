#include "nlwave/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace nlwave {

namespace {

void ensure_finite(const Field& f, const char* op) {
  for (double x : f.values) {
    if (!std::isfinite(x)) {
      throw std::domain_error(std::string(op) + ": non-finite value in field");
    }
  }
}

void ensure_same_grid(const Field& f, const Field& g, const char* op) {
  if (!(f.grid == g.grid)) {
    throw std::invalid_argument(std::string(op) + ": fields live on different grids");
  }
}

}  // namespace

double Grid::node(std::size_t i) const {
  if (dim_mode == DimMode::line1d) return -extent + static_cast<double>(i) * spacing;
  return static_cast<double>(i) * spacing;
}

int Grid::spatial_dim() const {
  switch (dim_mode) {
    case DimMode::line1d: return 1;
    case DimMode::radial2d: return 2;
    case DimMode::radial3d: return 3;
  }
  return 1;
}

Grid make_grid(DimMode dim_mode, double extent, std::size_t n_points) {
  if (!(extent > 0.0) || !std::isfinite(extent)) {
    throw std::invalid_argument("make_grid: extent must be positive and finite");
  }
  if (n_points < 16) {
    throw std::invalid_argument("make_grid: n_points must be at least 16");
  }
  Grid g;
  g.dim_mode = dim_mode;
  g.n_points = n_points;
  g.extent = extent;
  const double span = (dim_mode == DimMode::line1d) ? 2.0 * extent : extent;
  g.spacing = span / static_cast<double>(n_points - 1);
  return g;
}

Field make_field(const Grid& grid) {
  return Field{grid, std::vector<double>(grid.n_points, 0.0)};
}

Field make_field(const Grid& grid, std::vector<double> values) {
  if (values.size() != grid.n_points) {
    throw std::invalid_argument("make_field: value count does not match grid");
  }
  Field f{grid, std::move(values)};
  ensure_finite(f, "make_field");
  return f;
}

double quad_weight(const Grid& grid, std::size_t i) {
  if (i >= grid.n_points) throw std::out_of_range("quad_weight: node index out of range");
  const double trap =
      (i == 0 || i + 1 == grid.n_points) ? 0.5 * grid.spacing : grid.spacing;
  switch (grid.dim_mode) {
    case DimMode::line1d:
      return trap;
    case DimMode::radial2d:
      return trap * 2.0 * std::numbers::pi * grid.node(i);
    case DimMode::radial3d: {
      const double r = grid.node(i);
      return trap * 4.0 * std::numbers::pi * r * r;
    }
  }
  return trap;
}

double integrate(const Field& f) {
  ensure_finite(f, "integrate");
  double acc = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    acc += quad_weight(f.grid, i) * f.values[i];
  }
  return acc;
}

double l2_norm(const Field& f) {
  ensure_finite(f, "l2_norm");
  double acc = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    acc += quad_weight(f.grid, i) * f.values[i] * f.values[i];
  }
  return std::sqrt(acc);
}

double linf_norm(const Field& f) {
  ensure_finite(f, "linf_norm");
  double m = 0.0;
  for (double x : f.values) m = std::max(m, std::abs(x));
  return m;
}

double inner_product(const Field& f, const Field& g) {
  ensure_same_grid(f, g, "inner_product");
  ensure_finite(f, "inner_product");
  ensure_finite(g, "inner_product");
  double acc = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    acc += quad_weight(f.grid, i) * f.values[i] * g.values[i];
  }
  return acc;
}

const char* to_string(DimMode m) {
  switch (m) {
    case DimMode::line1d: return "line1d";
    case DimMode::radial2d: return "radial2d";
    case DimMode::radial3d: return "radial3d";
  }
  return "line1d";
}

DimMode dim_mode_from_string(const std::string& s) {
  if (s == "line1d") return DimMode::line1d;
  if (s == "radial2d") return DimMode::radial2d;
  if (s == "radial3d") return DimMode::radial3d;
  throw std::invalid_argument("dim_mode: unknown mode '" + s + "'");
}

}  // namespace nlwave
