#pragma once

#include <optional>

#include "nlwave/operators.hpp"

namespace nlwave {

// Parameters of  u_tt - Lap u + mu/(1+t) u_t = f(u_t).
// nonlinearity empty means the homogeneous equation. eta enters only the
// mu == 2 diagnostics and must lie in (0, 2).
struct PhysParams {
  double mu = 1.0;
  std::optional<NonlinearitySpec> nonlinearity;
  DimMode dim_mode = DimMode::line1d;
  double eta = 0.5;
};

}  // namespace nlwave
