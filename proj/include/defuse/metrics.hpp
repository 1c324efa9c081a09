#pragma once

#include "defuse/fdsolver.hpp"
#include "defuse/geometry.hpp"
#include "defuse/problems.hpp"

namespace defuse {

enum class Region { omega1, omega2, omega };

const char* to_string(Region region);

/// Nodes counted in a region: omega1/omega2 labels, or every node that is
/// not on the outer boundary.
bool in_region(const RegionMap& map, Region region, std::size_t k);

struct ErrorNorms {
  double l2 = 0.0;
  double linf = 0.0;
  std::size_t nodes = 0;
};

/// Discrete L2 norm sqrt(cell_measure * sum e^2) and max |e| of u_h - u over
/// the region, each node compared with the exact branch of its side.
ErrorNorms exact_error(const GridFunction& u_h, const ProblemSpec& problem,
                       const RegionMap& map, Region region);

/// Discrete L2 norm of f_h - f, where f_h applies the flux-form stencil to
/// u_h. Only nodes whose stencil neighbours are defined and lie on the same
/// side contribute.
ErrorNorms residual_metric(const GridFunction& u_h, const ProblemSpec& problem,
                           const RegionMap& map, Region region);

}  // namespace defuse
