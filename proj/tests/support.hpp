#pragma once

#include <functional>

#include "defuse/fdsolver.hpp"
#include "defuse/geometry.hpp"
#include "defuse/problems.hpp"

namespace testing {

using namespace defuse;

/// Single-phase problem on the whole box: both sides share beta and f.
inline ProblemSpec single_phase(int dim, std::function<double(const Point&)> beta,
                                std::function<double(const Point&, double)> f,
                                std::function<double(const Point&, double)> df = {}) {
  ProblemSpec p;
  p.name = "custom";
  p.dim = dim;
  p.beta_minus.value = beta;
  p.beta_minus.grad = [](const Point&) { return Vec2{0.0, 0.0}; };
  p.beta_plus = p.beta_minus;
  p.f_minus.value = std::move(f);
  p.f_minus.du = std::move(df);
  p.f_plus = p.f_minus;
  return p;
}

/// Every interior node is an omega1 unknown; the outer ring is boundary.
inline RegionMap whole_grid(const GridSpec& grid) {
  RegionMap m;
  m.grid = grid;
  m.labels.resize(grid.node_count());
  for (std::size_t k = 0; k < grid.node_count(); ++k)
    m.labels[k] = grid.on_boundary(grid.i_of(k), grid.j_of(k)) ? NodeLabel::outer_boundary
                                                                : NodeLabel::omega1;
  return m;
}

/// Dirichlet data from `u` on the outer ring.
inline GridFunction ring_data(const GridSpec& grid, const std::function<double(const Point&)>& u) {
  GridFunction d(grid);
  for (std::size_t k = 0; k < grid.node_count(); ++k)
    if (grid.on_boundary(grid.i_of(k), grid.j_of(k))) d.set(k, u(grid.node(k)));
  return d;
}

}  // namespace testing
