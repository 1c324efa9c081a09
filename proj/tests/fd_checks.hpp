#pragma once

// FD-only checks shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "defuse/fdsolver.hpp"
#include "defuse/types.hpp"
#include "support.hpp"

namespace testing {

struct Quadratic {
  double c[6];
  double operator()(const Point& x) const {
    return c[0] + c[1] * x[0] + c[2] * x[1] + c[3] * x[0] * x[0] + c[4] * x[0] * x[1] +
           c[5] * x[1] * x[1];
  }
};

/// Largest nodal error of the solve for a random quadratic with a random
/// positive coefficient that is constant (`linear_beta` false) or linear.
inline double quadratic_solve_error(std::mt19937_64& rng, bool linear_beta, int intervals) {
  auto draw = [&] { return 2.0 * uniform01(rng) - 1.0; };
  Quadratic u;
  for (double& c : u.c) c = draw();
  const double b0 = 0.5 + uniform01(rng);
  const double b1 = linear_beta ? uniform01(rng) : 0.0, b2 = linear_beta ? uniform01(rng) : 0.0;
  const auto beta = [=](const Point& x) { return b0 + b1 * x[0] + b2 * x[1]; };
  const auto f = [=](const Point& x, double) {
    const double ux = u.c[1] + 2.0 * u.c[3] * x[0] + u.c[4] * x[1];
    const double uy = u.c[2] + u.c[4] * x[0] + 2.0 * u.c[5] * x[1];
    return -(b1 * ux + b2 * uy + beta(x) * (2.0 * u.c[3] + 2.0 * u.c[5]));
  };
  const ProblemSpec p = single_phase(2, beta, f);
  const GridSpec g = GridSpec::uniform_2d(0.0, 1.0, 0.0, 1.0, intervals);
  const RegionMap m = whole_grid(g);
  const PicardResult r = solve_picard(p, Side::minus, g, m, ring_data(g, u));
  double err = 0.0;
  for (std::size_t k = 0; k < g.node_count(); ++k) err = std::max(err, std::abs(r.u.at(k) - u(g.node(k))));
  return err;
}

/// Interior nodal values of a random positive-coefficient, source-free
/// problem with random boundary values must stay within the boundary range.
/// Returns the largest excursion outside [min, max] of the boundary data.
inline double max_principle_excursion(std::mt19937_64& rng, int intervals) {
  double a[6];
  for (double& v : a) v = 2.0 * uniform01(rng) - 1.0;
  const auto beta = [=](const Point& x) {
    return std::exp(1.5 * std::sin(3.0 * a[0] * x[0] + 3.0 * a[1] * x[1] + a[2]) +
                    a[3] * x[0] * x[1]) + 1e-3 * (1.0 + a[4] * a[4]);
  };
  const ProblemSpec p = single_phase(2, beta, [](const Point&, double) { return 0.0; });
  const GridSpec g = GridSpec::uniform_2d(0.0, 1.0, 0.0, 1.0, intervals);
  const RegionMap m = whole_grid(g);
  GridFunction d(g);
  double lo = 1e300, hi = -1e300;
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    if (!g.on_boundary(g.i_of(k), g.j_of(k))) continue;
    const double v = 10.0 * (2.0 * uniform01(rng) - 1.0);
    d.set(k, v);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const PicardResult r = solve_picard(p, Side::minus, g, m, d);
  double excursion = 0.0;
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    if (g.on_boundary(g.i_of(k), g.j_of(k))) continue;
    excursion = std::max({excursion, r.u.at(k) - hi, lo - r.u.at(k)});
  }
  return excursion;
}

/// Discrete L2 error of a smooth variable-coefficient problem without an
/// interface on the unit square.
inline double manufactured_error(int intervals) {
  using std::numbers::pi;
  const auto u = [](const Point& x) { return std::sin(pi * x[0]) * std::cos(pi * x[1]) + x[0] * x[1]; };
  const auto beta = [](const Point& x) { return 1.0 + x[0] * x[0] + 0.5 * x[1] * x[1]; };
  const auto f = [=](const Point& x, double) {
    const double s = std::sin(pi * x[0]), c = std::cos(pi * x[0]);
    const double sy = std::sin(pi * x[1]), cy = std::cos(pi * x[1]);
    const double ux = pi * c * cy + x[1], uy = -pi * s * sy + x[0];
    const double lap = -2.0 * pi * pi * s * cy;
    return -(2.0 * x[0] * ux + x[1] * uy + beta(x) * lap);
  };
  const ProblemSpec p = single_phase(2, beta, f);
  const GridSpec g = GridSpec::uniform_2d(0.0, 1.0, 0.0, 1.0, intervals);
  const RegionMap m = whole_grid(g);
  const PicardResult r = solve_picard(p, Side::minus, g, m, ring_data(g, u));
  double sum = 0.0;
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    const double e = r.u.at(k) - u(g.node(k));
    sum += e * e;
  }
  return std::sqrt(g.cell_measure() * sum);
}

}  // namespace testing
