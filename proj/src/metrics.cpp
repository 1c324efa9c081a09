#include "defuse/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "defuse/error.hpp"

namespace defuse {

const char* to_string(Region region) {
  switch (region) {
    case Region::omega1: return "omega1";
    case Region::omega2: return "omega2";
    case Region::omega: return "omega";
  }
  return "?";
}

bool in_region(const RegionMap& map, Region region, std::size_t k) {
  const NodeLabel l = map.labels[k];
  switch (region) {
    case Region::omega1: return l == NodeLabel::omega1;
    case Region::omega2: return l == NodeLabel::omega2;
    case Region::omega: return l != NodeLabel::outer_boundary;
  }
  return false;
}

namespace {

Side node_side(const ProblemSpec& problem, const RegionMap& map, std::size_t k) {
  if (auto s = side_of(map.labels[k])) return *s;
  return problem.phi(map.grid.node(k)) < 0.0 ? Side::minus : Side::plus;
}

ErrorNorms finish(double sum_sq, double linf, std::size_t nodes, const GridSpec& grid) {
  ErrorNorms e;
  e.l2 = std::sqrt(grid.cell_measure() * sum_sq);
  e.linf = linf;
  e.nodes = nodes;
  return e;
}

}  // namespace

ErrorNorms exact_error(const GridFunction& u_h, const ProblemSpec& problem, const RegionMap& map,
                       Region region) {
  if (!problem.has_exact())
    throw Error(ErrorKind::no_exact_solution,
                problem.name + " has no exact solution; use the residual metric");
  const GridSpec& grid = map.grid;
  double sum = 0.0, linf = 0.0;
  std::size_t nodes = 0;
  for (std::size_t k = 0; k < grid.node_count(); ++k) {
    if (!in_region(map, region, k)) continue;
    if (!u_h.has(k))
      throw Error(ErrorKind::shape_mismatch, "solution undefined at a node of the region");
    const double e = u_h.at(k) - problem.exact(node_side(problem, map, k), grid.node(k)).value;
    sum += e * e;
    linf = std::max(linf, std::abs(e));
    ++nodes;
  }
  return finish(sum, linf, nodes, grid);
}

ErrorNorms residual_metric(const GridFunction& u_h, const ProblemSpec& problem,
                           const RegionMap& map, Region region) {
  const GridSpec& grid = map.grid;
  const double h1 = grid.h1(), h2 = grid.h2();
  double sum = 0.0, linf = 0.0;
  std::size_t nodes = 0;
  for (std::size_t k = 0; k < grid.node_count(); ++k) {
    if (!in_region(map, region, k) || map.labels[k] == NodeLabel::outer_boundary) continue;
    if (!u_h.has(k)) continue;
    const Side side = node_side(problem, map, k);
    const int i = grid.i_of(k), j = grid.j_of(k);
    const Point x = grid.node(k);
    const Coefficient& beta = problem.beta(side);

    struct Arm {
      int di, dj;
      Point half;
      double h;
    };
    std::vector<Arm> arms{{1, 0, {x[0] + 0.5 * h1, x[1]}, h1}, {-1, 0, {x[0] - 0.5 * h1, x[1]}, h1}};
    if (grid.dim == 2) {
      arms.push_back({0, 1, {x[0], x[1] + 0.5 * h2}, h2});
      arms.push_back({0, -1, {x[0], x[1] - 0.5 * h2}, h2});
    }
    bool usable = true;
    double fh = 0.0;
    for (const Arm& a : arms) {
      const std::size_t nb = grid.index(i + a.di, j + a.dj);
      if (!u_h.has(nb) || node_side(problem, map, nb) != side) {
        usable = false;
        break;
      }
      fh += beta.value(a.half) / (a.h * a.h) * (u_h.at(k) - u_h.at(nb));
    }
    if (!usable) continue;
    const double e = fh - problem.f(side)(x, u_h.at(k));
    sum += e * e;
    linf = std::max(linf, std::abs(e));
    ++nodes;
  }
  return finish(sum, linf, nodes, grid);
}

}  // namespace defuse
