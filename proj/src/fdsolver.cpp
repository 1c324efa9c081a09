#include "defuse/fdsolver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <future>
#include <ostream>
#include <thread>

#include <Eigen/SparseCholesky>

#include "defuse/error.hpp"

namespace defuse {

std::size_t GridFunction::count() const {
  return static_cast<std::size_t>(std::count(defined.begin(), defined.end(), 1));
}

void GridFunction::write_csv(std::ostream& out) const {
  out << (grid.dim == 1 ? "x,u\n" : "x1,x2,u\n");
  char buf[128];
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!defined[k]) continue;
    const Point x = grid.node(k);
    if (grid.dim == 1)
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", x[0], values[k]);
    else
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", x[0], x[1], values[k]);
    out << buf;
  }
}

bool is_unknown(const RegionMap& map, Side side, std::size_t k) {
  return map.labels[k] == (side == Side::minus ? NodeLabel::omega1 : NodeLabel::omega2);
}

namespace {

std::string node_name(const GridSpec& g, std::size_t k) {
  const Point x = g.node(k);
  char buf[96];
  if (g.dim == 1)
    std::snprintf(buf, sizeof buf, "node %d (x=%g)", g.i_of(k), x[0]);
  else
    std::snprintf(buf, sizeof buf, "node (%d,%d) at (%g,%g)", g.i_of(k), g.j_of(k), x[0], x[1]);
  return buf;
}

double positive_beta(const Coefficient& beta, const Point& x, const GridSpec& g, std::size_t k) {
  const double b = beta.value(x);
  if (!(b > 0.0) || !std::isfinite(b))
    throw Error(ErrorKind::solver_breakdown,
                "coefficient is not positive next to " + node_name(g, k));
  return b;
}

// Direct factorization reused across Picard sweeps.
class Factorized {
 public:
  explicit Factorized(const Eigen::SparseMatrix<double>& a) : a_(a) {
    ldlt_.compute(a);
    if (ldlt_.info() != Eigen::Success)
      throw Error(ErrorKind::solver_breakdown, "sparse factorization failed");
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    const double tol = 1e-12 * (1.0 + b.lpNorm<Eigen::Infinity>());
    Eigen::VectorXd x = ldlt_.solve(b);
    if (ldlt_.info() != Eigen::Success)
      throw Error(ErrorKind::solver_breakdown, "sparse triangular solve failed");
    for (int refine = 0;; ++refine) {
      const Eigen::VectorXd r = b - a_ * x;
      const double res = r.size() ? r.lpNorm<Eigen::Infinity>() : 0.0;
      if (!std::isfinite(res))
        throw Error(ErrorKind::solver_breakdown, "non-finite residual");
      if (res <= tol) return x;
      if (refine == 3) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "residual %.3e above target %.3e after refinement", res, tol);
        throw Error(ErrorKind::solver_breakdown, buf);
      }
      x += ldlt_.solve(r);
    }
  }

 private:
  const Eigen::SparseMatrix<double>& a_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

Eigen::VectorXd source_rhs(const ProblemSpec& problem, Side side, const LinearSystem& sys,
                           const GridSpec& grid, const GridFunction* u_prev) {
  Eigen::VectorXd rhs = sys.boundary_rhs;
  const SourceTerm& f = problem.f(side);
  for (std::size_t r = 0; r < sys.unknowns.size(); ++r) {
    const std::size_t k = sys.unknowns[r];
    const double u = (u_prev && u_prev->has(k)) ? u_prev->at(k) : 0.0;
    rhs[static_cast<Eigen::Index>(r)] += f(grid.node(k), u);
  }
  return rhs;
}

}  // namespace

LinearSystem assemble(const ProblemSpec& problem, Side side, const GridSpec& grid,
                      const RegionMap& map, const GridFunction& dirichlet,
                      const GridFunction* u_prev) {
  LinearSystem sys;
  sys.row_of.assign(grid.node_count(), -1);
  for (std::size_t k = 0; k < grid.node_count(); ++k) {
    if (!is_unknown(map, side, k)) continue;
    sys.row_of[k] = static_cast<long>(sys.unknowns.size());
    sys.unknowns.push_back(k);
  }
  const Eigen::Index n = static_cast<Eigen::Index>(sys.unknowns.size());
  sys.boundary_rhs = Eigen::VectorXd::Zero(n);
  const Coefficient& beta = problem.beta(side);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(sys.unknowns.size() * (grid.dim == 1 ? 3 : 5));
  const double h1 = grid.h1(), h2 = grid.h2();
  for (std::size_t r = 0; r < sys.unknowns.size(); ++r) {
    const std::size_t k = sys.unknowns[r];
    const int i = grid.i_of(k), j = grid.j_of(k);
    const Point x = grid.node(k);
    double diag = 0.0;

    auto couple = [&](int ni, int nj, double coef) {
      const std::size_t nb = grid.index(ni, nj);
      diag += coef;
      if (sys.row_of[nb] >= 0) {
        trip.emplace_back(static_cast<Eigen::Index>(r), sys.row_of[nb], -coef);
      } else if (dirichlet.has(nb)) {
        sys.boundary_rhs[static_cast<Eigen::Index>(r)] += coef * dirichlet.at(nb);
      } else {
        throw Error(ErrorKind::missing_dirichlet,
                    "no boundary value for " + node_name(grid, nb) + " on the " +
                        to_string(side) + " side");
      }
    };

    const double bx_p = positive_beta(beta, Point{x[0] + 0.5 * h1, x[1]}, grid, k);
    const double bx_m = positive_beta(beta, Point{x[0] - 0.5 * h1, x[1]}, grid, k);
    couple(i + 1, j, bx_p / (h1 * h1));
    couple(i - 1, j, bx_m / (h1 * h1));
    if (grid.dim == 2) {
      const double by_p = positive_beta(beta, Point{x[0], x[1] + 0.5 * h2}, grid, k);
      const double by_m = positive_beta(beta, Point{x[0], x[1] - 0.5 * h2}, grid, k);
      couple(i, j + 1, by_p / (h2 * h2));
      couple(i, j - 1, by_m / (h2 * h2));
    }
    trip.emplace_back(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r), diag);
  }
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  sys.rhs = source_rhs(problem, side, sys, grid, u_prev);
  return sys;
}

Eigen::VectorXd solve_linear(const LinearSystem& system) {
  if (system.matrix.rows() == 0) return Eigen::VectorXd();
  Factorized f(system.matrix);
  return f.solve(system.rhs);
}

PicardResult solve_picard(const ProblemSpec& problem, Side side, const GridSpec& grid,
                          const RegionMap& map, const GridFunction& dirichlet, double tol,
                          int max_iter) {
  if (!(tol > 0.0)) throw Error(ErrorKind::invalid_argument, "Picard tolerance must be positive");
  if (max_iter < 1) throw Error(ErrorKind::invalid_argument, "Picard needs at least one sweep");

  GridFunction u = dirichlet;
  for (std::size_t k = 0; k < grid.node_count(); ++k)
    if (is_unknown(map, side, k)) u.set(k, 0.0);

  // The matrix does not depend on u; only the source is refrozen per sweep.
  LinearSystem sys = assemble(problem, side, grid, map, dirichlet, &u);
  PicardResult out;
  if (sys.unknowns.empty()) {
    out.u = u;
    return out;
  }
  Factorized fac(sys.matrix);
  double prev_inc = std::numeric_limits<double>::infinity();
  int growth = 0;
  for (int m = 1; m <= max_iter; ++m) {
    if (m > 1) sys.rhs = source_rhs(problem, side, sys, grid, &u);
    const Eigen::VectorXd x = fac.solve(sys.rhs);
    double inc = 0.0;
    for (std::size_t r = 0; r < sys.unknowns.size(); ++r) {
      const std::size_t k = sys.unknowns[r];
      const double v = x[static_cast<Eigen::Index>(r)];
      inc = std::max(inc, std::abs(v - u.at(k)));
      u.set(k, v);
    }
    out.iterations = m;
    out.last_increment = inc;
    if (inc < tol) break;
    growth = inc > prev_inc ? growth + 1 : 0;
    if (growth >= 10)
      throw Error(ErrorKind::picard_diverged,
                  std::string("increment grew for 10 consecutive sweeps on the ") +
                      to_string(side) + " side");
    prev_inc = inc;
  }
  out.u = std::move(u);
  return out;
}

BandValues network_band_values(const ProblemSpec& problem, const PairedNet& net) {
  return [&problem, &net](Side side, const Point& x) {
    const NetworkParams& p = net.side(side);
    const double raw = forward_value(p, x);
    const bool anchored = side == Side::plus || net.shared;
    if (!anchored) return raw;
    const Point x0 = problem.foot_point(x);
    const double dx = x[0] - x0[0], dy = problem.dim == 2 ? x[1] - x0[1] : 0.0;
    const double d = std::sqrt(dx * dx + dy * dy);
    const double g = problem.g_hat(x0);
    return g + d * (g + raw);
  };
}

BandValues exact_band_values(const ProblemSpec& problem) {
  if (!problem.has_exact())
    throw Error(ErrorKind::no_exact_solution, problem.name + " has no exact solution");
  return [&problem](Side side, const Point& x) { return problem.exact(side, x).value; };
}

GridFunction side_dirichlet(const ProblemSpec& problem, Side side, const RegionMap& map,
                            const GridFunction& band) {
  const GridSpec& grid = map.grid;
  GridFunction d(grid);
  const NodeLabel frontier = side == Side::minus ? NodeLabel::gamma_minus : NodeLabel::gamma_plus;
  for (std::size_t k = 0; k < grid.node_count(); ++k) {
    if (map.labels[k] == frontier) {
      d.set(k, band.at(k));
    } else if (map.labels[k] == NodeLabel::outer_boundary) {
      // Only this side's share of the outer boundary, so the two solves
      // carry disjoint data.
      const double ph = problem.phi(grid.node(k));
      const bool mine = std::abs(ph) <= kOnInterfaceTol || ((ph < 0.0) == (side == Side::minus));
      if (mine) d.set(k, problem.g(grid.node(k)));
    }
  }
  return d;
}

GridFunction DecoupledSolution::combined(const RegionMap& map) const {
  GridFunction out(map.grid);
  for (std::size_t k = 0; k < map.labels.size(); ++k) {
    switch (map.labels[k]) {
      case NodeLabel::omega1: out.set(k, minus.at(k)); break;
      case NodeLabel::omega2: out.set(k, plus.at(k)); break;
      case NodeLabel::outer_boundary:
        if (minus.has(k))
          out.set(k, minus.at(k));
        else if (plus.has(k))
          out.set(k, plus.at(k));
        break;
      default: out.set(k, band.at(k)); break;
    }
  }
  return out;
}

unsigned worker_threads() {
  const char* env = std::getenv("DEFUSE_THREADS");
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (env == nullptr || *env == '\0') return hw;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || v < 0) return hw;
  return v == 0 ? hw : static_cast<unsigned>(v);
}

DecoupledSolution solve_decoupled(const ProblemSpec& problem, const RegionMap& map,
                                  const BandValues& band_values, bool concurrent, double tol,
                                  int max_iter) {
  const GridSpec& grid = map.grid;
  DecoupledSolution out;
  out.band = GridFunction(grid);
  for (std::size_t k = 0; k < grid.node_count(); ++k) {
    if (!map.in_band(k)) continue;
    const Side side = *side_of(map.labels[k]);
    const double v = band_values(side, grid.node(k));
    if (!std::isfinite(v))
      throw Error(ErrorKind::non_finite_output, "band value at " + std::to_string(k));
    out.band.set(k, v);
  }
  const GridFunction dm = side_dirichlet(problem, Side::minus, map, out.band);
  const GridFunction dp = side_dirichlet(problem, Side::plus, map, out.band);

  auto run = [&](Side side, const GridFunction& d) {
    return solve_picard(problem, side, grid, map, d, tol, max_iter);
  };
  PicardResult rm, rp;
  if (concurrent) {
    auto fut = std::async(std::launch::async, run, Side::plus, std::cref(dp));
    rm = run(Side::minus, dm);
    rp = fut.get();
  } else {
    rm = run(Side::minus, dm);
    rp = run(Side::plus, dp);
  }
  out.minus = std::move(rm.u);
  out.plus = std::move(rp.u);
  out.iterations_minus = rm.iterations;
  out.iterations_plus = rp.iterations;
  return out;
}

}  // namespace defuse
