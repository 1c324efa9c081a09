#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <vector>

#include <Eigen/Sparse>

#include "defuse/geometry.hpp"
#include "defuse/jetnet.hpp"
#include "defuse/problems.hpp"

namespace defuse {

/// Nodal values over part of a grid; nodes outside the region are undefined.
struct GridFunction {
  GridSpec grid;
  std::vector<double> values;
  std::vector<char> defined;

  GridFunction() = default;
  explicit GridFunction(const GridSpec& g)
      : grid(g), values(g.node_count(), 0.0), defined(g.node_count(), 0) {}

  bool has(std::size_t k) const { return defined[k] != 0; }
  double at(std::size_t k) const { return values[k]; }
  void set(std::size_t k, double v) {
    values[k] = v;
    defined[k] = 1;
  }
  std::size_t count() const;

  /// Defined nodes in index order; header `x1,x2,u` (1D: `x,u`), %.17g.
  void write_csv(std::ostream& out) const;
};

/// Flux-form system over the unknown nodes of one side.
struct LinearSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
  /// Row r solves for node unknowns[r].
  std::vector<std::size_t> unknowns;
  /// Grid node -> row, or -1 for known nodes.
  std::vector<long> row_of;
  /// Part of the rhs from the Dirichlet neighbours (f excluded).
  Eigen::VectorXd boundary_rhs;
};

/// Nodes solved for on each side: omega1 (minus) or omega2 (plus).
bool is_unknown(const RegionMap& map, Side side, std::size_t k);

/// Builds the stencil rows for `side`. `dirichlet` must cover every
/// neighbour of an unknown node that is not itself unknown; `u_prev` gives the
/// values at which f(x, u) is frozen (may be empty for u-independent f).
LinearSystem assemble(const ProblemSpec& problem, Side side, const GridSpec& grid,
                      const RegionMap& map, const GridFunction& dirichlet,
                      const GridFunction* u_prev);

/// Sparse direct solve with a residual check.
Eigen::VectorXd solve_linear(const LinearSystem& system);

struct PicardResult {
  GridFunction u;
  int iterations = 0;
  double last_increment = 0.0;
};

/// Fixed-point sweeps with f frozen at the previous iterate, starting from 0.
PicardResult solve_picard(const ProblemSpec& problem, Side side, const GridSpec& grid,
                          const RegionMap& map, const GridFunction& dirichlet,
                          double tol = 1e-10, int max_iter = 500);

/// Values supplied on band nodes as Dirichlet data for the two solves.
using BandValues = std::function<double(Side, const Point&)>;

/// Band values from a trained network pair (plus side anchored; minus side
/// anchored too when the pair is shared).
BandValues network_band_values(const ProblemSpec& problem, const PairedNet& net);
/// Band values from the exact solution (oracle mode, no training).
BandValues exact_band_values(const ProblemSpec& problem);

struct DecoupledSolution {
  GridFunction minus;  // omega1 plus its Dirichlet frontier
  GridFunction plus;   // omega2 plus its Dirichlet frontier
  GridFunction band;   // band node values from the supplied source
  int iterations_minus = 0;
  int iterations_plus = 0;

  /// Whole-domain solution: solves on omega1/omega2, band values on the
  /// band, boundary data on the outer boundary.
  GridFunction combined(const RegionMap& map) const;
};

/// Dirichlet data for one side's solve: band values on Gamma nodes, g on the
/// part of the outer boundary on that side.
GridFunction side_dirichlet(const ProblemSpec& problem, Side side, const RegionMap& map,
                            const GridFunction& band);

/// With `concurrent`, the plus side runs on a second thread.
DecoupledSolution solve_decoupled(const ProblemSpec& problem, const RegionMap& map,
                                  const BandValues& band_values, bool concurrent = true,
                                  double tol = 1e-10, int max_iter = 500);

/// Worker cap from DEFUSE_THREADS (0 or unset: hardware concurrency).
unsigned worker_threads();

}  // namespace defuse
