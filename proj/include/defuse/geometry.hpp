#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "defuse/types.hpp"

namespace defuse {

/// Interface described as the zero level set of `phi`; phi < 0 is the minus
/// subdomain, phi > 0 the plus subdomain. One-dimensional problems carry the
/// interface abscissa in `alpha` and use phi(x) = x - alpha.
struct LevelSet {
  int dim = 2;
  std::function<double(const Point&)> phi;
  std::function<Vec2(const Point&)> grad;
  std::optional<double> alpha;

  double operator()(const Point& x) const { return phi(x); }

  static LevelSet point_1d(double alpha);
};

/// Uniform node grid on [a,b] (1D) or [a,b]x[c,d] (2D). n1, n2 count nodes.
struct GridSpec {
  int dim = 2;
  double a = 0.0, b = 1.0, c = 0.0, d = 1.0;
  int n1 = 2, n2 = 1;

  /// Grid with `intervals` cells per axis (the N of a refinement table).
  static GridSpec uniform_1d(double a, double b, int intervals);
  static GridSpec uniform_2d(double a, double b, double c, double d, int intervals);

  double h1() const { return (b - a) / (n1 - 1); }
  double h2() const { return dim == 1 ? 1.0 : (d - c) / (n2 - 1); }
  std::size_t node_count() const { return static_cast<std::size_t>(n1) * n2; }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * n1 + i;
  }
  int i_of(std::size_t k) const { return static_cast<int>(k % n1); }
  int j_of(std::size_t k) const { return static_cast<int>(k / n1); }
  Point node(int i, int j) const {
    return dim == 1 ? Point{a + i * h1(), 0.0}
                    : Point{a + i * h1(), c + j * h2()};
  }
  Point node(std::size_t k) const { return node(i_of(k), j_of(k)); }
  bool on_boundary(int i, int j) const {
    if (i == 0 || i == n1 - 1) return true;
    return dim == 2 && (j == 0 || j == n2 - 1);
  }
  /// Cell volume: h in 1D, h1*h2 in 2D.
  double cell_measure() const { return dim == 1 ? h1() : h1() * h2(); }
};

enum class NodeLabel : std::uint8_t {
  omega1,
  omega2,
  band_minus,
  band_plus,
  gamma_minus,
  gamma_plus,
  outer_boundary,
};

const char* to_string(NodeLabel label);

/// Side a labelled interior node belongs to. Outer boundary nodes have no
/// intrinsic side; callers use the level-set sign for those.
std::optional<Side> side_of(NodeLabel label);

/// Two grid nodes on opposite sides of the interface whose network values are
/// tied together by the jump conditions.
struct NodePair {
  enum class Kind : std::uint8_t { offset, through_node };

  std::size_t minus_node = 0;
  std::size_t plus_node = 0;
  Kind kind = Kind::offset;
  /// For through_node pairs, the grid node lying on the interface.
  std::size_t center_node = 0;
  /// Interface point used for the jump targets and the normal.
  Point foot{0.0, 0.0};
};

struct RegionMap {
  GridSpec grid;
  std::vector<NodeLabel> labels;
  std::vector<NodePair> node_pairs;
  /// Band cells, each indexed by its lower-left node.
  std::vector<std::size_t> band_cells;
  int band_width_cells = 1;

  NodeLabel label(int i, int j) const { return labels[grid.index(i, j)]; }
  std::size_t count(NodeLabel label) const;
  /// Nodes that belong to the band (band_* or gamma_*).
  bool in_band(std::size_t k) const;

  /// CSV with header `i,j,label`, one row per node in index order.
  void write_csv(std::ostream& out) const;
};

struct ClassifyOptions {
  int band_width_cells = 1;
  /// Problems whose interface runs into the outer boundary opt in here;
  /// otherwise a cut cell containing a boundary node is an error.
  bool allow_boundary_contact = false;
};

/// Tolerance on |phi| below which a node counts as lying on the interface.
inline constexpr double kOnInterfaceTol = 1e-12;

/// Cells (indexed by their lower-left node) whose corner signs show that the
/// interface meets the closed cell. Exposed for testing.
std::vector<std::size_t> cut_cells(const LevelSet& phi, const GridSpec& grid);

RegionMap classify(const LevelSet& phi, const GridSpec& grid,
                   const ClassifyOptions& options = {});
inline RegionMap classify(const LevelSet& phi, const GridSpec& grid,
                          int band_width_cells) {
  return classify(phi, grid, ClassifyOptions{band_width_cells, false});
}

/// Unit normal pointing from the minus into the plus subdomain.
Vec2 normal_at(const LevelSet& phi, const Point& x);

/// Damped Newton descent along grad(phi) onto the zero level set.
Point project_to_interface(const LevelSet& phi, const Point& x);

/// Jump-condition node pairs for every sign-changing grid edge (offset case)
/// and every node lying on the interface (through_node case).
std::vector<NodePair> pair_nodes(const LevelSet& phi, const GridSpec& grid,
                                 const RegionMap& map);

}  // namespace defuse
