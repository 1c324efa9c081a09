#include "defuse/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "defuse/error.hpp"

namespace defuse {

LevelSet LevelSet::point_1d(double alpha) {
  LevelSet ls;
  ls.dim = 1;
  ls.alpha = alpha;
  ls.phi = [alpha](const Point& x) { return x[0] - alpha; };
  ls.grad = [](const Point&) { return Vec2{1.0, 0.0}; };
  return ls;
}

GridSpec GridSpec::uniform_1d(double a, double b, int intervals) {
  GridSpec g;
  g.dim = 1;
  g.a = a;
  g.b = b;
  g.c = 0.0;
  g.d = 0.0;
  g.n1 = intervals + 1;
  g.n2 = 1;
  return g;
}

GridSpec GridSpec::uniform_2d(double a, double b, double c, double d,
                              int intervals) {
  GridSpec g;
  g.dim = 2;
  g.a = a;
  g.b = b;
  g.c = c;
  g.d = d;
  g.n1 = intervals + 1;
  g.n2 = intervals + 1;
  return g;
}

const char* to_string(NodeLabel label) {
  switch (label) {
    case NodeLabel::omega1: return "omega1";
    case NodeLabel::omega2: return "omega2";
    case NodeLabel::band_minus: return "band_minus";
    case NodeLabel::band_plus: return "band_plus";
    case NodeLabel::gamma_minus: return "gamma_minus";
    case NodeLabel::gamma_plus: return "gamma_plus";
    case NodeLabel::outer_boundary: return "outer_boundary";
  }
  return "?";
}

std::optional<Side> side_of(NodeLabel label) {
  switch (label) {
    case NodeLabel::omega1:
    case NodeLabel::band_minus:
    case NodeLabel::gamma_minus:
      return Side::minus;
    case NodeLabel::omega2:
    case NodeLabel::band_plus:
    case NodeLabel::gamma_plus:
      return Side::plus;
    case NodeLabel::outer_boundary:
      return std::nullopt;
  }
  return std::nullopt;
}

std::size_t RegionMap::count(NodeLabel label) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

bool RegionMap::in_band(std::size_t k) const {
  switch (labels[k]) {
    case NodeLabel::band_minus:
    case NodeLabel::band_plus:
    case NodeLabel::gamma_minus:
    case NodeLabel::gamma_plus:
      return true;
    default:
      return false;
  }
}

void RegionMap::write_csv(std::ostream& out) const {
  out << "i,j,label\n";
  for (std::size_t k = 0; k < labels.size(); ++k)
    out << grid.i_of(k) << ',' << grid.j_of(k) << ',' << to_string(labels[k]) << '\n';
}

namespace {

int node_sign(double phi) {
  if (std::abs(phi) < kOnInterfaceTol) return 0;
  return phi < 0.0 ? -1 : 1;
}

std::vector<int> node_signs(const LevelSet& phi, const GridSpec& grid) {
  std::vector<int> signs(grid.node_count());
  for (std::size_t k = 0; k < signs.size(); ++k) signs[k] = node_sign(phi(grid.node(k)));
  return signs;
}

int cells_x(const GridSpec& g) { return g.n1 - 1; }
int cells_y(const GridSpec& g) { return g.dim == 1 ? 1 : g.n2 - 1; }

template <typename F>
void for_each_corner(const GridSpec& g, int ci, int cj, F&& f) {
  if (g.dim == 1) {
    f(ci, 0);
    f(ci + 1, 0);
    return;
  }
  f(ci, cj);
  f(ci + 1, cj);
  f(ci, cj + 1);
  f(ci + 1, cj + 1);
}

bool is_cut(const GridSpec& g, const std::vector<int>& signs, int ci, int cj) {
  bool neg = false, pos = false, zero = false;
  for_each_corner(g, ci, cj, [&](int i, int j) {
    int s = signs[g.index(i, j)];
    neg |= s < 0;
    pos |= s > 0;
    zero |= s == 0;
  });
  return zero || (neg && pos);
}

std::vector<std::size_t> cut_cells_from_signs(const GridSpec& grid,
                                              const std::vector<int>& signs) {
  std::vector<std::size_t> cut;
  for (int cj = 0; cj < cells_y(grid); ++cj)
    for (int ci = 0; ci < cells_x(grid); ++ci)
      if (is_cut(grid, signs, ci, cj)) cut.push_back(grid.index(ci, cj));
  return cut;
}

// Root of phi on the segment [p, q], where phi changes sign (or vanishes).
Point edge_root(const LevelSet& phi, Point p, Point q) {
  double fp = phi(p);
  if (std::abs(fp) < kOnInterfaceTol) return p;
  double fq = phi(q);
  if (std::abs(fq) < kOnInterfaceTol) return q;
  for (int it = 0; it < 200; ++it) {
    Point m{0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])};
    double fm = phi(m);
    if (fm == 0.0) return m;
    if ((fm < 0.0) == (fp < 0.0)) {
      p = m;
      fp = fm;
    } else {
      q = m;
    }
    if (std::abs(q[0] - p[0]) + std::abs(q[1] - p[1]) < 1e-15) break;
  }
  return Point{0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])};
}

}  // namespace

std::vector<std::size_t> cut_cells(const LevelSet& phi, const GridSpec& grid) {
  return cut_cells_from_signs(grid, node_signs(phi, grid));
}

RegionMap classify(const LevelSet& phi, const GridSpec& grid,
                   const ClassifyOptions& options) {
  if (options.band_width_cells < 0)
    throw Error(ErrorKind::invalid_argument, "band width must be non-negative");
  if (grid.n1 < 2 || (grid.dim == 2 && grid.n2 < 2))
    throw Error(ErrorKind::invalid_argument, "grid needs at least two nodes per axis");

  const auto signs = node_signs(phi, grid);
  const int cx = cells_x(grid), cy = cells_y(grid);
  std::vector<char> cut(static_cast<std::size_t>(cx) * cy, 0);
  // Reported after the coverage check, which is the more basic failure.
  std::string contact;
  for (int cj = 0; cj < cy; ++cj) {
    for (int ci = 0; ci < cx; ++ci) {
      if (!is_cut(grid, signs, ci, cj)) continue;
      cut[static_cast<std::size_t>(cj) * cx + ci] = 1;
      if (options.allow_boundary_contact || !contact.empty()) continue;
      for_each_corner(grid, ci, cj, [&](int i, int j) {
        if (grid.on_boundary(i, j) && contact.empty())
          contact = "interface cell at (" + std::to_string(ci) + "," + std::to_string(cj) +
                    ") contains an outer boundary node";
      });
    }
  }

  // Dilate the cut cells by band_width_cells layers across cell faces.
  const int w = options.band_width_cells;
  std::vector<char> band(cut.size(), 0);
  for (int cj = 0; cj < cy; ++cj) {
    for (int ci = 0; ci < cx; ++ci) {
      if (!cut[static_cast<std::size_t>(cj) * cx + ci]) continue;
      const int wy = grid.dim == 1 ? 0 : w;
      for (int dj = -wy; dj <= wy; ++dj) {
        for (int di = -w; di <= w; ++di) {
          if (std::abs(di) + std::abs(dj) > w) continue;
          int i = ci + di, j = cj + dj;
          if (i < 0 || j < 0 || i >= cx || j >= cy) continue;
          band[static_cast<std::size_t>(j) * cx + i] = 1;
        }
      }
    }
  }

  std::vector<char> band_node(grid.node_count(), 0);
  for (int cj = 0; cj < cy; ++cj)
    for (int ci = 0; ci < cx; ++ci)
      if (band[static_cast<std::size_t>(cj) * cx + ci])
        for_each_corner(grid, ci, cj,
                        [&](int i, int j) { band_node[grid.index(i, j)] = 1; });

  RegionMap map;
  map.grid = grid;
  map.band_width_cells = w;
  for (int cj = 0; cj < cy; ++cj)
    for (int ci = 0; ci < cx; ++ci)
      if (band[static_cast<std::size_t>(cj) * cx + ci]) map.band_cells.push_back(grid.index(ci, cj));
  map.labels.resize(grid.node_count());
  for (std::size_t k = 0; k < grid.node_count(); ++k) {
    const int i = grid.i_of(k), j = grid.j_of(k);
    if (grid.on_boundary(i, j)) {
      map.labels[k] = NodeLabel::outer_boundary;
    } else if (band_node[k]) {
      map.labels[k] = signs[k] < 0 ? NodeLabel::band_minus : NodeLabel::band_plus;
    } else {
      map.labels[k] = signs[k] < 0 ? NodeLabel::omega1 : NodeLabel::omega2;
    }
  }

  // Band nodes adjacent to a regular node form the Dirichlet frontier.
  auto visit_neighbours = [&](std::size_t k, auto&& f) {
    const int i = grid.i_of(k), j = grid.j_of(k);
    if (i > 0) f(grid.index(i - 1, j));
    if (i + 1 < grid.n1) f(grid.index(i + 1, j));
    if (grid.dim == 2) {
      if (j > 0) f(grid.index(i, j - 1));
      if (j + 1 < grid.n2) f(grid.index(i, j + 1));
    }
  };
  std::vector<NodeLabel> frontier = map.labels;
  for (std::size_t k = 0; k < grid.node_count(); ++k) {
    const NodeLabel l = map.labels[k];
    if (l != NodeLabel::band_minus && l != NodeLabel::band_plus) continue;
    bool touches_minus = false, touches_plus = false;
    visit_neighbours(k, [&](std::size_t n) {
      touches_minus |= map.labels[n] == NodeLabel::omega1;
      touches_plus |= map.labels[n] == NodeLabel::omega2;
    });
    if (l == NodeLabel::band_minus && touches_minus) frontier[k] = NodeLabel::gamma_minus;
    if (l == NodeLabel::band_plus && touches_plus) frontier[k] = NodeLabel::gamma_plus;
  }
  map.labels = std::move(frontier);

  if (map.count(NodeLabel::omega1) == 0 || map.count(NodeLabel::omega2) == 0) {
    throw Error(ErrorKind::band_covers_domain,
                "grid " + std::to_string(grid.n1 - 1) +
                    " intervals: no regular node left on the " +
                    (map.count(NodeLabel::omega1) == 0 ? "minus" : "plus") +
                    " side after band dilation");
  }
  if (!contact.empty()) throw Error(ErrorKind::interface_touches_boundary, contact);

  map.node_pairs = pair_nodes(phi, grid, map);
  return map;
}

Vec2 normal_at(const LevelSet& phi, const Point& x) {
  Vec2 g = phi.grad(x);
  if (phi.dim == 1) g[1] = 0.0;
  const double len = norm(g, phi.dim);
  if (!(len > 1e-8))
    throw Error(ErrorKind::degenerate_normal,
                "|grad phi| = " + std::to_string(len) + " at (" + std::to_string(x[0]) +
                    "," + std::to_string(x[1]) + ")");
  return Vec2{g[0] / len, g[1] / len};
}

Point project_to_interface(const LevelSet& phi, const Point& x) {
  if (phi.dim == 1 && phi.alpha) return Point{*phi.alpha, 0.0};
  constexpr int kMaxIter = 100;
  // Iterate towards roundoff; anything under kTol is accepted once progress stops.
  constexpr double kTarget = 1e-15;
  constexpr double kTol = 1e-10;
  Point p = x;
  double f = phi(p);
  for (int it = 0; it < kMaxIter; ++it) {
    if (std::abs(f) < kTarget) return p;
    Vec2 g = phi.grad(p);
    if (phi.dim == 1) g[1] = 0.0;
    const double g2 = dot(g, g, phi.dim);
    if (!(g2 > 1e-16)) break;
    double t = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 40; ++ls) {
      Point q{p[0] - t * f * g[0] / g2, p[1] - t * f * g[1] / g2};
      const double fq = phi(q);
      if (std::abs(fq) < std::abs(f)) {
        p = q;
        f = fq;
        improved = true;
        break;
      }
      t *= 0.5;
    }
    if (!improved) break;
  }
  if (std::abs(f) < kTol) return p;
  throw Error(ErrorKind::projection_failed,
              "no interface point found from (" + std::to_string(x[0]) + "," +
                  std::to_string(x[1]) + ")");
}

std::vector<NodePair> pair_nodes(const LevelSet& phi, const GridSpec& grid,
                                 const RegionMap& map) {
  const auto signs = node_signs(phi, grid);
  std::vector<NodePair> pairs;

  auto emit_offset = [&](std::size_t p, std::size_t q) {
    const int sp = signs[p], sq = signs[q];
    if (sp * sq != -1) return;
    NodePair pair;
    pair.minus_node = sp < 0 ? p : q;
    pair.plus_node = sp < 0 ? q : p;
    pair.kind = NodePair::Kind::offset;
    pair.foot = edge_root(phi, grid.node(pair.minus_node), grid.node(pair.plus_node));
    pairs.push_back(pair);
  };

  // Offset case: the interface crosses a grid edge between two nodes.
  for (int j = 0; j < grid.n2; ++j) {
    for (int i = 0; i < grid.n1; ++i) {
      const std::size_t k = grid.index(i, j);
      if (i + 1 < grid.n1) emit_offset(k, grid.index(i + 1, j));
      if (grid.dim == 2 && j + 1 < grid.n2) emit_offset(k, grid.index(i, j + 1));
    }
  }

  // Through-node case: the interface passes through a node; pair the two
  // neighbours along each axis that straddle it.
  for (std::size_t k = 0; k < grid.node_count(); ++k) {
    if (signs[k] != 0) continue;
    const int i = grid.i_of(k), j = grid.j_of(k);
    if (grid.on_boundary(i, j)) continue;
    auto emit_through = [&](std::size_t p, std::size_t q) {
      const int sp = signs[p], sq = signs[q];
      if (sp * sq != -1) return;
      if (!map.in_band(p) || !map.in_band(q)) return;
      NodePair pair;
      pair.minus_node = sp < 0 ? p : q;
      pair.plus_node = sp < 0 ? q : p;
      pair.kind = NodePair::Kind::through_node;
      pair.center_node = k;
      pair.foot = grid.node(k);
      pairs.push_back(pair);
    };
    emit_through(grid.index(i - 1, j), grid.index(i + 1, j));
    if (grid.dim == 2) emit_through(grid.index(i, j - 1), grid.index(i, j + 1));
  }
  return pairs;
}

}  // namespace defuse
