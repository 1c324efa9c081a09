#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"

#include "defuse/error.hpp"
#include "defuse/geometry.hpp"
#include "defuse/problems.hpp"

using namespace defuse;

namespace {

LevelSet circle(double r) {
  LevelSet ls;
  ls.dim = 2;
  ls.phi = [r](const Point& x) { return x[0] * x[0] + x[1] * x[1] - r * r; };
  ls.grad = [](const Point& x) { return Vec2{2.0 * x[0], 2.0 * x[1]}; };
  return ls;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::invalid_argument;
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("1D band around a node-aligned interface") {
  const GridSpec g = GridSpec::uniform_1d(0.0, 2.0, 10);
  const RegionMap m = classify(LevelSet::point_1d(1.0), g, 1);
  CHECK(m.labels[5] != NodeLabel::omega1);
  CHECK(m.in_band(5));
  CHECK(m.labels[3] == NodeLabel::gamma_minus);
  CHECK(m.labels[7] == NodeLabel::gamma_plus);
  CHECK(m.count(NodeLabel::gamma_minus) == 1);
  CHECK(m.count(NodeLabel::gamma_plus) == 1);
  for (int i : {1, 2}) CHECK(m.labels[i] == NodeLabel::omega1);
  for (int i : {8, 9}) CHECK(m.labels[i] == NodeLabel::omega2);
  CHECK(m.labels[0] == NodeLabel::outer_boundary);
  CHECK(m.labels[10] == NodeLabel::outer_boundary);

  REQUIRE(m.node_pairs.size() == 1);
  CHECK(g.node(m.node_pairs[0].minus_node)[0] == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(g.node(m.node_pairs[0].plus_node)[0] == doctest::Approx(1.2).epsilon(1e-14));
}

TEST_CASE("too coarse a 1D grid is all band") {
  const GridSpec g = GridSpec::uniform_1d(0.0, 2.0, 2);
  CHECK(kind_of([&] { classify(LevelSet::point_1d(1.0), g, 1); }) ==
        ErrorKind::band_covers_domain);
}

TEST_CASE("cut cells match a closed-cell circle intersection test") {
  for (int intervals : {4, 8, 13, 40}) {
    const GridSpec g = GridSpec::uniform_2d(-1.0, 1.0, -1.0, 1.0, intervals);
    std::set<std::size_t> brute;
    for (int j = 0; j + 1 < g.n2; ++j)
      for (int i = 0; i + 1 < g.n1; ++i) {
        const Point lo = g.node(i, j), hi = g.node(i + 1, j + 1);
        // Nearest and farthest distance from the origin over the closed cell.
        const double nx = std::clamp(0.0, lo[0], hi[0]), ny = std::clamp(0.0, lo[1], hi[1]);
        const double fx = std::max(std::abs(lo[0]), std::abs(hi[0]));
        const double fy = std::max(std::abs(lo[1]), std::abs(hi[1]));
        const double near2 = nx * nx + ny * ny, far2 = fx * fx + fy * fy;
        if (near2 <= 0.25 + 1e-12 && far2 >= 0.25 - 1e-12) brute.insert(g.index(i, j));
      }
    const auto cells = cut_cells(circle(0.5), g);
    CHECK(std::set<std::size_t>(cells.begin(), cells.end()) == brute);
  }
}

TEST_CASE("coarse circle grid: center-adjacent cells are cut") {
  const GridSpec g = GridSpec::uniform_2d(-1.0, 1.0, -1.0, 1.0, 4);
  const auto cells = cut_cells(circle(0.5), g);
  for (auto [i, j] : {std::pair{1, 1}, {2, 1}, {1, 2}, {2, 2}})
    CHECK(std::count(cells.begin(), cells.end(), g.index(i, j)) == 1);
}

TEST_CASE("circle classification") {
  // At h = 0.5 every minus node is in the band.
  CHECK(kind_of([] { classify(circle(0.5), GridSpec::uniform_2d(-1.0, 1.0, -1.0, 1.0, 4), 1); }) ==
        ErrorKind::band_covers_domain);
  const GridSpec g = GridSpec::uniform_2d(-1.0, 1.0, -1.0, 1.0, 16);
  const RegionMap m = classify(circle(0.5), g, 1);
  CHECK(m.label(8, 8) == NodeLabel::omega1);
  CHECK(m.in_band(g.index(12, 8)));
  CHECK(m.label(0, 0) == NodeLabel::outer_boundary);
  CHECK(m.label(1, 1) == NodeLabel::omega2);
}

TEST_CASE("labels agree with the level-set sign") {
  const GridSpec g = GridSpec::uniform_2d(-1.0, 1.0, -1.0, 1.0, 40);
  const LevelSet ls = circle(0.5);
  const RegionMap m = classify(ls, g, 1);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    const double p = ls(g.node(k));
    switch (m.labels[k]) {
      case NodeLabel::omega1:
      case NodeLabel::gamma_minus:
        CHECK(p < 0.0);
        break;
      case NodeLabel::omega2:
      case NodeLabel::gamma_plus:
        CHECK(p > 0.0);
        break;
      default:
        break;
    }
  }
  // No omega1 node touches an omega2 node.
  for (int j = 1; j + 1 < g.n2; ++j)
    for (int i = 1; i + 1 < g.n1; ++i) {
      if (m.label(i, j) != NodeLabel::omega1) continue;
      for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}})
        CHECK(m.label(i + di, j + dj) != NodeLabel::omega2);
    }
}

TEST_CASE("region CSV lists every node") {
  const GridSpec g = GridSpec::uniform_1d(0.0, 2.0, 10);
  const RegionMap m = classify(LevelSet::point_1d(1.0), g, 1);
  std::ostringstream os;
  m.write_csv(os);
  const std::string s = os.str();
  CHECK(s.rfind("i,j,label\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 12);
  CHECK(s.find("3,0,gamma_minus") != std::string::npos);
}

TEST_CASE("normal_at") {
  const Vec2 n = normal_at(circle(0.5), Point{0.5, 0.0});
  CHECK(n[0] == doctest::Approx(1.0));
  CHECK(n[1] == doctest::Approx(0.0));
  CHECK(normal_at(LevelSet::point_1d(1.0), Point{1.0, 0.0})[0] == 1.0);
  CHECK(kind_of([] { normal_at(circle(0.5), Point{0.0, 0.0}); }) == ErrorKind::degenerate_normal);
}

TEST_CASE("project_to_interface") {
  const Point p = project_to_interface(circle(0.5), Point{0.8, 0.0});
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(p[1]) < 1e-12);
  CHECK(project_to_interface(LevelSet::point_1d(1.0), Point{0.9, 0.0})[0] ==
        doctest::Approx(1.0).epsilon(1e-14));

  const ProblemSpec flower = get_problem("ex4_5");
  const Point q = project_to_interface(flower.phi, Point{0.6, 0.1});
  CHECK(std::abs(flower.phi(q)) < 1e-10);
}

TEST_CASE("offset pairs are exactly the strict sign-changing edges") {
  const GridSpec g = GridSpec::uniform_2d(-1.0, 1.0, -1.0, 1.0, 40);
  const LevelSet ls = circle(0.5);
  const RegionMap m = classify(ls, g, 1);
  std::size_t edges = 0;
  auto strict = [&](std::size_t a, std::size_t b) {
    const double pa = ls(g.node(a)), pb = ls(g.node(b));
    return std::abs(pa) > kOnInterfaceTol && std::abs(pb) > kOnInterfaceTol && pa * pb < 0.0;
  };
  for (int j = 0; j < g.n2; ++j)
    for (int i = 0; i < g.n1; ++i) {
      if (i + 1 < g.n1 && strict(g.index(i, j), g.index(i + 1, j))) ++edges;
      if (j + 1 < g.n2 && strict(g.index(i, j), g.index(i, j + 1))) ++edges;
    }
  std::size_t offset = 0;
  for (const NodePair& p : m.node_pairs) {
    if (p.kind != NodePair::Kind::offset) continue;
    ++offset;
    CHECK(ls(g.node(p.minus_node)) < 0.0);
    CHECK(ls(g.node(p.plus_node)) > 0.0);
    const int di = std::abs(g.i_of(p.minus_node) - g.i_of(p.plus_node));
    const int dj = std::abs(g.j_of(p.minus_node) - g.j_of(p.plus_node));
    CHECK(di + dj == 1);
    CHECK(std::abs(ls(p.foot)) < 1e-10);
  }
  CHECK(offset == edges);
}

TEST_CASE("line through grid nodes gives through-node pairs two cells apart") {
  LevelSet line;
  line.dim = 2;
  line.phi = [](const Point& x) { return x[0] + x[1]; };
  line.grad = [](const Point&) { return Vec2{1.0, 1.0}; };
  const GridSpec g = GridSpec::uniform_2d(-1.0, 1.0, -1.0, 1.0, 20);
  const RegionMap m = classify(line, g, ClassifyOptions{1, true});
  std::size_t through = 0;
  for (const NodePair& p : m.node_pairs) {
    if (p.kind != NodePair::Kind::through_node) continue;
    ++through;
    const int ci = g.i_of(p.center_node), cj = g.j_of(p.center_node);
    CHECK(std::abs(line(g.node(p.center_node))) < kOnInterfaceTol);
    const int mi = g.i_of(p.minus_node) - ci, mj = g.j_of(p.minus_node) - cj;
    const int pi = g.i_of(p.plus_node) - ci, pj = g.j_of(p.plus_node) - cj;
    // Opposite neighbours across the center node.
    CHECK(mi == -pi);
    CHECK(mj == -pj);
    CHECK(std::abs(mi) + std::abs(mj) == 1);
    CHECK(line(g.node(p.minus_node)) < 0.0);
    CHECK(line(g.node(p.plus_node)) > 0.0);
  }
  CHECK(through > 0);
}

TEST_CASE("all built-in 2D problems classify at their working grids") {
  for (const char* name : {"ex4_3", "ex4_4", "ex4_7"}) {
    const ProblemSpec p = get_problem(name);
    CHECK_NOTHROW(classify(p.phi, p.grid(10), p.classify_options(1)));
  }
  for (const char* name : {"ex4_5", "ex4_8", "ex4_9", "ex4_10", "ex4_11"}) {
    const ProblemSpec p = get_problem(name);
    CHECK_NOTHROW(classify(p.phi, p.grid(20), p.classify_options(1)));
  }
}

}  // TEST_SUITE
