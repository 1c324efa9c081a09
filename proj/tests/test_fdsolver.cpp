#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "doctest.h"

#include "defuse/error.hpp"
#include "defuse/fdsolver.hpp"
#include "defuse/harness.hpp"
#include "fd_checks.hpp"
#include "support.hpp"

using namespace defuse;
using testing::single_phase;
using testing::whole_grid;

TEST_SUITE("fdsolver") {

TEST_CASE("1D node between known neighbours takes their average") {
  const ProblemSpec p = single_phase(1, [](const Point&) { return 1.0; },
                                     [](const Point&, double) { return 0.0; });
  const GridSpec g = GridSpec::uniform_1d(0.0, 1.0, 2);
  GridFunction d(g);
  d.set(0, 0.0);
  d.set(2, 1.0);
  const LinearSystem sys = assemble(p, Side::minus, g, whole_grid(g), d, nullptr);
  REQUIRE(sys.unknowns.size() == 1);
  CHECK(sys.matrix.coeff(0, 0) == doctest::Approx(2.0 / 0.25));
  CHECK(sys.rhs[0] == doctest::Approx(1.0 / 0.25));
  CHECK(solve_linear(sys)[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("stencil reproduces the Laplacian of a paraboloid") {
  const ProblemSpec p = single_phase(2, [](const Point&) { return 1.0; },
                                     [](const Point&, double) { return -4.0; });
  const GridSpec g = GridSpec::uniform_2d(-1.0, 1.0, -1.0, 1.0, 6);
  const auto u = [](const Point& x) { return x[0] * x[0] + x[1] * x[1]; };
  const LinearSystem sys = assemble(p, Side::minus, g, whole_grid(g), testing::ring_data(g, u), nullptr);
  Eigen::VectorXd uv(static_cast<Eigen::Index>(sys.unknowns.size()));
  for (std::size_t r = 0; r < sys.unknowns.size(); ++r) uv[r] = u(g.node(sys.unknowns[r]));
  const Eigen::VectorXd res = sys.matrix * uv - sys.rhs;
  CHECK(res.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("degree-2 polynomials are solved exactly") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    CHECK(testing::quadratic_solve_error(rng, false, 8) < 1e-12);
    CHECK(testing::quadratic_solve_error(rng, true, 8) < 1e-12);
  }
}

TEST_CASE("1D Poisson with constant source gives x(1-x) at the nodes") {
  const ProblemSpec p = single_phase(1, [](const Point&) { return 1.0; },
                                     [](const Point&, double) { return 2.0; });
  const GridSpec g = GridSpec::uniform_1d(0.0, 1.0, 10);
  GridFunction d(g);
  d.set(0, 0.0);
  d.set(10, 0.0);
  const PicardResult r = solve_picard(p, Side::minus, g, whole_grid(g), d);
  for (int i = 0; i <= 10; ++i) {
    const double x = g.node(i, 0)[0];
    CHECK(std::abs(r.u.at(i) - x * (1.0 - x)) < 1e-14);
  }
}

TEST_CASE("identity system returns its right-hand side") {
  LinearSystem sys;
  sys.matrix.resize(3, 3);
  sys.matrix.setIdentity();
  sys.rhs = Eigen::Vector3d(1.0, -2.0, 0.5);
  const Eigen::VectorXd x = solve_linear(sys);
  CHECK(x[0] == 1.0);
  CHECK(x[1] == -2.0);
  CHECK(x[2] == 0.5);
}

TEST_CASE("random five-point system solves to a small residual") {
  std::mt19937_64 rng(8);
  double a[3];
  for (double& v : a) v = uniform01(rng);
  const ProblemSpec p = single_phase(
      2, [=](const Point& x) { return 0.1 + a[0] + a[1] * std::sin(5 * x[0]) * std::sin(5 * x[0]) + a[2] * x[1]; },
      [](const Point& x, double) { return std::cos(3 * x[0] * x[1]); });
  const GridSpec g = GridSpec::uniform_2d(0.0, 1.0, 0.0, 1.0, 21);
  const LinearSystem sys =
      assemble(p, Side::minus, g, whole_grid(g), testing::ring_data(g, [](const Point& x) { return x[0]; }), nullptr);
  REQUIRE(sys.unknowns.size() == 400);
  const Eigen::VectorXd x = solve_linear(sys);
  const Eigen::MatrixXd dense(sys.matrix);
  const double res = (dense * x - sys.rhs).cwiseAbs().maxCoeff();
  CHECK(res <= 1e-12 * sys.rhs.cwiseAbs().maxCoeff());
}

TEST_CASE("Picard with a u-independent source stops after two sweeps") {
  const ProblemSpec p = single_phase(1, [](const Point&) { return 1.0; },
                                     [](const Point&, double) { return 2.0; });
  const GridSpec g = GridSpec::uniform_1d(0.0, 1.0, 10);
  GridFunction d(g);
  d.set(0, 0.0);
  d.set(10, 0.0);
  const PicardResult r = solve_picard(p, Side::minus, g, whole_grid(g), d);
  CHECK(r.iterations == 2);
  CHECK(r.last_increment == 0.0);
  const PicardResult once =
      solve_picard(p, Side::minus, g, whole_grid(g), d, std::numeric_limits<double>::infinity());
  CHECK(once.iterations == 1);
  CHECK_THROWS_AS(solve_picard(p, Side::minus, g, whole_grid(g), d, 0.0), Error);
}

TEST_CASE("Picard on f = -u + s matches the direct solve of the shifted system") {
  using std::numbers::pi;
  const auto s = [](const Point& x) {
    return (pi * pi + 1.0) * std::sin(pi * x[0]) + x[0];
  };
  const ProblemSpec p = single_phase(
      1, [](const Point&) { return 1.0; }, [=](const Point& x, double u) { return -u + s(x); },
      [](const Point&, double) { return -1.0; });
  const int n = 20;
  const GridSpec g = GridSpec::uniform_1d(0.0, 1.0, n);
  GridFunction d(g);
  d.set(0, 0.0);
  d.set(n, 1.0);
  const PicardResult r = solve_picard(p, Side::minus, g, whole_grid(g), d, 1e-13);

  const double h = g.h1();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n - 1, n - 1);
  Eigen::VectorXd b(n - 1);
  for (int i = 1; i < n; ++i) {
    a(i - 1, i - 1) = 2.0 / (h * h) + 1.0;
    if (i > 1) a(i - 1, i - 2) = -1.0 / (h * h);
    if (i < n - 1) a(i - 1, i) = -1.0 / (h * h);
    b[i - 1] = s(g.node(i, 0)) + (i == n - 1 ? 1.0 / (h * h) : 0.0);
  }
  const Eigen::VectorXd direct = a.partialPivLu().solve(b);
  for (int i = 1; i < n; ++i) CHECK(std::abs(r.u.at(i) - direct[i - 1]) < 1e-9);
  CHECK(r.iterations > 2);
}

TEST_CASE("missing boundary data is reported") {
  const ProblemSpec p = single_phase(2, [](const Point&) { return 1.0; },
                                     [](const Point&, double) { return 0.0; });
  const GridSpec g = GridSpec::uniform_2d(0.0, 1.0, 0.0, 1.0, 4);
  try {
    assemble(p, Side::minus, g, whole_grid(g), GridFunction(g), nullptr);
    FAIL("expected MissingDirichlet");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::missing_dirichlet);
  }
}

TEST_CASE("non-positive coefficient is a solver breakdown") {
  const ProblemSpec p = single_phase(2, [](const Point& x) { return x[0] - 0.5; },
                                     [](const Point&, double) { return 0.0; });
  const GridSpec g = GridSpec::uniform_2d(0.0, 1.0, 0.0, 1.0, 4);
  try {
    assemble(p, Side::minus, g, whole_grid(g), testing::ring_data(g, [](const Point&) { return 0.0; }), nullptr);
    FAIL("expected SolverBreakdown");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::solver_breakdown);
  }
}

TEST_CASE("discrete maximum principle") {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 10; ++t) CHECK(testing::max_principle_excursion(rng, 15) <= 1e-12);
}

TEST_CASE("smooth variable-coefficient problem converges at second order") {
  const double e1 = testing::manufactured_error(20), e2 = testing::manufactured_error(40);
  CHECK(order(e1, e2) == doctest::Approx(2.0).epsilon(0.025));
}

TEST_CASE("decoupled solves: order of execution and plus-side data do not touch the minus side") {
  const ProblemSpec p = get_problem("ex4_4");
  const RegionMap m = classify(p.phi, p.grid(20), p.classify_options(1));
  const BandValues exact = exact_band_values(p);
  const DecoupledSolution seq = solve_decoupled(p, m, exact, false);
  const DecoupledSolution par = solve_decoupled(p, m, exact, true);
  CHECK(seq.minus.values == par.minus.values);
  CHECK(seq.plus.values == par.plus.values);

  ProblemSpec q = p;
  const auto g0 = p.g;
  q.g = [g0](const Point& x) { return g0(x) + 0.3; };
  const BandValues bent = [exact](Side s, const Point& x) {
    return exact(s, x) + (s == Side::plus ? 0.1 : 0.0);
  };
  const DecoupledSolution moved = solve_decoupled(q, m, bent, true);
  CHECK(moved.minus.values == seq.minus.values);
  CHECK(moved.plus.values != seq.plus.values);
}

TEST_CASE("solution CSV lists defined nodes") {
  const GridSpec g = GridSpec::uniform_1d(0.0, 1.0, 4);
  GridFunction u(g);
  u.set(1, 0.5);
  u.set(3, 0.25);
  std::ostringstream os;
  u.write_csv(os);
  CHECK(os.str() == "x,u\n0.25,0.5\n0.75,0.25\n");
  CHECK(u.count() == 2);
}

}  // TEST_SUITE
