#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "defuse/error.hpp"
#include "defuse/harness.hpp"
#include "defuse/metrics.hpp"
#include "support.hpp"

using namespace defuse;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

StudyTable synthetic() {
  StudyTable t;
  t.problem = "synthetic";
  for (auto [n, e] : {std::pair{10, 1e-2}, {20, 2.5e-3}, {40, 6.25e-4}}) {
    StudyRow r;
    r.n = n;
    r.err_omega1 = e * 0.5;
    r.err_omega2 = e * 0.25;
    r.err_omega = e;
    t.rows.push_back(r);
  }
  compute_orders(t);
  return t;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("order") {
  // Inputs carry three significant digits, worth about 0.0075 in the order.
  CHECK(std::abs(order(4.77e-3, 1.15e-3) - 2.0508) <= 0.0075);
  CHECK(order(4.0 * 3.3e-4, 3.3e-4) == 2.0);
  CHECK(order(1.7e-3, 1.7e-3) == 0.0);
  CHECK(order(2e-3, 5e-4) == -order(5e-4, 2e-3));
  try {
    order(0.0, 1.0);
    FAIL("expected NonPositiveError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::non_positive_error);
  }
  CHECK_THROWS_AS(order(1.0, -1.0), Error);
}

TEST_CASE("orders from synthetic errors") {
  const StudyTable t = synthetic();
  CHECK_FALSE(t.rows[0].order_omega.has_value());
  CHECK(*t.rows[1].order_omega == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(*t.rows[2].order_omega == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("CSV emission") {
  StudyTable empty;
  std::ostringstream e;
  write_csv(e, empty);
  CHECK(e.str() == "n,err_o1,ord_o1,err_o2,ord_o2,err_all,ord_all\n");

  StudyTable one;
  StudyRow r;
  r.n = 10;
  r.err_omega1 = 1.234567e-3;
  r.err_omega2 = 2e-4;
  r.err_omega = 4.77e-3;
  one.rows.push_back(r);
  compute_orders(one);
  std::ostringstream o;
  write_csv(o, one);
  CHECK(o.str() ==
        "n,err_o1,ord_o1,err_o2,ord_o2,err_all,ord_all\n"
        "10,1.23457e-03,,2.00000e-04,,4.77000e-03,\n");
}

TEST_CASE("CSV round-trip to printed precision") {
  const StudyTable t = synthetic();
  std::ostringstream os;
  write_csv(os, t);
  std::istringstream is(os.str());
  const StudyTable back = parse_csv(is);
  REQUIRE(back.rows.size() == t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    CHECK(back.rows[i].n == t.rows[i].n);
    CHECK(back.rows[i].err_omega == doctest::Approx(t.rows[i].err_omega).epsilon(5e-6));
    CHECK(back.rows[i].err_omega1 == doctest::Approx(t.rows[i].err_omega1).epsilon(5e-6));
    CHECK(back.rows[i].order_omega.has_value() == t.rows[i].order_omega.has_value());
    if (t.rows[i].order_omega) CHECK(std::abs(*back.rows[i].order_omega - *t.rows[i].order_omega) <= 5e-5);
  }
  std::ostringstream again;
  write_csv(again, back);
  CHECK(again.str() == os.str());
  std::istringstream bad("x,y\n");
  CHECK_THROWS_AS(parse_csv(bad), Error);
}

TEST_CASE("markdown table") {
  std::ostringstream os;
  write_markdown(os, synthetic());
  const std::string s = os.str();
  CHECK(s.find("| N |") == 0);
  CHECK(s.find("| 20 | 1.25000e-03 | 2.0000 |") != std::string::npos);
  CHECK(s.find("–") != std::string::npos);
}

TEST_CASE("atomic file emission") {
  const auto dir = std::filesystem::temp_directory_path() / "defuse_emit_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "t.csv").string();
  emit(synthetic(), TableFormat::csv, path);
  std::ostringstream os;
  write_csv(os, synthetic());
  CHECK(slurp(path) == os.str());
  emit(synthetic(), TableFormat::csv, path);
  CHECK(slurp(path) == os.str());
  std::size_t files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    (void)e;
    ++files;
  }
  CHECK(files == 1);
  CHECK_THROWS_AS(emit(synthetic(), TableFormat::csv, (dir / "t.csv" / "x.csv").string()), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("exact_error") {
  const ProblemSpec p = get_problem("ex4_1");
  const GridSpec g = p.grid(20);
  const RegionMap m = classify(p.phi, g, p.classify_options(1));
  GridFunction u(g);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    const Side s = p.phi(g.node(k)) < 0 ? Side::minus : Side::plus;
    u.set(k, p.exact(s, g.node(k)).value);
  }
  const ErrorNorms z = exact_error(u, p, m, Region::omega);
  CHECK(z.l2 == 0.0);
  CHECK(z.linf == 0.0);

  const double c = 3e-3;
  for (std::size_t k = 0; k < g.node_count(); ++k) u.values[k] += c;
  const ErrorNorms e1 = exact_error(u, p, m, Region::omega1);
  CHECK(e1.l2 == doctest::Approx(c * std::sqrt(g.h1() * e1.nodes)).epsilon(1e-12));
  CHECK(e1.linf == doctest::Approx(c).epsilon(1e-12));
  CHECK(e1.nodes == m.count(NodeLabel::omega1));
}

TEST_CASE("residual metric vanishes on exact quadratics and on zero data") {
  ProblemSpec p = testing::single_phase(2, [](const Point&) { return 2.0; },
                                        [](const Point&, double) { return -8.0; });
  p.phi = LevelSet{};
  p.phi.dim = 2;
  p.phi.phi = [](const Point&) { return -1.0; };
  p.phi.grad = [](const Point&) { return Vec2{1.0, 0.0}; };
  const GridSpec g = GridSpec::uniform_2d(0.0, 1.0, 0.0, 1.0, 10);
  const RegionMap m = testing::whole_grid(g);
  GridFunction u(g);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    const Point x = g.node(k);
    u.set(k, x[0] * x[0] + x[1] * x[1] + 0.3 * x[0]);
  }
  const ErrorNorms r = residual_metric(u, p, m, Region::omega1);
  CHECK(r.nodes > 0);
  CHECK(r.l2 < 1e-10);

  ProblemSpec z = p;
  z.f_minus.value = [](const Point&, double) { return 0.0; };
  z.f_plus = z.f_minus;
  GridFunction zero(g);
  for (std::size_t k = 0; k < g.node_count(); ++k) zero.set(k, 0.0);
  CHECK(residual_metric(zero, z, m, Region::omega1).l2 == 0.0);
}

TEST_CASE("oracle study rows and per-row seeds") {
  const ProblemSpec p = get_problem("ex4_4");
  StudyConfig cfg;
  cfg.mode = StudyMode::oracle;
  cfg.seed = 5;
  int rows_seen = 0;
  cfg.on_row = [&](const StudyRow&) { ++rows_seen; };
  const StudyTable t = convergence_study(p, {20, 40}, cfg);
  REQUIRE(t.rows.size() == 2);
  CHECK(rows_seen == 2);
  CHECK(t.rows[0].seed == 25);
  CHECK(t.rows[1].seed == 45);
  CHECK(t.rows[1].err_omega < t.rows[0].err_omega);
  CHECK(t.rows[1].order_omega.has_value());
  CHECK_THROWS_AS(convergence_study(p, {20, 30}, cfg), Error);
}

TEST_CASE("failing row names its grid") {
  const ProblemSpec p = get_problem("ex4_5");
  StudyConfig cfg;
  cfg.mode = StudyMode::oracle;
  try {
    convergence_study(p, {10, 20}, cfg);
    FAIL("expected BandCoversDomain");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::band_covers_domain);
    CHECK(std::string(e.what()).find("10") != std::string::npos);
  }
}

}  // TEST_SUITE
