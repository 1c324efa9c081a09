#include "defuse/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "defuse/error.hpp"

namespace defuse {

namespace {

constexpr double kPi = std::numbers::pi;

Jet make_jet(int dim, double v, Vec2 g, Mat2 h) {
  Jet j;
  j.dim = dim;
  j.value = v;
  j.grad = g;
  j.hess = h;
  if (dim == 1) {
    j.grad[1] = 0.0;
    j.hess[0][1] = j.hess[1][0] = j.hess[1][1] = 0.0;
  }
  return j;
}

double r2(const Point& x) { return x[0] * x[0] + x[1] * x[1]; }

Coefficient constant_beta(double c) {
  return {[c](const Point&) { return c; }, [](const Point&) { return Vec2{0.0, 0.0}; }};
}

SourceTerm source(std::function<double(const Point&)> f) {
  SourceTerm s;
  s.value = [f = std::move(f)](const Point& x, double) { return f(x); };
  return s;
}

// -div(beta grad u) evaluated from an exact jet.
double divergence_source(const Coefficient& beta, const Jet& u, const Point& x) {
  const Vec2 gb = beta.grad(x);
  return -(dot(gb, u.grad, u.dim) + beta.value(x) * u.laplacian());
}

// w = u+ - u-, v = beta+ du+/dn - beta- du-/dn at an interface point.
void jumps_from_exact(ProblemSpec& p) {
  p.jump_w = [exact = p.exact](const Point& x0) {
    return exact(Side::plus, x0).value - exact(Side::minus, x0).value;
  };
  p.jump_v = [exact = p.exact, bm = p.beta_minus, bp = p.beta_plus,
              phi = p.phi](const Point& x0) {
    const Vec2 n = normal_at(phi, x0);
    const int d = phi.dim;
    return bp.value(x0) * dot(exact(Side::plus, x0).grad, n, d) -
           bm.value(x0) * dot(exact(Side::minus, x0).grad, n, d);
  };
}

void boundary_from_exact(ProblemSpec& p) {
  p.g = [exact = p.exact, phi = p.phi](const Point& x) {
    return exact(phi(x) < 0.0 ? Side::minus : Side::plus, x).value;
  };
  p.g_hat = [exact = p.exact](const Point& x) { return exact(Side::plus, x).value; };
}

double param(const ParamMap& params, const char* key) { return params.at(key); }

ParamMap merge_params(const std::string& name, ParamMap defaults, const ParamMap& overrides) {
  for (const auto& [k, v] : overrides) {
    auto it = defaults.find(k);
    if (it == defaults.end())
      throw Error(ErrorKind::unknown_param, "'" + k + "' is not a parameter of " + name);
    if (!std::isfinite(v) || v <= 0.0)
      throw Error(ErrorKind::invalid_argument, "'" + k + "' must be positive and finite");
    it->second = v;
  }
  return defaults;
}

LevelSet circle_level_set(double radius) {
  LevelSet ls;
  ls.dim = 2;
  ls.phi = [radius](const Point& x) { return r2(x) - radius * radius; };
  ls.grad = [](const Point& x) { return Vec2{2.0 * x[0], 2.0 * x[1]}; };
  return ls;
}

// ---------------------------------------------------------------- 1D

ProblemSpec ex4_1(const ParamMap& overrides) {
  ProblemSpec p;
  p.name = "ex4_1";
  p.description = "1D degenerate coefficient, homogeneous jumps";
  p.dim = 1;
  p.bounds = {0.0, 2.0, 0.0, 0.0};
  p.phi = LevelSet::point_1d(1.0);
  p.params = merge_params(p.name, {{"tau_minus", 1e12}, {"tau_plus", 1.0}}, overrides);
  const double tm = param(p.params, "tau_minus"), tp = param(p.params, "tau_plus");

  p.beta_minus = {[tm](const Point& x) { return tm * std::sqrt(1.0 - x[0]); },
                  [tm](const Point& x) { return Vec2{-tm / (2.0 * std::sqrt(1.0 - x[0])), 0.0}; }};
  p.beta_plus = {[tp](const Point& x) { return tp * std::sqrt(x[0] - 1.0); },
                 [tp](const Point& x) { return Vec2{tp / (2.0 * std::sqrt(x[0] - 1.0)), 0.0}; }};
  p.f_minus = source([](const Point& x) {
    const double s = std::sqrt(1.0 - x[0]);
    return std::exp(s) / (4.0 * s);
  });
  p.f_plus = source([](const Point& x) {
    const double s = std::sqrt(x[0] - 1.0);
    return -std::exp(s) / (4.0 * s);
  });
  p.exact = [tm, tp](Side side, const Point& x) {
    if (side == Side::minus) {
      const double s = std::sqrt(1.0 - x[0]), e = std::exp(s);
      return make_jet(1, (1.0 - e) / tm, {e / (2.0 * s * tm), 0.0},
                      {{{-e * (s - 1.0) / (4.0 * s * s * s * tm), 0.0}, {0.0, 0.0}}});
    }
    const double s = std::sqrt(x[0] - 1.0), e = std::exp(s);
    return make_jet(1, (e - 1.0) / tp, {e / (2.0 * s * tp), 0.0},
                    {{{e * (s - 1.0) / (4.0 * s * s * s * tp), 0.0}, {0.0, 0.0}}});
  };
  p.jump_w = [](const Point&) { return 0.0; };
  p.jump_v = [](const Point&) { return 0.0; };
  boundary_from_exact(p);
  p.jump_w_zero = true;
  p.degenerate = true;
  return p;
}

ProblemSpec ex4_2(const ParamMap& overrides) {
  ProblemSpec p;
  p.name = "ex4_2";
  p.description = "1D degenerate coefficient, jump w = 5";
  p.dim = 1;
  p.bounds = {0.0, 2.0, 0.0, 0.0};
  p.phi = LevelSet::point_1d(1.0);
  p.params = merge_params(p.name, {{"tau_minus", 1e12}, {"tau_plus", 1.0}}, overrides);
  const double tm = param(p.params, "tau_minus"), tp = param(p.params, "tau_plus");

  p.beta_minus = {[tm](const Point& x) { return tm * std::cbrt(1.0 - x[0]); },
                  [tm](const Point& x) {
                    const double d = 1.0 - x[0];
                    return Vec2{-tm / (3.0 * std::cbrt(d * d)), 0.0};
                  }};
  p.beta_plus = {[tp](const Point& x) { return tp * std::sqrt(x[0] - 1.0); },
                 [tp](const Point& x) { return Vec2{tp / (2.0 * std::sqrt(x[0] - 1.0)), 0.0}; }};
  p.f_minus = source([tm](const Point& x) {
    const double d = 1.0 - x[0], c = std::cbrt(d);
    return -(4.0 / 9.0) * tm * std::exp(c * c) / c;
  });
  p.f_plus = source([tp](const Point& x) {
    const double s = std::sqrt(x[0] - 1.0);
    return -tp * std::exp(s) / (4.0 * s);
  });
  p.exact = [](Side side, const Point& x) {
    if (side == Side::minus) {
      const double d = 1.0 - x[0], c = std::cbrt(d), e = std::exp(c * c);
      const double g = -(2.0 / 3.0) * e / c;
      const double h = -(2.0 / 3.0) * e * (-(2.0 / 3.0) / (c * c) + (1.0 / 3.0) / (c * c * c * c));
      return make_jet(1, e, {g, 0.0}, {{{h, 0.0}, {0.0, 0.0}}});
    }
    const double s = std::sqrt(x[0] - 1.0), e = std::exp(s);
    return make_jet(1, e + 5.0, {e / (2.0 * s), 0.0},
                    {{{e * (s - 1.0) / (4.0 * s * s * s), 0.0}, {0.0, 0.0}}});
  };
  const double v = tp / 2.0 + 2.0 * tm / 3.0;
  p.jump_w = [](const Point&) { return 5.0; };
  p.jump_v = [v](const Point&) { return v; };
  boundary_from_exact(p);
  p.degenerate = true;
  return p;
}

// ---------------------------------------------------------------- circles

ProblemSpec ex4_3(const ParamMap& overrides) {
  ProblemSpec p;
  p.name = "ex4_3";
  p.description = "2D circle, coefficient vanishing on the interface";
  p.dim = 2;
  p.bounds = {-1.0, 1.0, -1.0, 1.0};
  p.phi = circle_level_set(0.5);
  p.params = merge_params(p.name, {{"tau_minus", 1e10}, {"tau_plus", 1.0}}, overrides);
  const double tm = param(p.params, "tau_minus"), tp = param(p.params, "tau_plus");

  p.beta_minus = {[tm](const Point& x) { return tm * (1.0 - std::cos(r2(x) - 0.25)); },
                  [tm](const Point& x) {
                    const double s = std::sin(r2(x) - 0.25);
                    return Vec2{2.0 * tm * s * x[0], 2.0 * tm * s * x[1]};
                  }};
  p.beta_plus = {[tp](const Point& x) { return tp * (3.0 - x[0] * x[1]); },
                 [tp](const Point& x) { return Vec2{-tp * x[1], -tp * x[0]}; }};
  p.f_minus = source([tm](const Point& x) {
    const double q = r2(x) - 0.25;
    return -tm * (4.0 * r2(x) * std::sin(q) + 4.0 * (1.0 - std::cos(q)));
  });
  p.f_plus = source([tp](const Point& x) { return tp * (12.0 - 8.0 * x[0] * x[1]); });
  p.exact = [](Side side, const Point& x) {
    if (side == Side::minus)
      return make_jet(2, r2(x) + 2.0, {2.0 * x[0], 2.0 * x[1]}, {{{2.0, 0.0}, {0.0, 2.0}}});
    return make_jet(2, 1.0 - r2(x), {-2.0 * x[0], -2.0 * x[1]}, {{{-2.0, 0.0}, {0.0, -2.0}}});
  };
  jumps_from_exact(p);
  boundary_from_exact(p);
  p.degenerate = true;
  return p;
}

ProblemSpec ex4_4(const ParamMap& overrides) {
  ProblemSpec p;
  p.name = "ex4_4";
  p.description = "2D circle, piecewise-constant high-contrast coefficient";
  p.dim = 2;
  p.bounds = {-1.0, 1.0, -1.0, 1.0};
  p.phi = circle_level_set(0.5);
  p.params = merge_params(p.name, {{"tau_minus", 1e10}, {"tau_plus", 1.0}}, overrides);
  const double tm = param(p.params, "tau_minus"), tp = param(p.params, "tau_plus");

  p.beta_minus = constant_beta(tm);
  p.beta_plus = constant_beta(tp);
  auto f = [](const Point& x) { return -9.0 * std::sqrt(r2(x)); };
  p.f_minus = source(f);
  p.f_plus = source(f);
  const double shift = (1.0 / tm - 1.0 / tp) * 0.125;
  p.exact = [tm, tp, shift](Side side, const Point& x) {
    const double r = std::sqrt(r2(x));
    const double scale = side == Side::minus ? 1.0 / tm : 1.0 / tp;
    Mat2 h{{{0.0, 0.0}, {0.0, 0.0}}};
    if (r > 0.0) {
      h = {{{3.0 * (r + x[0] * x[0] / r) * scale, 3.0 * x[0] * x[1] / r * scale},
            {3.0 * x[0] * x[1] / r * scale, 3.0 * (r + x[1] * x[1] / r) * scale}}};
    }
    const double v = r * r * r * scale + (side == Side::plus ? shift : 0.0);
    return make_jet(2, v, {3.0 * r * x[0] * scale, 3.0 * r * x[1] * scale}, h);
  };
  p.jump_w = [](const Point&) { return 0.0; };
  p.jump_v = [](const Point&) { return 0.0; };
  boundary_from_exact(p);
  p.jump_w_zero = true;
  return p;
}

// ---------------------------------------------------------------- flower

constexpr double kFlowerShift = 0.04472135954999579;  // 0.02 * sqrt(5)

ProblemSpec ex4_5(const ParamMap& overrides) {
  ProblemSpec p;
  p.name = "ex4_5";
  p.description = "2D flower-shaped interface";
  p.dim = 2;
  p.bounds = {-1.0, 1.0, -1.0, 1.0};
  p.params = merge_params(p.name, {}, overrides);
  p.phi.dim = 2;
  p.phi.phi = [](const Point& x) {
    const double a = x[0] - kFlowerShift, b = x[1] - kFlowerShift;
    const double rho = 0.5 + 0.2 * std::sin(5.0 * std::atan2(b, a));
    return a * a + b * b - rho * rho;
  };
  p.phi.grad = [](const Point& x) {
    const double a = x[0] - kFlowerShift, b = x[1] - kFlowerShift;
    const double q = a * a + b * b;
    const double th = std::atan2(b, a);
    const double rho = 0.5 + 0.2 * std::sin(5.0 * th);
    const double drho = std::cos(5.0 * th);  // d(rho)/d(theta) = 0.2 * 5 cos(5 theta)
    if (q == 0.0) return Vec2{0.0, 0.0};
    // d(theta)/dx = (-b, a) / q
    const double c = 2.0 * rho * drho;
    return Vec2{2.0 * a + c * b / q, 2.0 * b - c * a / q};
  };
  p.beta_minus = {[](const Point& x) { return (x[0] * x[0] - x[1] * x[1] + 3.0) / 7.0; },
                  [](const Point& x) { return Vec2{2.0 * x[0] / 7.0, -2.0 * x[1] / 7.0}; }};
  p.beta_plus = {[](const Point& x) { return (x[0] * x[1] + 2.0) / 5.0; },
                 [](const Point& x) { return Vec2{x[1] / 5.0, x[0] / 5.0}; }};
  p.f_minus = source([](const Point& x) {
    return -(8.0 * x[0] * x[0] - 8.0 * x[1] * x[1] + 12.0);
  });
  p.f_plus = source([](const Point& x) { return 8.0 * x[0] * x[1] + 8.0; });
  p.exact = [](Side side, const Point& x) {
    if (side == Side::minus)
      return make_jet(2, 7.0 * r2(x) + 6.0, {14.0 * x[0], 14.0 * x[1]},
                      {{{14.0, 0.0}, {0.0, 14.0}}});
    return make_jet(2, 5.0 - 5.0 * r2(x), {-10.0 * x[0], -10.0 * x[1]},
                    {{{-10.0, 0.0}, {0.0, -10.0}}});
  };
  jumps_from_exact(p);
  boundary_from_exact(p);
  return p;
}

// ---------------------------------------------------------------- V-shaped

Point closest_on_segment(const Point& x, const Point& a, const Point& b) {
  const double ex = b[0] - a[0], ey = b[1] - a[1];
  const double len2 = ex * ex + ey * ey;
  double t = len2 > 0.0 ? ((x[0] - a[0]) * ex + (x[1] - a[1]) * ey) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return Point{a[0] + t * ex, a[1] + t * ey};
}

double dist2(const Point& a, const Point& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1];
  return dx * dx + dy * dy;
}

ProblemSpec ex4_7(const ParamMap& overrides) {
  ProblemSpec p;
  p.name = "ex4_7";
  p.description = "2D sharp-edged piecewise-linear interface";
  p.dim = 2;
  p.bounds = {-1.0, 1.0, -1.0, 1.0};
  p.params = merge_params(p.name, {}, overrides);
  p.phi.dim = 2;
  p.phi.phi = [](const Point& x) {
    return x[0] + x[1] > 0.0 ? x[1] - 2.0 * x[0] : x[1] + 0.5 * x[0];
  };
  p.phi.grad = [](const Point& x) {
    return x[0] + x[1] > 0.0 ? Vec2{-2.0, 1.0} : Vec2{0.5, 1.0};
  };
  // The two rays leave the origin towards (0.5, 1) and (-1, 0.5).
  p.closest = [](const Point& x) {
    const Point o{0.0, 0.0};
    const Point a = closest_on_segment(x, o, Point{0.5, 1.0});
    const Point b = closest_on_segment(x, o, Point{-1.0, 0.5});
    return dist2(x, a) <= dist2(x, b) ? a : b;
  };
  p.beta_minus = {[](const Point& x) { return (x[0] * x[0] - x[1] * x[1] + 3.0) / 7.0; },
                  [](const Point& x) { return Vec2{2.0 * x[0] / 7.0, -2.0 * x[1] / 7.0}; }};
  p.beta_plus = constant_beta(8.0);
  p.f_minus = source([](const Point& x) {
    return -(8.0 * x[0] * x[0] - 8.0 * x[1] * x[1] + 12.0);
  });
  p.f_plus = source([](const Point& x) {
    const double s = x[0] + x[1];
    // u'' jumps across s = 0; grid nodes on that line take the mean of both sides.
    if (std::abs(s) <= 1e-12) return 8.0;
    return s > 0.0 ? 0.0 : 16.0 * (std::sin(s) + std::cos(s));
  });
  p.exact = [](Side side, const Point& x) {
    if (side == Side::minus)
      return make_jet(2, 7.0 * r2(x) + 6.0, {14.0 * x[0], 14.0 * x[1]},
                      {{{14.0, 0.0}, {0.0, 14.0}}});
    const double s = x[0] + x[1];
    if (s > 0.0) return make_jet(2, s + 1.0, {1.0, 1.0}, {{{0.0, 0.0}, {0.0, 0.0}}});
    const double u = std::sin(s) + std::cos(s), du = std::cos(s) - std::sin(s);
    return make_jet(2, u, {du, du}, {{{-u, -u}, {-u, -u}}});
  };
  jumps_from_exact(p);
  boundary_from_exact(p);
  p.interface_meets_boundary = true;
  return p;
}

// ---------------------------------------------------------------- stars

constexpr double kStarTip = kPi / 5.0;   // opening angle at a tip
constexpr double kStarTurn = kPi / 7.0;  // rotation of the first tip

double wrap_angle(double t) {
  t = std::fmod(t, 2.0 * kPi);
  if (t < 0.0) t += 2.0 * kPi;
  return t;
}

// Radius and d(radius)/d(theta) of the star boundary.
std::pair<double, double> star_radius_with_slope(double theta) {
  const double R = star::kOuterRadius;
  const double half = kStarTip / 2.0;
  const double t = wrap_angle(theta - kStarTurn);
  int k = static_cast<int>(std::floor(t / (kPi / 5.0)));
  k = std::clamp(k, 0, 9);
  const double num = R * std::sin(half);
  if (k % 2 == 0) {
    const double a = half + t - k * kPi / 5.0;
    const double s = std::sin(a);
    return {num / s, -num * std::cos(a) / (s * s)};
  }
  const double a = half - t + (k + 1) * kPi / 5.0;
  const double s = std::sin(a);
  return {num / s, num * std::cos(a) / (s * s)};
}

LevelSet star_level_set() {
  LevelSet ls;
  ls.dim = 2;
  ls.phi = star::level_set;
  ls.grad = star::level_set_grad;
  return ls;
}

const double kStarB = 6.0 * std::sin(kPi / 10.0) / (7.0 * std::sin(kPi / 3.0));
constexpr double kStarA = 6.0 / 7.0;

Coefficient shifted_square(double scale, double cx, double cy) {
  return {[=](const Point& x) {
            const double a = x[0] - cx, b = x[1] - cy;
            return scale * (a * a + b * b);
          },
          [=](const Point& x) {
            return Vec2{2.0 * scale * (x[0] - cx), 2.0 * scale * (x[1] - cy)};
          }};
}

Jet star_plus_exact(const Point& x) {
  const double s = x[0] + x[1];
  const double c = std::cos(s), sn = std::sin(s);
  return make_jet(2, r2(x) + sn, {2.0 * x[0] + c, 2.0 * x[1] + c},
                  {{{2.0 - sn, -sn}, {-sn, 2.0 - sn}}});
}

ProblemSpec star_base(const std::string& name, const std::string& description) {
  ProblemSpec p;
  p.name = name;
  p.description = description;
  p.dim = 2;
  p.bounds = {-1.0, 1.0, -1.0, 1.0};
  p.phi = star_level_set();
  p.closest = star::closest_point;
  return p;
}

ProblemSpec ex4_8(const ParamMap& overrides) {
  ProblemSpec p = star_base("ex4_8", "2D five-pointed star interface");
  p.params = merge_params(p.name, {}, overrides);
  p.beta_minus = constant_beta(1.0);
  p.beta_plus = {[](const Point& x) { return 2.0 + std::sin(x[0] + x[1]); },
                 [](const Point& x) {
                   const double c = std::cos(x[0] + x[1]);
                   return Vec2{c, c};
                 }};
  p.f_minus = source([](const Point&) { return 0.0; });
  p.f_plus = source([](const Point& x) {
    const double s = x[0] + x[1];
    return -(2.0 * std::cos(s) * (s + std::cos(s)) + (2.0 + std::sin(s)) * (4.0 - 2.0 * std::sin(s)));
  });
  p.exact = [](Side side, const Point& x) {
    if (side == Side::minus) return make_jet(2, 8.0, {0.0, 0.0}, {{{0.0, 0.0}, {0.0, 0.0}}});
    return star_plus_exact(x);
  };
  jumps_from_exact(p);
  boundary_from_exact(p);
  return p;
}

ProblemSpec ex4_9(const ParamMap& overrides) {
  ProblemSpec p = star_base("ex4_9", "2D star, coefficients vanishing at interior points");
  p.params = merge_params(p.name, {}, overrides);
  p.beta_minus = shifted_square(1.0, kStarA, kStarA);
  p.beta_plus = shifted_square(1.0, kStarB, kStarB);
  p.exact = [](Side side, const Point& x) {
    if (side == Side::plus) return star_plus_exact(x);
    const double a = 2.0 * kPi * x[0], b = 2.0 * kPi * x[1];
    const double sa = std::sin(a), ca = std::cos(a), sb = std::sin(b), cb = std::cos(b);
    const double w = 2.0 * kPi, w2 = w * w;
    return make_jet(2, 6.0 + sa * sb, {w * ca * sb, w * sa * cb},
                    {{{-w2 * sa * sb, w2 * ca * cb}, {w2 * ca * cb, -w2 * sa * sb}}});
  };
  p.f_minus = source([bm = p.beta_minus, ex = p.exact](const Point& x) {
    return divergence_source(bm, ex(Side::minus, x), x);
  });
  p.f_plus = source([](const Point& x) {
    const double s = x[0] + x[1];
    const double a = x[0] - kStarB, b = x[1] - kStarB;
    return -(2.0 * a * (2.0 * x[0] + std::cos(s)) + 2.0 * b * (2.0 * x[1] + std::cos(s)) +
             (a * a + b * b) * (4.0 - 2.0 * std::sin(s)));
  });
  jumps_from_exact(p);
  boundary_from_exact(p);
  p.degenerate = true;
  return p;
}

ProblemSpec ex4_10(const ParamMap& overrides) {
  ProblemSpec p = star_base("ex4_10", "2D degenerate star with a large jump ratio");
  p.params = merge_params(p.name, {{"tau_minus", 1.0}, {"tau_plus", 1e10}}, overrides);
  const double tm = param(p.params, "tau_minus"), tp = param(p.params, "tau_plus");
  p.beta_minus = shifted_square(tm, kStarA, kStarA);
  p.beta_plus = shifted_square(tp, kStarB, kStarB);
  p.f_minus = source([tm](const Point& x) {
    const double a = x[0] - kStarA, b = x[1] - kStarA;
    return -tm * (28.0 * (a * x[0] + b * x[1]) + 28.0 * (a * a + b * b));
  });
  p.f_plus = source([tp](const Point& x) {
    const double s = x[0] + x[1];
    const double a = x[0] - kStarB, b = x[1] - kStarB;
    return -tp * (2.0 * a * (2.0 * x[0] + std::cos(s)) + 2.0 * b * (2.0 * x[1] + std::cos(s)) +
                  (a * a + b * b) * (4.0 - 2.0 * std::sin(s)));
  });
  p.exact = [](Side side, const Point& x) {
    if (side == Side::plus) return star_plus_exact(x);
    return make_jet(2, 7.0 * r2(x) + 6.0, {14.0 * x[0], 14.0 * x[1]},
                    {{{14.0, 0.0}, {0.0, 14.0}}});
  };
  jumps_from_exact(p);
  boundary_from_exact(p);
  p.degenerate = true;
  return p;
}

ProblemSpec ex4_11(const ParamMap& overrides) {
  // Coefficients, jumps and boundary data follow ex4_8; the minus source
  // depends on the distance to the interface, so no closed form is known.
  ProblemSpec base = ex4_8({});
  ProblemSpec p = star_base("ex4_11", "2D star, distance-based minus source, no exact solution");
  p.params = merge_params(p.name, {}, overrides);
  p.beta_minus = base.beta_minus;
  p.beta_plus = base.beta_plus;
  p.f_plus = base.f_plus;
  p.f_minus = source([](const Point& x) {
    const double d = std::sqrt(dist2(x, star::closest_point(x)));
    return d > 0.0 ? d * (1.0 + 2.0 * std::log(d)) : 0.0;
  });
  p.jump_w = base.jump_w;
  p.jump_v = base.jump_v;
  p.g = base.g;
  p.g_hat = base.g_hat;
  return p;
}

struct Entry {
  const char* name;
  ProblemSpec (*make)(const ParamMap&);
  const char* jump_type;
};

constexpr Entry kRegistry[] = {
    {"ex4_1", ex4_1, "homogeneous"},   {"ex4_2", ex4_2, "nonhomogeneous"},
    {"ex4_3", ex4_3, "nonhomogeneous"}, {"ex4_4", ex4_4, "homogeneous"},
    {"ex4_5", ex4_5, "nonhomogeneous"}, {"ex4_7", ex4_7, "nonhomogeneous"},
    {"ex4_8", ex4_8, "nonhomogeneous"}, {"ex4_9", ex4_9, "nonhomogeneous"},
    {"ex4_10", ex4_10, "nonhomogeneous"}, {"ex4_11", ex4_11, "nonhomogeneous"},
};

}  // namespace

Point ProblemSpec::foot_point(const Point& x) const {
  if (closest) return closest(x);
  return project_to_interface(phi, x);
}

GridSpec ProblemSpec::grid(int intervals) const {
  if (dim == 1) return GridSpec::uniform_1d(bounds[0], bounds[1], intervals);
  return GridSpec::uniform_2d(bounds[0], bounds[1], bounds[2], bounds[3], intervals);
}

ClassifyOptions ProblemSpec::classify_options(int band_width_cells) const {
  return ClassifyOptions{band_width_cells, interface_meets_boundary};
}

ProblemSpec get_problem(const std::string& name, const ParamMap& params) {
  for (const Entry& e : kRegistry)
    if (name == e.name) return e.make(params);
  throw Error(ErrorKind::unknown_problem, "no built-in problem named '" + name + "'");
}

std::vector<ProblemInfo> list_problems() {
  std::vector<ProblemInfo> out;
  for (const Entry& e : kRegistry) {
    const ProblemSpec p = e.make({});
    std::vector<std::string> tunables;
    for (const auto& kv : p.params) tunables.push_back(kv.first);
    out.push_back({p.name, p.dim, p.degenerate, e.jump_type, tunables, p.description});
  }
  return out;
}

namespace star {

double radius(double theta) { return star_radius_with_slope(theta).first; }

double level_set(const Point& x) {
  const double r = std::sqrt(r2(x));
  return radius(std::atan2(x[1], x[0])) - r;
}

Vec2 level_set_grad(const Point& x) {
  const double q = r2(x);
  if (q == 0.0) return Vec2{0.0, 0.0};
  const double r = std::sqrt(q);
  const auto [rs, slope] = star_radius_with_slope(std::atan2(x[1], x[0]));
  (void)rs;
  // grad theta = (-x2, x1) / r^2, grad r = x / r.
  return Vec2{-slope * x[1] / q - x[0] / r, slope * x[0] / q - x[1] / r};
}

std::array<Point, 10> vertices() {
  std::array<Point, 10> v;
  for (int k = 0; k < 10; ++k) {
    const double th = kStarTurn + k * kPi / 5.0;
    const double r = radius(th);
    v[k] = Point{r * std::cos(th), r * std::sin(th)};
  }
  return v;
}

Point closest_point(const Point& x) {
  static const std::array<Point, 10> v = vertices();
  Point best = v[0];
  double best_d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 10; ++k) {
    const Point c = closest_on_segment(x, v[k], v[(k + 1) % 10]);
    const double d = dist2(x, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace star

}  // namespace defuse
