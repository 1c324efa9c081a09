#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "defuse/geometry.hpp"
#include "defuse/types.hpp"

namespace defuse {

/// Diffusion coefficient on one side, with its analytic gradient.
struct Coefficient {
  std::function<double(const Point&)> value;
  std::function<Vec2(const Point&)> grad;
};

/// Right-hand side f(x, u). `du` may be empty for sources that ignore u.
struct SourceTerm {
  std::function<double(const Point&, double)> value;
  std::function<double(const Point&, double)> du;

  double operator()(const Point& x, double u) const { return value(x, u); }
  double derivative(const Point& x, double u) const { return du ? du(x, u) : 0.0; }
};

using ParamMap = std::map<std::string, double>;

/// One interface problem -div(beta grad u) = f(x, u) on both sides of the
/// zero level set, with jumps [u] = w and [beta grad u . n] = v across it.
struct ProblemSpec {
  std::string name;
  std::string description;
  int dim = 2;
  /// [a, b] x [c, d]; c and d unused in 1D.
  std::array<double, 4> bounds{0.0, 1.0, 0.0, 1.0};
  LevelSet phi;

  Coefficient beta_minus, beta_plus;
  SourceTerm f_minus, f_plus;
  /// Jump targets, evaluated at interface points.
  std::function<double(const Point&)> jump_w, jump_v;
  /// Outer boundary data on the whole closed domain.
  std::function<double(const Point&)> g;
  /// Plus-side field used to anchor the plus network at interface points.
  std::function<double(const Point&)> g_hat;
  /// Exact closest interface point, when cheaper or more reliable than the
  /// Newton projection (piecewise-linear interfaces).
  std::function<Point(const Point&)> closest;
  /// Exact solution branch jets, when known.
  std::function<Jet(Side, const Point&)> exact;

  bool jump_w_zero = false;
  bool degenerate = false;
  bool interface_meets_boundary = false;
  ParamMap params;

  const Coefficient& beta(Side s) const { return s == Side::minus ? beta_minus : beta_plus; }
  const SourceTerm& f(Side s) const { return s == Side::minus ? f_minus : f_plus; }
  bool has_exact() const { return static_cast<bool>(exact); }

  /// Interface point associated with x: the exact closest point if the
  /// problem provides one, the Newton projection otherwise.
  Point foot_point(const Point& x) const;
  /// Grid for `intervals` cells per axis on this problem's domain.
  GridSpec grid(int intervals) const;
  ClassifyOptions classify_options(int band_width_cells) const;
};

/// Built-in problem by name with optional parameter overrides.
/// Throws UnknownProblem or UnknownParam.
ProblemSpec get_problem(const std::string& name, const ParamMap& params = {});

struct ProblemInfo {
  std::string name;
  int dim;
  bool degenerate;
  std::string jump_type;
  std::vector<std::string> tunables;
  std::string description;
};

std::vector<ProblemInfo> list_problems();

/// Star-shaped polygon interface used by several built-ins; exposed for tests.
namespace star {
inline constexpr double kOuterRadius = 6.0 / 7.0;
double radius(double theta);
double level_set(const Point& x);
Vec2 level_set_grad(const Point& x);
/// The ten polygon vertices, alternating outer and inner.
std::array<Point, 10> vertices();
Point closest_point(const Point& x);
}  // namespace star

}  // namespace defuse
