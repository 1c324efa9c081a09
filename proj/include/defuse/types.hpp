#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <random>

namespace defuse {

/// A point in R^1 or R^2. One-dimensional problems use only the first slot.
using Point = std::array<double, 2>;
using Vec2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

enum class Side { minus, plus };

inline const char* to_string(Side side) {
  return side == Side::minus ? "minus" : "plus";
}

/// Value, spatial gradient and spatial Hessian of a scalar field at a point.
/// Entries beyond `dim` are kept at zero.
struct Jet {
  int dim = 2;
  double value = 0.0;
  Vec2 grad{0.0, 0.0};
  Mat2 hess{{{0.0, 0.0}, {0.0, 0.0}}};

  double laplacian() const {
    return dim == 1 ? hess[0][0] : hess[0][0] + hess[1][1];
  }
  bool finite() const {
    if (!std::isfinite(value)) return false;
    for (int k = 0; k < dim; ++k) {
      if (!std::isfinite(grad[k])) return false;
      for (int l = 0; l < dim; ++l)
        if (!std::isfinite(hess[k][l])) return false;
    }
    return true;
  }
};

/// Sensitivities dL/d(value), dL/d(grad_k), dL/d(hess_kl) of a scalar loss
/// with respect to the entries of a Jet. The Hessian cotangent is taken over
/// the full matrix, so a symmetric perturbation dH contributes
/// sum_kl hess[k][l] * dH[k][l].
struct JetCotangent {
  double value = 0.0;
  Vec2 grad{0.0, 0.0};
  Mat2 hess{{{0.0, 0.0}, {0.0, 0.0}}};

  JetCotangent& operator+=(const JetCotangent& o) {
    value += o.value;
    for (int k = 0; k < 2; ++k) {
      grad[k] += o.grad[k];
      for (int l = 0; l < 2; ++l) hess[k][l] += o.hess[k][l];
    }
    return *this;
  }
};

inline double dot(const Vec2& a, const Vec2& b, int dim) {
  return dim == 1 ? a[0] * b[0] : a[0] * b[0] + a[1] * b[1];
}

inline double norm(const Vec2& a, int dim) { return std::sqrt(dot(a, a, dim)); }

/// Uniform draw in [0, 1) with 53 random bits. Spelled out rather than using
/// std::uniform_real_distribution so streams match across standard libraries.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace defuse
