#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "defuse/types.hpp"

namespace defuse {

enum class Activation : std::uint8_t { elu = 0, relu = 1 };

const char* to_string(Activation act);

/// Value and first three derivatives of an activation at one point.
struct ActJet {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
};

/// ELU with the left-limit convention at 0: (0, 1, 1).
ActJet elu_jet(double x);
ActJet activation_jet(Activation act, double x);

/// Fully connected network. `widths` runs from the input dimension to the
/// output width 1; the activation is applied after every layer except the
/// last. Parameters live in one flat vector: for each layer, the weight
/// matrix in row-major order followed by the bias vector.
class NetworkParams {
 public:
  NetworkParams() = default;
  NetworkParams(std::vector<int> widths, Activation act);

  /// Input dimension d, `hidden` layers of width `width`, scalar output.
  static NetworkParams mlp(int input_dim, int hidden, int width,
                           Activation act = Activation::elu);

  int input_dim() const { return widths_.front(); }
  int layer_count() const { return static_cast<int>(widths_.size()) - 1; }
  const std::vector<int>& widths() const { return widths_; }
  Activation activation() const { return act_; }

  std::size_t size() const { return theta_.size(); }
  std::vector<double>& flat() { return theta_; }
  const std::vector<double>& flat() const { return theta_; }

  std::size_t weight_offset(int layer) const { return offsets_[layer]; }
  std::size_t bias_offset(int layer) const {
    return offsets_[layer] + static_cast<std::size_t>(rows(layer)) * cols(layer);
  }
  int rows(int layer) const { return widths_[layer + 1]; }
  int cols(int layer) const { return widths_[layer]; }

  double& weight(int layer, int r, int c) {
    return theta_[weight_offset(layer) + static_cast<std::size_t>(r) * cols(layer) + c];
  }
  double weight(int layer, int r, int c) const {
    return theta_[weight_offset(layer) + static_cast<std::size_t>(r) * cols(layer) + c];
  }
  double& bias(int layer, int r) { return theta_[bias_offset(layer) + r]; }
  double bias(int layer, int r) const { return theta_[bias_offset(layer) + r]; }

  /// Copy of the flat parameter vector.
  std::vector<double> flatten() const { return theta_; }
  /// Network of the same shape holding `flat`; ShapeMismatch on size error.
  NetworkParams unflatten(const std::vector<double>& flat) const;

  /// Fan-based uniform weights, zero biases.
  void init_uniform(std::mt19937_64& rng);

  void save(std::ostream& out) const;
  static NetworkParams load(std::istream& in);
  void save_file(const std::string& path) const;
  static NetworkParams load_file(const std::string& path);

 private:
  std::vector<int> widths_;
  Activation act_ = Activation::elu;
  std::vector<std::size_t> offsets_;
  std::vector<double> theta_;
};

/// Plain forward pass, no derivative machinery.
double forward_value(const NetworkParams& params, const Point& x);

/// Value, spatial gradient and Hessian of the network output.
Jet forward_jet(const NetworkParams& params, const Point& x);

/// Batched jet propagation with a recorded tape for reverse mode. Each point
/// carries 1 + d + d(d+1)/2 channels (value, gradient, packed Hessian) that
/// pass through every affine layer as one matrix product.
class JetTape {
 public:
  void forward(const NetworkParams& params, const std::vector<Point>& xs);

  std::size_t size() const { return jets_.size(); }
  const std::vector<Jet>& jets() const { return jets_; }
  const Jet& jet(std::size_t s) const { return jets_[s]; }

  /// Adds dL/dtheta to `grad` given dL/d(jet) per recorded point.
  void backward(const std::vector<JetCotangent>& cotangents,
                std::vector<double>& grad) const;

 private:
  const NetworkParams* params_ = nullptr;
  int dim_ = 1;
  int channels_ = 3;
  std::size_t points_ = 0;
  // inputs_[l] feeds layer l; pre_[l] is its affine output.
  std::vector<Eigen::MatrixXd> inputs_;
  std::vector<Eigen::MatrixXd> pre_;
  // Activation derivatives per hidden layer, rows x points.
  std::vector<Eigen::MatrixXd> d1_, d2_, d3_;
  std::vector<Jet> jets_;
  mutable Eigen::MatrixXd zbar_, abar_, next_;
};

/// dL/dtheta for cotangents seeded on the jets at `xs`.
std::vector<double> param_gradient(const NetworkParams& params,
                                   const std::vector<Point>& xs,
                                   const std::vector<JetCotangent>& cotangents);

/// Distance-to-foot-point factor as the planar field e.(y - x0), with
/// e = (x - x0) / |x - x0| frozen at x. Value and gradient equal those of
/// |y - x0| at y = x; the Hessian is zero. At x == x0, e is `normal`.
Jet distance_jet(int dim, const Point& x, const Point& x0, const Vec2& normal);

/// u = (d + 1) G + d q with q the raw network jet, d = |x - x0|, G = g(x0).
Jet anchor(const Jet& net, const Jet& dist, double g_hat);
/// Pulls a cotangent on the anchored jet back onto the raw network jet.
JetCotangent anchor_adjoint(const JetCotangent& cu, const Jet& dist);

Jet anchored_jet(const NetworkParams& params, const Point& x, const Point& x0,
                 double g_hat_at_x0, const Vec2& normal = {1.0, 0.0});

/// Network pair for the two sides. When shared, both sides evaluate the same
/// parameters.
struct PairedNet {
  NetworkParams minus;
  NetworkParams plus;
  bool shared = false;

  const NetworkParams& side(Side s) const {
    return (s == Side::minus || shared) ? minus : plus;
  }
  NetworkParams& side(Side s) { return (s == Side::minus || shared) ? minus : plus; }
};

}  // namespace defuse
