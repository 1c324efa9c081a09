#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "defuse/geometry.hpp"
#include "defuse/jetnet.hpp"
#include "defuse/problems.hpp"

namespace defuse {

struct LossWeights {
  double w1 = 1.0, w2 = 1.0, w3 = 1.0, w4 = 1.0;
};

struct LossBreakdown {
  double l1 = 0.0, l2 = 0.0, l3 = 0.0, l4 = 0.0;
  double total = 0.0;
};

/// Points evaluated by one side's network. The first `interior_count`
/// entries are random band samples, the rest are grid nodes from the
/// interface pairs. Anchor data is filled only for anchored sides.
struct SidePoints {
  std::vector<Point> x;
  std::size_t interior_count = 0;
  bool anchored = false;
  std::vector<Point> foot;
  std::vector<double> g_hat;
  std::vector<Vec2> normal;
};

/// One jump term: indices into the side point lists plus the interface data
/// at the pair's foot point.
struct PairTerm {
  std::size_t minus_index = 0;
  std::size_t plus_index = 0;
  Point foot{0.0, 0.0};
  Vec2 normal{1.0, 0.0};
  double w = 0.0;
  double v = 0.0;
};

struct SampleSet {
  SidePoints minus, plus;
  std::vector<PairTerm> pairs;
  std::uint64_t seed = 0;
};

/// Attaches pair nodes and interface data to the given interior samples.
/// The plus side is always anchored; the minus side only when `shared`.
SampleSet build_sample_set(const ProblemSpec& problem, const RegionMap& map,
                           std::vector<Point> interior_minus,
                           std::vector<Point> interior_plus, bool shared);

/// -(grad beta . grad u + beta lap u) - f(x, u).
double pde_residual(const ProblemSpec& problem, Side side, const Point& x, const Jet& jet);

/// Loss value and dL/d(jet) for every sample.
struct JetLoss {
  double value = 0.0;
  std::vector<JetCotangent> cotangents;
};

/// Mean squared residual over `xs` with jets `jets`.
JetLoss interior_loss(const ProblemSpec& problem, Side side, const std::vector<Point>& xs,
                      const std::vector<Jet>& jets);

struct JumpLoss {
  double l3 = 0.0, l4 = 0.0;
  // Per pair: cotangents of l3 and l4 on the minus and plus jets.
  std::vector<JetCotangent> minus3, plus3, minus4, plus4;
};

/// Jump terms for pairs with jets on both sides. Coefficients are taken at
/// the paired nodes.
JumpLoss jump_losses(const ProblemSpec& problem, const std::vector<PairTerm>& pairs,
                     const std::vector<Point>& minus_x, const std::vector<Jet>& minus_jets,
                     const std::vector<Point>& plus_x, const std::vector<Jet>& plus_jets);

LossBreakdown total_loss(const LossWeights& weights, double l1, double l2, double l3, double l4);

/// w_i = 1 / max(l_i, 1e-12), rescaled so the largest weight is 1.
LossWeights auto_weights(const LossBreakdown& initial);
/// Same rule over the active terms only; inactive terms get weight 1 and do
/// not take part in the rescaling.
LossWeights auto_weights(const LossBreakdown& initial, const std::array<bool, 4>& active);

/// Jets of the side's ansatz (anchored when the side is) at its points.
std::vector<Jet> side_jets(const NetworkParams& params, const SidePoints& pts, JetTape& tape);

struct LossEvaluation {
  LossBreakdown terms;
  /// dtotal/dtheta for each side; with a shared net only `minus` is filled.
  std::vector<double> grad_minus, grad_plus;
};

/// Tapes kept between evaluations so their buffers are reused.
struct LossWorkspace {
  JetTape minus, plus;
};

LossEvaluation evaluate_loss(const ProblemSpec& problem, const PairedNet& net,
                             const SampleSet& samples, const LossWeights& weights,
                             bool with_gradient = true, LossWorkspace* workspace = nullptr);

}  // namespace defuse
