#pragma once

#include <cstdint>
#include <vector>

#include "defuse/jetnet.hpp"
#include "defuse/loss.hpp"

namespace defuse {

/// Norm-wise relative difference max|a - b| / max|b|.
double relative_error(const std::vector<double>& a, const std::vector<double>& b);

/// Smallest |pre-activation| over all hidden neurons and points.
double min_abs_preactivation(const NetworkParams& params, const std::vector<Point>& xs);

struct JetCheck {
  double grad_rel = 0.0;
  double hess_rel = 0.0;
};

/// Smallest |pre-activation| at x minus a bound on its variation over the
/// box of half-width `radius`; positive means no kink inside the box.
double kink_slack(const NetworkParams& params, const Point& x, double radius);

/// Jet gradient and Hessian against Richardson-extrapolated central
/// differences of forward_value (steps `step` and step/2).
JetCheck check_jet(const NetworkParams& params, const Point& x, double step = 2e-3);

/// Analytic dtotal/dtheta against central differences of the total loss at
/// the flat indices `components` of the minus (or shared) network followed by
/// the plus network.
double check_loss_gradient(const ProblemSpec& problem, const PairedNet& net,
                           const SampleSet& samples, const LossWeights& weights,
                           const std::vector<std::size_t>& components, double step = 1e-5);

struct GradCheckReport {
  int instances = 0;
  int rejected = 0;
  double jet_grad_max = 0.0;
  double jet_hess_max = 0.0;
  double loss_max = 0.0;
  double anchored_max = 0.0;

  bool passed(double tol = 1e-5) const {
    return jet_grad_max < tol && jet_hess_max < tol && loss_max < tol && anchored_max < tol;
  }
};

/// Seeded random instances of every oracle: network jets, anchored jets and
/// full loss gradients. Instances with a pre-activation within 1e-3 of the
/// ELU kink are redrawn.
GradCheckReport check_gradients(std::uint64_t seed, int instances = 100);

}  // namespace defuse
