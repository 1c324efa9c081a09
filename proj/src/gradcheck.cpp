#include "defuse/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "defuse/error.hpp"
#include "defuse/trainer.hpp"

namespace defuse {

double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  if (diff == 0.0) return 0.0;
  return scale > 0.0 ? diff / scale : std::numeric_limits<double>::infinity();
}

double min_abs_preactivation(const NetworkParams& params, const std::vector<Point>& xs) {
  double best = std::numeric_limits<double>::infinity();
  for (const Point& x : xs) {
    std::vector<double> a(x.begin(), x.begin() + params.input_dim()), z;
    for (int l = 0; l + 1 < params.layer_count(); ++l) {
      z.assign(params.rows(l), 0.0);
      for (int r = 0; r < params.rows(l); ++r) {
        double s = 0.0;
        for (int c = 0; c < params.cols(l); ++c) s += params.weight(l, r, c) * a[c];
        z[r] = s + params.bias(l, r);
        best = std::min(best, std::abs(z[r]));
        z[r] = activation_jet(params.activation(), z[r]).value;
      }
      a.swap(z);
    }
  }
  return best;
}

namespace {

struct FdJet {
  std::vector<double> grad;
  std::vector<double> hess;  // diagonal entries, then the mixed one in 2D
};

// Central differences at steps h and h/2 combined by Richardson extrapolation.
template <class F>
FdJet fd_jet(const F& f, int dim, double h) {
  auto at = [&](double s) {
    FdJet r;
    const double f0 = f(0.0, 0.0);
    for (int k = 0; k < dim; ++k) {
      const double sx = k == 0 ? s : 0.0, sy = k == 1 ? s : 0.0;
      const double fp = f(sx, sy), fm = f(-sx, -sy);
      r.grad.push_back((fp - fm) / (2.0 * s));
      r.hess.push_back((fp - 2.0 * f0 + fm) / (s * s));
    }
    if (dim == 2) r.hess.push_back((f(s, s) - f(s, -s) - f(-s, s) + f(-s, -s)) / (4.0 * s * s));
    return r;
  };
  const FdJet coarse = at(h), fine = at(0.5 * h);
  FdJet out = fine;
  for (std::size_t i = 0; i < out.grad.size(); ++i)
    out.grad[i] = (4.0 * fine.grad[i] - coarse.grad[i]) / 3.0;
  for (std::size_t i = 0; i < out.hess.size(); ++i)
    out.hess[i] = (4.0 * fine.hess[i] - coarse.hess[i]) / 3.0;
  return out;
}

std::vector<double> jet_hess_entries(const Jet& j) {
  std::vector<double> h;
  for (int k = 0; k < j.dim; ++k) h.push_back(j.hess[k][k]);
  if (j.dim == 2) h.push_back(j.hess[0][1]);
  return h;
}

}  // namespace

double kink_slack(const NetworkParams& params, const Point& x, double radius) {
  double slack = std::numeric_limits<double>::infinity();
  std::vector<double> a(x.begin(), x.begin() + params.input_dim()), z;
  // Largest possible change of each layer input over the box; ELU is 1-Lipschitz.
  double spread = radius;
  for (int l = 0; l + 1 < params.layer_count(); ++l) {
    z.assign(params.rows(l), 0.0);
    double next_spread = 0.0;
    for (int r = 0; r < params.rows(l); ++r) {
      double s = 0.0, row_abs = 0.0;
      for (int c = 0; c < params.cols(l); ++c) {
        s += params.weight(l, r, c) * a[c];
        row_abs += std::abs(params.weight(l, r, c));
      }
      z[r] = s + params.bias(l, r);
      const double change = row_abs * spread;
      slack = std::min(slack, std::abs(z[r]) - change);
      next_spread = std::max(next_spread, change);
      z[r] = activation_jet(params.activation(), z[r]).value;
    }
    spread = next_spread;
    a.swap(z);
  }
  return slack;
}

JetCheck check_jet(const NetworkParams& params, const Point& x, double h) {
  const Jet j = forward_jet(params, x);
  const FdJet fd = fd_jet(
      [&](double dx, double dy) { return forward_value(params, Point{x[0] + dx, x[1] + dy}); },
      params.input_dim(), h);
  return JetCheck{relative_error(std::vector<double>(j.grad.begin(), j.grad.begin() + j.dim), fd.grad),
                  relative_error(jet_hess_entries(j), fd.hess)};
}

double check_loss_gradient(const ProblemSpec& problem, const PairedNet& net,
                           const SampleSet& samples, const LossWeights& weights,
                           const std::vector<std::size_t>& components, double h) {
  const LossEvaluation ev = evaluate_loss(problem, net, samples, weights, true);
  const std::size_t nm = net.minus.size();
  std::vector<double> analytic, numeric;
  for (std::size_t c : components) {
    PairedNet p = net;
    const bool in_minus = c < nm;
    std::vector<double>& theta = in_minus ? p.minus.flat() : p.plus.flat();
    const std::size_t i = in_minus ? c : c - nm;
    if (i >= theta.size()) throw Error(ErrorKind::shape_mismatch, "component out of range");
    const double t0 = theta[i];
    theta[i] = t0 + h;
    const double lp = evaluate_loss(problem, p, samples, weights, false).terms.total;
    theta[i] = t0 - h;
    const double lm = evaluate_loss(problem, p, samples, weights, false).terms.total;
    numeric.push_back((lp - lm) / (2.0 * h));
    analytic.push_back(in_minus ? ev.grad_minus[i] : ev.grad_plus[i]);
  }
  return relative_error(analytic, numeric);
}

namespace {

constexpr double kKinkMargin = 1e-3;
constexpr double kJetStep = 2e-3;
constexpr double kMinAnchorDistance = 0.5;
// Relative Hessian errors are meaningless for nearly linear networks.
constexpr double kMinCurvature = 1e-2;

NetworkParams random_net(int dim, int hidden, int width, std::mt19937_64& rng) {
  NetworkParams p = NetworkParams::mlp(dim, hidden, width);
  p.init_uniform(rng);
  for (int l = 0; l < p.layer_count(); ++l)
    for (int r = 0; r < p.rows(l); ++r) p.bias(l, r) = uniform01(rng) - 0.5;
  return p;
}

Point random_point(int dim, std::mt19937_64& rng) {
  Point x{2.0 * uniform01(rng) - 1.0, 0.0};
  if (dim == 2) x[1] = 2.0 * uniform01(rng) - 1.0;
  return x;
}

struct LossCase {
  const char* name;
  ParamMap params;
  int n;
};

const LossCase kLossCases[] = {
    {"ex4_3", {{"tau_minus", 1.0}, {"tau_plus", 1.0}}, 10},
    {"ex4_5", {}, 20},
    {"ex4_8", {}, 20},
    {"ex4_1", {{"tau_minus", 1.0}, {"tau_plus", 1.0}}, 10},
    {"ex4_2", {{"tau_minus", 1.0}, {"tau_plus", 1.0}}, 10},
};

}  // namespace

GradCheckReport check_gradients(std::uint64_t seed, int instances) {
  GradCheckReport rep;
  std::mt19937_64 rng(seed);
  for (int inst = 0; inst < instances; ++inst) {
    // Network jets at a random point.
    for (;;) {
      const int dim = 1 + static_cast<int>(uniform01(rng) * 2.0);
      const int width = 3 + static_cast<int>(uniform01(rng) * 6.0);
      const NetworkParams p = random_net(dim, 2, width, rng);
      const Point x = random_point(dim, rng);
      // The whole box the difference quotients touch must avoid the kink.
      if (kink_slack(p, x, kJetStep) < kKinkMargin) {
        ++rep.rejected;
        continue;
      }
      double curvature = 0.0;
      for (double v : jet_hess_entries(forward_jet(p, x))) curvature = std::max(curvature, std::abs(v));
      if (curvature < kMinCurvature) {
        ++rep.rejected;
        continue;
      }
      const JetCheck jc = check_jet(p, x, kJetStep);
      rep.jet_grad_max = std::max(rep.jet_grad_max, jc.grad_rel);
      rep.jet_hess_max = std::max(rep.jet_hess_max, jc.hess_rel);

      // Anchored ansatz with a frozen foot point well away from x.
      const Point x0 = random_point(dim, rng);
      const double dx = x[0] - x0[0], dy = dim == 2 ? x[1] - x0[1] : 0.0;
      if (std::sqrt(dx * dx + dy * dy) < kMinAnchorDistance) {
        ++rep.rejected;
        continue;
      }
      const double g = 2.0 * uniform01(rng) - 1.0;
      const Jet aj = anchored_jet(p, x, x0, g);
      const double len = std::sqrt(dx * dx + dy * dy);
      const FdJet fd = fd_jet(
          [&](double sx, double sy) {
            const Point y{x[0] + sx, x[1] + sy};
            const double ex = y[0] - x0[0], ey = dim == 2 ? y[1] - x0[1] : 0.0;
            const double d = (ex * dx + ey * dy) / len;
            return g + d * (g + forward_value(p, y));
          },
          dim, kJetStep);
      std::vector<double> a(aj.grad.begin(), aj.grad.begin() + dim), nvals = fd.grad;
      for (double v : jet_hess_entries(aj)) a.push_back(v);
      nvals.insert(nvals.end(), fd.hess.begin(), fd.hess.end());
      rep.anchored_max = std::max(rep.anchored_max, relative_error(a, nvals));
      break;
    }

    // Full loss gradient on a small problem instance.
    for (;;) {
      const LossCase& lc = kLossCases[inst % std::size(kLossCases)];
      const ProblemSpec problem = get_problem(lc.name, lc.params);
      const RegionMap map = classify(problem.phi, problem.grid(lc.n), problem.classify_options(1));
      PairedNet net;
      net.shared = problem.jump_w_zero;
      net.minus = random_net(problem.dim, 2, 5, rng);
      if (!net.shared) net.plus = random_net(problem.dim, 2, 5, rng);
      const SampleSet samples = sample_band(map, problem, 6, 6, rng, net.shared);
      const double kink = std::min(min_abs_preactivation(net.side(Side::minus), samples.minus.x),
                                   min_abs_preactivation(net.side(Side::plus), samples.plus.x));
      if (kink < kKinkMargin) {
        ++rep.rejected;
        continue;
      }
      LossWeights w{0.5 + uniform01(rng), 0.5 + uniform01(rng), 0.5 + uniform01(rng),
                    0.5 + uniform01(rng)};
      const std::size_t total = net.minus.size() + (net.shared ? 0 : net.plus.size());
      std::vector<std::size_t> comps;
      for (int c = 0; c < 20; ++c)
        comps.push_back(std::min(total - 1, static_cast<std::size_t>(uniform01(rng) * total)));
      rep.loss_max = std::max(rep.loss_max, check_loss_gradient(problem, net, samples, w, comps));
      break;
    }
    ++rep.instances;
  }
  return rep;
}

}  // namespace defuse
