#include "defuse/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "defuse/error.hpp"

namespace defuse {

const char* to_string(OptimizerKind kind) {
  return kind == OptimizerKind::sgd ? "sgd" : "adam";
}

TrainConfig TrainConfig::defaults_for(int dim) {
  TrainConfig c;
  c.optimizer = OptimizerKind::adam;
  if (dim == 2) {
    c.epochs = 50000;
    c.m1 = c.m2 = 1000;
    c.hidden_layers = 6;
    c.width = 15;
  }
  return c;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::invalid_argument, msg); };
  if (epochs < 1) fail("epochs must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning rate must be positive");
  if (batch_regen_every < 1) fail("batch_regen_every must be at least 1");
  if (m1 < 1 || m2 < 1) fail("sample counts must be positive");
  if (hidden_layers < 0 || width < 1) fail("bad architecture");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    fail("adam betas must lie in [0, 1)");
  if (!auto_weights) {
    for (double w : {weights.w1, weights.w2, weights.w3, weights.w4})
      if (!(w > 0.0) || !std::isfinite(w)) fail("loss weights must be positive and finite");
  }
}

void TrainConfig::write(std::ostream& out) const {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "epochs=" << epochs << '\n'
      << "lr=" << num(learning_rate) << '\n'
      << "optimizer=" << to_string(optimizer) << '\n'
      << "adam_beta1=" << num(adam_beta1) << '\n'
      << "adam_beta2=" << num(adam_beta2) << '\n'
      << "adam_eps=" << num(adam_eps) << '\n'
      << "batch_regen_every=" << batch_regen_every << '\n'
      << "m1=" << m1 << '\n'
      << "m2=" << m2 << '\n'
      << "seed=" << seed << '\n';
  if (auto_weights) {
    out << "weights=auto\n";
  } else {
    out << "weights=" << num(weights.w1) << ',' << num(weights.w2) << ',' << num(weights.w3)
        << ',' << num(weights.w4) << '\n';
  }
  out << "layers=" << hidden_layers << '\n'
      << "width=" << width << '\n'
      << "activation=" << to_string(activation) << '\n';
}

void step(std::vector<double>& theta, const std::vector<double>& grad, OptimizerState& state,
          const TrainConfig& config) {
  if (theta.size() != grad.size())
    throw Error(ErrorKind::shape_mismatch, "gradient and parameters differ in length");
  const double lr = config.learning_rate;
  if (config.optimizer == OptimizerKind::sgd) {
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= lr * grad[i];
  } else {
    if (state.m.size() != theta.size()) {
      state.m.assign(theta.size(), 0.0);
      state.v.assign(theta.size(), 0.0);
      state.t = 0;
    }
    ++state.t;
    const double b1 = config.adam_beta1, b2 = config.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double g = grad[i];
      state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
      state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
      const double mh = state.m[i] / c1, vh = state.v[i] / c2;
      theta[i] -= lr * mh / (std::sqrt(vh) + config.adam_eps);
    }
  }
  for (std::size_t i = 0; i < theta.size(); ++i)
    if (!std::isfinite(theta[i]))
      throw Error(ErrorKind::non_finite_update,
                  "parameter " + std::to_string(i) + " is not finite after the update");
}

namespace {

std::vector<Point> sample_side(const RegionMap& map, const ProblemSpec& problem, Side side,
                               int count, std::mt19937_64& rng) {
  const GridSpec& g = map.grid;
  std::vector<Point> pts;
  if (count <= 0) return pts;
  if (map.band_cells.empty())
    throw Error(ErrorKind::empty_band_side, "the band has no cells");
  pts.reserve(static_cast<std::size_t>(count));
  const std::size_t cells = map.band_cells.size();
  const long long budget = 2000LL * count + 100000LL;
  long long tries = 0;
  while (static_cast<int>(pts.size()) < count) {
    if (++tries > budget)
      throw Error(ErrorKind::empty_band_side,
                  std::string("no band area found on the ") + to_string(side) + " side");
    std::size_t pick = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(cells));
    if (pick >= cells) pick = cells - 1;
    const std::size_t cell = map.band_cells[pick];
    const Point lo = g.node(cell);
    Point x{lo[0] + uniform01(rng) * g.h1(), 0.0};
    if (g.dim == 2) x[1] = lo[1] + uniform01(rng) * g.h2();
    const double f = problem.phi(x);
    if (side == Side::minus ? f < 0.0 : f > 0.0) pts.push_back(x);
  }
  return pts;
}

}  // namespace

SampleSet sample_band(const RegionMap& map, const ProblemSpec& problem, int m1, int m2,
                      std::mt19937_64& rng, bool shared) {
  std::vector<Point> minus = sample_side(map, problem, Side::minus, m1, rng);
  std::vector<Point> plus = sample_side(map, problem, Side::plus, m2, rng);
  return build_sample_set(problem, map, std::move(minus), std::move(plus), shared);
}

PairedNet init_network(const ProblemSpec& problem, const TrainConfig& config,
                       std::mt19937_64& rng) {
  PairedNet net;
  net.shared = problem.jump_w_zero;
  net.minus = NetworkParams::mlp(problem.dim, config.hidden_layers, config.width, config.activation);
  net.minus.init_uniform(rng);
  if (!net.shared) {
    net.plus = NetworkParams::mlp(problem.dim, config.hidden_layers, config.width, config.activation);
    net.plus.init_uniform(rng);
  }
  return net;
}

TrainedNet train(const ProblemSpec& problem, const RegionMap& map, const TrainConfig& config,
                 const TrainProgress& progress) {
  config.validate();
  constexpr int kDivergenceWindow = 1000;
  constexpr double kDivergenceFactor = 1e6;

  std::mt19937_64 rng(config.seed);
  TrainedNet out;
  out.config = config;
  out.net = init_network(problem, config, rng);
  out.weights = config.weights;
  out.loss_history.reserve(static_cast<std::size_t>(config.epochs));

  OptimizerState state_m, state_p;
  LossWorkspace workspace;
  SampleSet samples;
  for (int it = 0; it < config.epochs; ++it) {
    if (it % config.batch_regen_every == 0)
      samples = sample_band(map, problem, config.m1, config.m2, rng, out.net.shared);
    if (it == 0 && config.auto_weights) {
      const LossEvaluation first = evaluate_loss(problem, out.net, samples, LossWeights{}, false);
      out.weights = auto_weights(first.terms, {true, true, !out.net.shared, true});
    }
    LossEvaluation ev;
    try {
      ev = evaluate_loss(problem, out.net, samples, out.weights, true, &workspace);
    } catch (const Error& e) {
      throw Error(e.kind(), "step " + std::to_string(it) + ": " + e.detail());
    }
    out.loss_history.push_back(ev.terms);

    const std::size_t lo = out.loss_history.size() > kDivergenceWindow
                               ? out.loss_history.size() - kDivergenceWindow
                               : 0;
    double window_min = ev.terms.total;
    for (std::size_t k = lo; k < out.loss_history.size(); ++k)
      window_min = std::min(window_min, out.loss_history[k].total);
    if (ev.terms.total > kDivergenceFactor * window_min)
      throw Error(ErrorKind::diverged_training,
                  "step " + std::to_string(it) + ": total loss grew by more than 1e6 within " +
                      std::to_string(kDivergenceWindow) + " steps");

    if (progress) progress(it, ev.terms);
    try {
      step(out.net.minus.flat(), ev.grad_minus, state_m, config);
      if (!out.net.shared) step(out.net.plus.flat(), ev.grad_plus, state_p, config);
    } catch (const Error& e) {
      throw Error(e.kind(), "step " + std::to_string(it) + ": " + e.detail());
    }
  }
  out.final_total = out.loss_history.back().total;
  return out;
}

void write_loss_csv(std::ostream& out, const std::vector<LossBreakdown>& history) {
  out << "step,l1,l2,l3,l4,total\n";
  char buf[256];
  for (std::size_t i = 0; i < history.size(); ++i) {
    const LossBreakdown& b = history[i];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", i, b.l1, b.l2, b.l3,
                  b.l4, b.total);
    out << buf;
  }
}

}  // namespace defuse
