#include "defuse/loss.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "defuse/error.hpp"

namespace defuse {

namespace {

void attach_anchor(const ProblemSpec& problem, SidePoints& pts) {
  pts.anchored = true;
  const std::size_t n = pts.x.size();
  pts.foot.resize(n);
  pts.g_hat.resize(n);
  pts.normal.assign(n, Vec2{1.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) {
    const Point x0 = problem.foot_point(pts.x[i]);
    pts.foot[i] = x0;
    pts.g_hat[i] = problem.g_hat(x0);
    const double dx = pts.x[i][0] - x0[0];
    const double dy = problem.dim == 2 ? pts.x[i][1] - x0[1] : 0.0;
    if (dx == 0.0 && dy == 0.0) pts.normal[i] = normal_at(problem.phi, x0);
  }
}

void check_loss(double v, const char* what, std::size_t index) {
  if (!std::isfinite(v))
    throw Error(ErrorKind::non_finite_loss,
                std::string(what) + " is not finite at sample " + std::to_string(index));
}

}  // namespace

SampleSet build_sample_set(const ProblemSpec& problem, const RegionMap& map,
                           std::vector<Point> interior_minus,
                           std::vector<Point> interior_plus, bool shared) {
  SampleSet s;
  s.minus.x = std::move(interior_minus);
  s.plus.x = std::move(interior_plus);
  s.minus.interior_count = s.minus.x.size();
  s.plus.interior_count = s.plus.x.size();

  // Each pair node enters its side's residual once, however many pairs use it.
  std::unordered_map<std::size_t, std::size_t> minus_slot, plus_slot;
  auto slot = [&](std::unordered_map<std::size_t, std::size_t>& slots, SidePoints& side,
                  std::size_t node) {
    auto [it, inserted] = slots.try_emplace(node, side.x.size());
    if (inserted) side.x.push_back(map.grid.node(node));
    return it->second;
  };
  for (const NodePair& np : map.node_pairs) {
    PairTerm t;
    t.minus_index = slot(minus_slot, s.minus, np.minus_node);
    t.plus_index = slot(plus_slot, s.plus, np.plus_node);
    t.foot = np.foot;
    t.normal = normal_at(problem.phi, np.foot);
    t.w = problem.jump_w(np.foot);
    t.v = problem.jump_v(np.foot);
    s.pairs.push_back(t);
  }
  attach_anchor(problem, s.plus);
  if (shared) attach_anchor(problem, s.minus);
  return s;
}

double pde_residual(const ProblemSpec& problem, Side side, const Point& x, const Jet& jet) {
  const Coefficient& beta = problem.beta(side);
  const Vec2 gb = beta.grad(x);
  return -(dot(gb, jet.grad, jet.dim) + beta.value(x) * jet.laplacian()) -
         problem.f(side)(x, jet.value);
}

JetLoss interior_loss(const ProblemSpec& problem, Side side, const std::vector<Point>& xs,
                      const std::vector<Jet>& jets) {
  if (xs.size() != jets.size())
    throw Error(ErrorKind::shape_mismatch, "points and jets differ in length");
  JetLoss out;
  out.cotangents.assign(xs.size(), JetCotangent{});
  if (xs.empty()) return out;
  const double n = static_cast<double>(xs.size());
  const Coefficient& beta = problem.beta(side);
  const SourceTerm& f = problem.f(side);
  double sum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Point& x = xs[i];
    const Jet& u = jets[i];
    const double r = pde_residual(problem, side, x, u);
    check_loss(r, side == Side::minus ? "minus residual" : "plus residual", i);
    sum += r * r;
    const double c = 2.0 * r / n;
    const Vec2 gb = beta.grad(x);
    const double b = beta.value(x);
    JetCotangent& ct = out.cotangents[i];
    ct.value = -c * f.derivative(x, u.value);
    for (int k = 0; k < u.dim; ++k) {
      ct.grad[k] = -c * gb[k];
      ct.hess[k][k] = -c * b;
    }
  }
  out.value = sum / n;
  return out;
}

JumpLoss jump_losses(const ProblemSpec& problem, const std::vector<PairTerm>& pairs,
                     const std::vector<Point>& minus_x, const std::vector<Jet>& minus_jets,
                     const std::vector<Point>& plus_x, const std::vector<Jet>& plus_jets) {
  JumpLoss out;
  const std::size_t T = pairs.size();
  out.minus3.assign(T, JetCotangent{});
  out.plus3.assign(T, JetCotangent{});
  out.minus4.assign(T, JetCotangent{});
  out.plus4.assign(T, JetCotangent{});
  if (T == 0) return out;
  const int d = problem.dim;
  double s3 = 0.0, s4 = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const PairTerm& p = pairs[t];
    const Jet& um = minus_jets.at(p.minus_index);
    const Jet& up = plus_jets.at(p.plus_index);
    const Point& xm = minus_x.at(p.minus_index);
    const Point& xp = plus_x.at(p.plus_index);
    const double a = up.value - um.value - p.w;
    const double bp = problem.beta_plus.value(xp), bm = problem.beta_minus.value(xm);
    const double b = bp * dot(up.grad, p.normal, d) - bm * dot(um.grad, p.normal, d) - p.v;
    check_loss(a, "value jump", t);
    check_loss(b, "flux jump", t);
    s3 += a * a;
    s4 += b * b;
    const double ca = 2.0 * a / static_cast<double>(T);
    const double cb = 2.0 * b / static_cast<double>(T);
    out.plus3[t].value = ca;
    out.minus3[t].value = -ca;
    for (int k = 0; k < d; ++k) {
      out.plus4[t].grad[k] = cb * bp * p.normal[k];
      out.minus4[t].grad[k] = -cb * bm * p.normal[k];
    }
  }
  out.l3 = s3 / static_cast<double>(T);
  out.l4 = s4 / static_cast<double>(T);
  return out;
}

LossBreakdown total_loss(const LossWeights& w, double l1, double l2, double l3, double l4) {
  LossBreakdown b{l1, l2, l3, l4, 0.0};
  b.total = w.w1 * l1 + w.w2 * l2 + w.w3 * l3 + w.w4 * l4;
  return b;
}

LossWeights auto_weights(const LossBreakdown& initial) {
  return auto_weights(initial, {true, true, true, true});
}

LossWeights auto_weights(const LossBreakdown& initial, const std::array<bool, 4>& active) {
  constexpr double kFloor = 1e-12;
  const double terms[4] = {initial.l1, initial.l2, initial.l3, initial.l4};
  double w[4];
  double top = 0.0;
  for (int i = 0; i < 4; ++i) {
    w[i] = 1.0 / std::max(terms[i], kFloor);
    if (active[i]) top = std::max(top, w[i]);
  }
  if (top == 0.0) return LossWeights{};
  for (int i = 0; i < 4; ++i) w[i] = active[i] ? w[i] / top : 1.0;
  return LossWeights{w[0], w[1], w[2], w[3]};
}

std::vector<Jet> side_jets(const NetworkParams& params, const SidePoints& pts, JetTape& tape) {
  tape.forward(params, pts.x);
  std::vector<Jet> jets = tape.jets();
  if (!pts.anchored) return jets;
  const int d = params.input_dim();
  for (std::size_t i = 0; i < jets.size(); ++i) {
    const Jet dist = distance_jet(d, pts.x[i], pts.foot[i], pts.normal[i]);
    jets[i] = anchor(jets[i], dist, pts.g_hat[i]);
  }
  return jets;
}

LossEvaluation evaluate_loss(const ProblemSpec& problem, const PairedNet& net,
                             const SampleSet& samples, const LossWeights& weights,
                             bool with_gradient, LossWorkspace* workspace) {
  LossWorkspace local;
  LossWorkspace& ws = workspace ? *workspace : local;
  JetTape& tape_m = ws.minus;
  JetTape& tape_p = ws.plus;
  const std::vector<Jet> jm = side_jets(net.side(Side::minus), samples.minus, tape_m);
  const std::vector<Jet> jp = side_jets(net.side(Side::plus), samples.plus, tape_p);

  const JetLoss lm = interior_loss(problem, Side::minus, samples.minus.x, jm);
  const JetLoss lp = interior_loss(problem, Side::plus, samples.plus.x, jp);
  JumpLoss lj = jump_losses(problem, samples.pairs, samples.minus.x, jm, samples.plus.x, jp);
  if (net.shared) {
    // One continuous network: the value jump vanishes identically.
    lj.l3 = 0.0;
    for (JetCotangent& c : lj.minus3) c.value = 0.0;
    for (JetCotangent& c : lj.plus3) c.value = 0.0;
  }

  LossEvaluation out;
  out.terms = total_loss(weights, lm.value, lp.value, lj.l3, lj.l4);
  if (!std::isfinite(out.terms.total))
    throw Error(ErrorKind::non_finite_loss, "total loss is not finite");
  if (!with_gradient) return out;

  auto side_cotangents = [&](const SidePoints& pts, const JetLoss& interior, double w_int,
                             bool minus_side) {
    std::vector<JetCotangent> cot(pts.x.size());
    for (std::size_t i = 0; i < cot.size(); ++i) {
      const JetCotangent& c = interior.cotangents[i];
      cot[i].value = w_int * c.value;
      for (int k = 0; k < 2; ++k) {
        cot[i].grad[k] = w_int * c.grad[k];
        for (int l = 0; l < 2; ++l) cot[i].hess[k][l] = w_int * c.hess[k][l];
      }
    }
    for (std::size_t t = 0; t < samples.pairs.size(); ++t) {
      const PairTerm& p = samples.pairs[t];
      const std::size_t i = minus_side ? p.minus_index : p.plus_index;
      const JetCotangent& c3 = minus_side ? lj.minus3[t] : lj.plus3[t];
      const JetCotangent& c4 = minus_side ? lj.minus4[t] : lj.plus4[t];
      cot[i].value += weights.w3 * c3.value;
      for (int k = 0; k < 2; ++k) cot[i].grad[k] += weights.w4 * c4.grad[k];
    }
    if (pts.anchored) {
      const int d = problem.dim;
      for (std::size_t i = 0; i < cot.size(); ++i)
        cot[i] = anchor_adjoint(cot[i], distance_jet(d, pts.x[i], pts.foot[i], pts.normal[i]));
    }
    return cot;
  };

  const auto cm = side_cotangents(samples.minus, lm, weights.w1, true);
  const auto cp = side_cotangents(samples.plus, lp, weights.w2, false);
  out.grad_minus.assign(net.minus.size(), 0.0);
  tape_m.backward(cm, out.grad_minus);
  if (net.shared) {
    tape_p.backward(cp, out.grad_minus);
  } else {
    out.grad_plus.assign(net.plus.size(), 0.0);
    tape_p.backward(cp, out.grad_plus);
  }
  return out;
}

}  // namespace defuse
