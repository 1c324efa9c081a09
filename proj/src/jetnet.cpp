#include "defuse/jetnet.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "defuse/error.hpp"

namespace defuse {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr char kMagic[4] = {'D', 'F', 'N', 'N'};
constexpr std::uint32_t kVersion = 1;

// Packed Hessian channels: 1D (0,0); 2D (0,0), (0,1), (1,1).
constexpr int kPackK[3] = {0, 0, 1};
constexpr int kPackL[3] = {0, 1, 1};

int channel_count(int dim) { return 1 + dim + dim * (dim + 1) / 2; }
int hess_count(int dim) { return dim * (dim + 1) / 2; }

void check_finite(double v, const char* where) {
  if (!std::isfinite(v))
    throw Error(ErrorKind::non_finite_output, std::string("non-finite value in ") + where);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw Error(ErrorKind::io_error, "truncated network file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& out, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8))
    throw Error(ErrorKind::io_error, "truncated network file");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double x;
  std::memcpy(&x, &bits, 8);
  return x;
}

}  // namespace

const char* to_string(Activation act) {
  return act == Activation::elu ? "elu" : "relu";
}

ActJet elu_jet(double x) {
  if (x > 0.0) return {x, 1.0, 0.0, 0.0};
  const double e = std::exp(x);
  return {e - 1.0, e, e, e};
}

ActJet activation_jet(Activation act, double x) {
  if (act == Activation::elu) return elu_jet(x);
  if (x > 0.0) return {x, 1.0, 0.0, 0.0};
  return {0.0, 0.0, 0.0, 0.0};
}

NetworkParams::NetworkParams(std::vector<int> widths, Activation act)
    : widths_(std::move(widths)), act_(act) {
  if (widths_.size() < 2 || widths_.back() != 1)
    throw Error(ErrorKind::shape_mismatch, "network needs an input width and scalar output");
  if (widths_.front() < 1 || widths_.front() > 2)
    throw Error(ErrorKind::shape_mismatch, "input dimension must be 1 or 2");
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    if (widths_[l] < 1 || widths_[l + 1] < 1)
      throw Error(ErrorKind::shape_mismatch, "layer widths must be positive");
    offsets_.push_back(off);
    off += static_cast<std::size_t>(widths_[l + 1]) * (widths_[l] + 1);
  }
  theta_.assign(off, 0.0);
}

NetworkParams NetworkParams::mlp(int input_dim, int hidden, int width, Activation act) {
  std::vector<int> w{input_dim};
  for (int i = 0; i < hidden; ++i) w.push_back(width);
  w.push_back(1);
  return NetworkParams(std::move(w), act);
}

NetworkParams NetworkParams::unflatten(const std::vector<double>& flat) const {
  if (flat.size() != theta_.size())
    throw Error(ErrorKind::shape_mismatch,
                "flat vector has " + std::to_string(flat.size()) + " entries, network has " +
                    std::to_string(theta_.size()));
  NetworkParams out = *this;
  out.theta_ = flat;
  return out;
}

void NetworkParams::init_uniform(std::mt19937_64& rng) {
  for (int l = 0; l < layer_count(); ++l) {
    const double limit = std::sqrt(6.0 / (cols(l) + rows(l)));
    for (int r = 0; r < rows(l); ++r)
      for (int c = 0; c < cols(l); ++c) weight(l, r, c) = (2.0 * uniform01(rng) - 1.0) * limit;
    for (int r = 0; r < rows(l); ++r) bias(l, r) = 0.0;
  }
}

void NetworkParams::save(std::ostream& out) const {
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(widths_.size()));
  for (int w : widths_) put_u32(out, static_cast<std::uint32_t>(w));
  put_u32(out, static_cast<std::uint32_t>(act_));
  put_u32(out, static_cast<std::uint32_t>(theta_.size()));
  for (double t : theta_) put_f64(out, t);
  if (!out) throw Error(ErrorKind::io_error, "failed writing network parameters");
}

NetworkParams NetworkParams::load(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw Error(ErrorKind::io_error, "not a network parameter file");
  if (get_u32(in) != kVersion) throw Error(ErrorKind::io_error, "unsupported file version");
  const std::uint32_t n = get_u32(in);
  if (n < 2 || n > 64) throw Error(ErrorKind::io_error, "bad layer count");
  std::vector<int> widths(n);
  for (auto& w : widths) w = static_cast<int>(get_u32(in));
  const std::uint32_t act = get_u32(in);
  if (act > 1) throw Error(ErrorKind::io_error, "unknown activation id");
  NetworkParams p(std::move(widths), static_cast<Activation>(act));
  if (get_u32(in) != p.theta_.size())
    throw Error(ErrorKind::shape_mismatch, "parameter count disagrees with widths");
  for (auto& t : p.theta_) t = get_f64(in);
  return p;
}

void NetworkParams::save_file(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(ErrorKind::io_error, "cannot open " + tmp);
    save(out);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::io_error, "cannot rename " + tmp + ": " + ec.message());
}

NetworkParams NetworkParams::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io_error, "cannot open " + path);
  return load(in);
}

double forward_value(const NetworkParams& params, const Point& x) {
  std::vector<double> a(x.begin(), x.begin() + params.input_dim());
  std::vector<double> z;
  for (int l = 0; l < params.layer_count(); ++l) {
    const bool last = l + 1 == params.layer_count();
    z.assign(params.rows(l), 0.0);
    for (int r = 0; r < params.rows(l); ++r) {
      double s = 0.0;
      for (int c = 0; c < params.cols(l); ++c) s += params.weight(l, r, c) * a[c];
      z[r] = s + params.bias(l, r);
      if (!last) z[r] = activation_jet(params.activation(), z[r]).value;
    }
    a.swap(z);
  }
  check_finite(a[0], "forward pass");
  return a[0];
}

Jet forward_jet(const NetworkParams& params, const Point& x) {
  const int d = params.input_dim();
  // Per neuron: value, gradient (d), Hessian (d x d).
  struct Node {
    double v;
    double g[2];
    double h[2][2];
  };
  std::vector<Node> a(d), z;
  for (int k = 0; k < d; ++k) {
    a[k] = Node{x[k], {0.0, 0.0}, {{0.0, 0.0}, {0.0, 0.0}}};
    a[k].g[k] = 1.0;
  }
  for (int l = 0; l < params.layer_count(); ++l) {
    const bool last = l + 1 == params.layer_count();
    z.assign(params.rows(l), Node{0.0, {0.0, 0.0}, {{0.0, 0.0}, {0.0, 0.0}}});
    for (int r = 0; r < params.rows(l); ++r) {
      Node& n = z[r];
      double s = 0.0;
      for (int c = 0; c < params.cols(l); ++c) {
        const double w = params.weight(l, r, c);
        s += w * a[c].v;
        for (int k = 0; k < d; ++k) {
          n.g[k] += w * a[c].g[k];
          for (int m = 0; m < d; ++m) n.h[k][m] += w * a[c].h[k][m];
        }
      }
      n.v = s + params.bias(l, r);
      if (last) continue;
      const ActJet sj = activation_jet(params.activation(), n.v);
      Node y;
      y.v = sj.value;
      for (int k = 0; k < d; ++k) y.g[k] = sj.d1 * n.g[k];
      for (int k = 0; k < d; ++k)
        for (int m = 0; m < d; ++m) y.h[k][m] = sj.d2 * n.g[k] * n.g[m] + sj.d1 * n.h[k][m];
      n = y;
    }
    a.swap(z);
  }
  Jet out;
  out.dim = d;
  out.value = a[0].v;
  for (int k = 0; k < d; ++k) {
    out.grad[k] = a[0].g[k];
    for (int m = 0; m < d; ++m) out.hess[k][m] = a[0].h[k][m];
  }
  if (d == 2) {
    // Symmetrize: the two off-diagonal sums are equal in exact arithmetic.
    const double off = 0.5 * (out.hess[0][1] + out.hess[1][0]);
    out.hess[0][1] = out.hess[1][0] = off;
  }
  if (!out.finite()) throw Error(ErrorKind::non_finite_output, "non-finite jet");
  return out;
}

void JetTape::forward(const NetworkParams& params, const std::vector<Point>& xs) {
  params_ = &params;
  dim_ = params.input_dim();
  channels_ = channel_count(dim_);
  points_ = xs.size();
  const int C = channels_;
  const Eigen::Index cols = static_cast<Eigen::Index>(points_) * C;
  const int L = params.layer_count();
  inputs_.resize(L);
  pre_.resize(L);
  d1_.resize(L);
  d2_.resize(L);
  d3_.resize(L);

  Eigen::MatrixXd& in0 = inputs_[0];
  in0.setZero(dim_, cols);
  for (std::size_t s = 0; s < points_; ++s) {
    const Eigen::Index base = static_cast<Eigen::Index>(s) * C;
    for (int k = 0; k < dim_; ++k) {
      in0(k, base) = xs[s][k];
      in0(k, base + 1 + k) = 1.0;
    }
  }

  const int H = hess_count(dim_);
  for (int l = 0; l < L; ++l) {
    Eigen::Map<const RowMat> W(params.flat().data() + params.weight_offset(l),
                               params.rows(l), params.cols(l));
    Eigen::MatrixXd& Z = pre_[l];
    Z.noalias() = W * inputs_[l];
    const double* b = params.flat().data() + params.bias_offset(l);
    for (std::size_t s = 0; s < points_; ++s)
      Z.col(static_cast<Eigen::Index>(s) * C) += Eigen::Map<const Eigen::VectorXd>(b, params.rows(l));
    if (l + 1 == L) break;

    Eigen::MatrixXd& Y = inputs_[l + 1];
    Y.resize(Z.rows(), cols);
    const Eigen::Index P = static_cast<Eigen::Index>(points_);
    d1_[l].resize(Z.rows(), P);
    d2_[l].resize(Z.rows(), P);
    d3_[l].resize(Z.rows(), P);
    for (std::size_t s = 0; s < points_; ++s) {
      const Eigen::Index base = static_cast<Eigen::Index>(s) * C;
      const Eigen::Index si = static_cast<Eigen::Index>(s);
      for (Eigen::Index r = 0; r < Z.rows(); ++r) {
        const ActJet sj = activation_jet(params.activation(), Z(r, base));
        d1_[l](r, si) = sj.d1;
        d2_[l](r, si) = sj.d2;
        d3_[l](r, si) = sj.d3;
        Y(r, base) = sj.value;
        for (int k = 0; k < dim_; ++k) Y(r, base + 1 + k) = sj.d1 * Z(r, base + 1 + k);
        for (int p = 0; p < H; ++p) {
          const double gk = Z(r, base + 1 + kPackK[p]);
          const double gl = Z(r, base + 1 + kPackL[p]);
          Y(r, base + 1 + dim_ + p) = sj.d2 * gk * gl + sj.d1 * Z(r, base + 1 + dim_ + p);
        }
      }
    }
  }

  const Eigen::MatrixXd& out = pre_[L - 1];
  jets_.assign(points_, Jet{});
  for (std::size_t s = 0; s < points_; ++s) {
    const Eigen::Index base = static_cast<Eigen::Index>(s) * C;
    Jet& j = jets_[s];
    j.dim = dim_;
    j.value = out(0, base);
    for (int k = 0; k < dim_; ++k) j.grad[k] = out(0, base + 1 + k);
    for (int p = 0; p < H; ++p) {
      j.hess[kPackK[p]][kPackL[p]] = out(0, base + 1 + dim_ + p);
      j.hess[kPackL[p]][kPackK[p]] = out(0, base + 1 + dim_ + p);
    }
    if (!j.finite())
      throw Error(ErrorKind::non_finite_output, "non-finite jet at sample " + std::to_string(s));
  }
}

void JetTape::backward(const std::vector<JetCotangent>& cotangents,
                       std::vector<double>& grad) const {
  if (params_ == nullptr || cotangents.size() != points_)
    throw Error(ErrorKind::shape_mismatch,
                std::to_string(cotangents.size()) + " cotangents for " +
                    std::to_string(points_) + " recorded points");
  const NetworkParams& params = *params_;
  if (grad.size() != params.size())
    throw Error(ErrorKind::shape_mismatch, "gradient buffer has the wrong length");
  const int C = channels_;
  const int H = hess_count(dim_);
  const Eigen::Index cols = static_cast<Eigen::Index>(points_) * C;
  const int L = params.layer_count();

  Eigen::MatrixXd& Zbar = zbar_;
  Zbar.resize(1, cols);
  for (std::size_t s = 0; s < points_; ++s) {
    const Eigen::Index base = static_cast<Eigen::Index>(s) * C;
    const JetCotangent& c = cotangents[s];
    Zbar(0, base) = c.value;
    for (int k = 0; k < dim_; ++k) Zbar(0, base + 1 + k) = c.grad[k];
    for (int p = 0; p < H; ++p) {
      const int k = kPackK[p], m = kPackL[p];
      Zbar(0, base + 1 + dim_ + p) = k == m ? c.hess[k][k] : c.hess[k][m] + c.hess[m][k];
    }
  }

  Eigen::MatrixXd& Abar = abar_;
  Eigen::MatrixXd& next = next_;
  for (int l = L - 1; l >= 0; --l) {
    const int R = params.rows(l);
    Eigen::Map<RowMat> gW(grad.data() + params.weight_offset(l), R, params.cols(l));
    gW.noalias() += Zbar * inputs_[l].transpose();
    double* gb = grad.data() + params.bias_offset(l);
    for (int r = 0; r < R; ++r) {
      double acc = 0.0;
      for (std::size_t s = 0; s < points_; ++s) acc += Zbar(r, static_cast<Eigen::Index>(s) * C);
      gb[r] += acc;
    }
    if (l == 0) break;

    Eigen::Map<const RowMat> W(params.flat().data() + params.weight_offset(l), R,
                               params.cols(l));
    Abar.noalias() = W.transpose() * Zbar;

    // Through the activation of layer l-1.
    const Eigen::MatrixXd& Z = pre_[l - 1];
    next.resize(Z.rows(), cols);
    const Eigen::MatrixXd &D1 = d1_[l - 1], &D2 = d2_[l - 1], &D3 = d3_[l - 1];
    for (std::size_t s = 0; s < points_; ++s) {
      const Eigen::Index base = static_cast<Eigen::Index>(s) * C;
      const Eigen::Index si = static_cast<Eigen::Index>(s);
      for (Eigen::Index r = 0; r < Z.rows(); ++r) {
        const ActJet sj{0.0, D1(r, si), D2(r, si), D3(r, si)};
        double zv = Abar(r, base) * sj.d1;
        double zg[2] = {0.0, 0.0};
        for (int k = 0; k < dim_; ++k) {
          const double yb = Abar(r, base + 1 + k);
          zg[k] += yb * sj.d1;
          zv += yb * sj.d2 * Z(r, base + 1 + k);
        }
        for (int p = 0; p < H; ++p) {
          const double yb = Abar(r, base + 1 + dim_ + p);
          const int k = kPackK[p], m = kPackL[p];
          const double gk = Z(r, base + 1 + k), gm = Z(r, base + 1 + m);
          zv += yb * (sj.d3 * gk * gm + sj.d2 * Z(r, base + 1 + dim_ + p));
          zg[k] += yb * sj.d2 * gm;
          zg[m] += yb * sj.d2 * gk;
          next(r, base + 1 + dim_ + p) = yb * sj.d1;
        }
        next(r, base) = zv;
        for (int k = 0; k < dim_; ++k) next(r, base + 1 + k) = zg[k];
      }
    }
    Zbar.swap(next);
  }
}

std::vector<double> param_gradient(const NetworkParams& params,
                                   const std::vector<Point>& xs,
                                   const std::vector<JetCotangent>& cotangents) {
  JetTape tape;
  tape.forward(params, xs);
  std::vector<double> grad(params.size(), 0.0);
  tape.backward(cotangents, grad);
  return grad;
}

Jet distance_jet(int dim, const Point& x, const Point& x0, const Vec2& normal) {
  Jet j;
  j.dim = dim;
  Vec2 diff{x[0] - x0[0], dim == 2 ? x[1] - x0[1] : 0.0};
  const double dist = norm(diff, dim);
  j.value = dist;
  if (dist == 0.0) {
    j.grad = normal;
    if (dim == 1) j.grad[1] = 0.0;
    return j;
  }
  // The Hessian of |y - x0| with x0 held fixed is (I - e e^T) / d, which the
  // distance to the interface does not have. The plane through x0 normal to e
  // keeps the value and gradient and drops that term.
  for (int k = 0; k < dim; ++k) j.grad[k] = diff[k] / dist;
  return j;
}

Jet anchor(const Jet& net, const Jet& dist, double g_hat) {
  const int d = net.dim;
  // q = G + net; u = G + dist * q.
  const double q = g_hat + net.value;
  Jet u;
  u.dim = d;
  u.value = g_hat + dist.value * q;
  for (int k = 0; k < d; ++k) u.grad[k] = q * dist.grad[k] + dist.value * net.grad[k];
  for (int k = 0; k < d; ++k)
    for (int m = 0; m < d; ++m)
      u.hess[k][m] = q * dist.hess[k][m] + dist.grad[k] * net.grad[m] +
                     net.grad[k] * dist.grad[m] + dist.value * net.hess[k][m];
  return u;
}

JetCotangent anchor_adjoint(const JetCotangent& cu, const Jet& dist) {
  const int d = dist.dim;
  JetCotangent cq;
  cq.value = cu.value * dist.value;
  for (int k = 0; k < d; ++k) cq.value += cu.grad[k] * dist.grad[k];
  for (int k = 0; k < d; ++k)
    for (int m = 0; m < d; ++m) cq.value += cu.hess[k][m] * dist.hess[k][m];
  for (int m = 0; m < d; ++m) {
    double g = dist.value * cu.grad[m];
    for (int k = 0; k < d; ++k) g += cu.hess[k][m] * dist.grad[k] + cu.hess[m][k] * dist.grad[k];
    cq.grad[m] = g;
  }
  for (int k = 0; k < d; ++k)
    for (int m = 0; m < d; ++m) cq.hess[k][m] = dist.value * cu.hess[k][m];
  return cq;
}

Jet anchored_jet(const NetworkParams& params, const Point& x, const Point& x0,
                 double g_hat_at_x0, const Vec2& normal) {
  const int d = params.input_dim();
  return anchor(forward_jet(params, x), distance_jet(d, x, x0, normal), g_hat_at_x0);
}

}  // namespace defuse
