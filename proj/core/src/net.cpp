#include "msgreen/net.hpp"

#include <cmath>

namespace msgreen::net {

Activation activation_from_name(const std::string& name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "arctan") return Activation::arctan;
  throw ArgumentError("unknown activation '" + name + "'");
}

const char* activation_name(Activation a) {
  return a == Activation::tanh ? "tanh" : "arctan";
}

Jet Jet::zero(int m) {
  Jet j;
  j.grad = Vec::Zero(m);
  j.hess = Mat::Zero(m, m);
  return j;
}

// --- Network ---------------------------------------------------------------

Network::Network(std::vector<LayerSpec> layers, Activation act, ScaleParams scale)
    : layers_(std::move(layers)), act_(act), scale_(scale) {
  require(!layers_.empty(), "Network: at least one layer required");
  int total = 0;
  for (size_t l = 0; l < layers_.size(); ++l) {
    const auto& L = layers_[l];
    require(L.in_dim > 0 && L.out_dim > 0, "Network: layer dims must be positive");
    if (l > 0 && layers_[l - 1].out_dim != L.in_dim)
      throw ShapeError("Network: layer " + std::to_string(l) + " input dim " +
                       std::to_string(L.in_dim) + " does not match previous output dim " +
                       std::to_string(layers_[l - 1].out_dim));
    offsets_.emplace_back(total, total + L.in_dim * L.out_dim);
    total += L.in_dim * L.out_dim + L.out_dim;
  }
  require(scale_.epsilon > 0, "Network: scale epsilon must be positive");
  params_ = Vec::Zero(total);
}

Network Network::mlp(int input_dim, const std::vector<int>& hidden, Activation act,
                     ScaleParams scale) {
  require(input_dim > 0, "mlp: input_dim must be positive");
  require(!hidden.empty(), "mlp: at least one hidden layer required");
  std::vector<LayerSpec> layers;
  int prev = input_dim;
  for (int w : hidden) {
    layers.push_back({prev, w});
    prev = w;
  }
  layers.push_back({prev, 1});
  return Network(std::move(layers), act, scale);
}

Eigen::Map<const Mat> Network::weight(int l) const {
  const auto& L = layers_[static_cast<size_t>(l)];
  return {params_.data() + weight_offset(l), L.out_dim, L.in_dim};
}

Eigen::Map<Mat> Network::weight(int l) {
  const auto& L = layers_[static_cast<size_t>(l)];
  return {params_.data() + weight_offset(l), L.out_dim, L.in_dim};
}

Eigen::Map<const Vec> Network::bias(int l) const {
  const auto& L = layers_[static_cast<size_t>(l)];
  return {params_.data() + bias_offset(l), L.out_dim};
}

Eigen::Map<Vec> Network::bias(int l) {
  const auto& L = layers_[static_cast<size_t>(l)];
  return {params_.data() + bias_offset(l), L.out_dim};
}

void Network::init_uniform(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (size_t l = 0; l < layers_.size(); ++l) {
    const auto& L = layers_[l];
    const double bound = 1.0 / std::sqrt(static_cast<double>(L.in_dim));
    const int woff = offsets_[l].first;
    const int boff = offsets_[l].second;
    for (int k = 0; k < L.in_dim * L.out_dim; ++k)
      params_[woff + k] = uniform(rng, -bound, bound);
    for (int k = 0; k < L.out_dim; ++k) params_[boff + k] = uniform(rng, -bound, bound);
  }
  init_seed_ = seed;
}

// --- JetEvaluator ------------------------------------------------------------

JetEvaluator::JetEvaluator(const Network& net, int max_batch)
    : net_(&net), max_batch_(max_batch) {
  require(max_batch >= 1, "JetEvaluator: max_batch must be >= 1");
  require(net.output_dim() == 1, "JetEvaluator: network output must be scalar");
  m_ = net.input_dim();
  npairs_ = m_ * (m_ + 1) / 2;
  nchan_ = m_ + npairs_;

  tri_.assign(static_cast<size_t>(m_), std::vector<int>(static_cast<size_t>(m_), -1));
  for (int i = 0; i < m_; ++i)
    for (int j = i; j < m_; ++j) {
      tri_[static_cast<size_t>(i)][static_cast<size_t>(j)] =
          static_cast<int>(pairs_.size());
      tri_[static_cast<size_t>(j)][static_cast<size_t>(i)] =
          tri_[static_cast<size_t>(i)][static_cast<size_t>(j)];
      pairs_.emplace_back(i, j);
    }

  const int B = max_batch_;
  const int C = B * nchan_;
  Zraw_.resize(m_, B);
  X0v_.resize(m_, B);
  X0d_.resize(m_, C);
  int maxw = m_;
  const int L = net.layer_count();
  Sv_.resize(static_cast<size_t>(L));
  Sd_.resize(static_cast<size_t>(L));
  Xv_.resize(static_cast<size_t>(L));
  Xd_.resize(static_cast<size_t>(L));
  for (int l = 0; l < L; ++l) {
    const int n = net.layers()[static_cast<size_t>(l)].out_dim;
    maxw = std::max(maxw, n);
    Sv_[static_cast<size_t>(l)].resize(n, B);
    Sd_[static_cast<size_t>(l)].resize(n, C);
    if (l + 1 < L) {
      Xv_[static_cast<size_t>(l)].resize(n, B);
      Xd_[static_cast<size_t>(l)].resize(n, C);
    }
  }
  Av_.resize(maxw, B);
  Ad_.resize(maxw, C);
  Gv_.resize(maxw, B);
  Gd_.resize(maxw, C);
  Gacc_.resize(maxw, m_);
  d1_.resize(maxw);
  d2_.resize(maxw);
  d3_.resize(maxw);
  acc_.resize(maxw);
}

void JetEvaluator::run_value_chain() {
  const int B = batch_;
  const int L = net_->layer_count();
  const Mat* prev = &X0v_;
  for (int l = 0; l < L; ++l) {
    auto& Sv = Sv_[static_cast<size_t>(l)];
    Sv.leftCols(B).noalias() = net_->weight(l) * prev->leftCols(B);
    Sv.leftCols(B).colwise() += net_->bias(l);
    if (l + 1 < L) {
      auto& Xv = Xv_[static_cast<size_t>(l)];
      if (net_->activation() == Activation::tanh)
        Xv.leftCols(B).array() = Sv.leftCols(B).array().tanh();
      else
        Xv.leftCols(B).array() = Sv.leftCols(B).array().atan();
      prev = &Xv;
    }
  }
}

// Fills d1_ (and d2_, d3_ when order asks for them) with the activation
// derivatives of hidden layer `l` at point `p`, computed from the stored
// pre-/post-activation values.
void JetEvaluator::act_derivs(int l, int p, int order) {
  const int n = net_->layers()[static_cast<size_t>(l)].out_dim;
  if (net_->activation() == Activation::tanh) {
    auto t = Xv_[static_cast<size_t>(l)].col(p).array();
    d1_.head(n) = 1.0 - t.square();
    if (order >= 2) d2_.head(n) = -2.0 * t * d1_.head(n);
    if (order >= 3) d3_.head(n) = -2.0 * d1_.head(n) * (1.0 - 3.0 * t.square());
  } else {
    auto s = Sv_[static_cast<size_t>(l)].col(p).array();
    d1_.head(n) = (1.0 + s.square()).inverse();
    if (order >= 2) d2_.head(n) = -2.0 * s * d1_.head(n).square();
    if (order >= 3) d3_.head(n) = (6.0 * s.square() - 2.0) * d1_.head(n).cube();
  }
}

void JetEvaluator::run_jet_chain() {
  const int B = batch_;
  const int C = B * nchan_;
  const int L = net_->layer_count();
  const Mat* prev = &X0d_;
  for (int l = 0; l < L; ++l) {
    auto& Sd = Sd_[static_cast<size_t>(l)];
    Sd.leftCols(C).noalias() = net_->weight(l) * prev->leftCols(C);
    if (l + 1 < L) {
      auto& Xd = Xd_[static_cast<size_t>(l)];
      for (int p = 0; p < B; ++p) {
        act_derivs(l, p, 2);
        const int n = net_->layers()[static_cast<size_t>(l)].out_dim;
        const int base = p * nchan_;
        auto d1 = d1_.head(n);
        auto d2 = d2_.head(n);
        for (int i = 0; i < m_; ++i)
          Xd.col(base + i).array() = d1 * Sd.col(base + i).array();
        for (int t = 0; t < npairs_; ++t) {
          const auto [i, j] = pairs_[static_cast<size_t>(t)];
          Xd.col(base + m_ + t).array() =
              d2 * Sd.col(base + i).array() * Sd.col(base + j).array() +
              d1 * Sd.col(base + m_ + t).array();
        }
      }
      prev = &Xd;
    }
  }
}

void JetEvaluator::check_finite(bool jets) const {
  const auto& out_v = Sv_.back();
  for (int p = 0; p < batch_; ++p) {
    bool ok = std::isfinite(out_v(0, p));
    if (ok && jets) {
      const auto& out_d = Sd_.back();
      for (int c = p * nchan_; ok && c < (p + 1) * nchan_; ++c)
        ok = std::isfinite(out_d(0, c));
    }
    if (!ok)
      throw NumericError("network produced a non-finite output", Zraw_.col(p));
  }
}

void JetEvaluator::forward_values(const Eigen::Ref<const Mat>& Z) {
  if (Z.rows() != m_)
    throw ShapeError("forward_values: input has " + std::to_string(Z.rows()) +
                     " rows, expected " + std::to_string(m_));
  const int B = static_cast<int>(Z.cols());
  require(B >= 1 && B <= max_batch_, "forward_values: batch size out of range");
  batch_ = B;
  Zraw_.leftCols(B) = Z;
  X0v_.leftCols(B) = Zraw_.leftCols(B) * net_->scale().input_factor();
  run_value_chain();
  have_jets_ = false;
  check_finite(false);
}

void JetEvaluator::forward_jets(const Eigen::Ref<const Mat>& Z) {
  if (Z.rows() != m_)
    throw ShapeError("forward_jets: input has " + std::to_string(Z.rows()) +
                     " rows, expected " + std::to_string(m_));
  const int B = static_cast<int>(Z.cols());
  require(B >= 1 && B <= max_batch_, "forward_jets: batch size out of range");
  batch_ = B;
  Zraw_.leftCols(B) = Z;
  const double fi = net_->scale().input_factor();
  X0v_.leftCols(B) = Zraw_.leftCols(B) * fi;
  X0d_.leftCols(B * nchan_).setZero();
  for (int p = 0; p < B; ++p)
    for (int i = 0; i < m_; ++i) X0d_(i, p * nchan_ + i) = fi;
  run_value_chain();
  run_jet_chain();
  have_jets_ = true;
  check_finite(true);
}

double JetEvaluator::value(int p) const {
  require(p >= 0 && p < batch_, "value: point index out of range");
  return net_->scale().output_factor() * Sv_.back()(0, p);
}

Jet JetEvaluator::jet(int p) const {
  require(have_jets_, "jet: forward_jets has not been called");
  require(p >= 0 && p < batch_, "jet: point index out of range");
  const double fo = net_->scale().output_factor();
  Jet J;
  J.value = fo * Sv_.back()(0, p);
  J.grad.resize(m_);
  J.hess.resize(m_, m_);
  const auto& out_d = Sd_.back();
  const int base = p * nchan_;
  for (int i = 0; i < m_; ++i) J.grad[i] = fo * out_d(0, base + i);
  for (int t = 0; t < npairs_; ++t) {
    const auto [i, j] = pairs_[static_cast<size_t>(t)];
    const double v = fo * out_d(0, base + m_ + t);
    J.hess(i, j) = v;
    J.hess(j, i) = v;
  }
  return J;
}

void JetEvaluator::backward_values(const Eigen::Ref<const Vec>& vbar, Vec& theta_grad) {
  const int B = batch_;
  require(B > 0, "backward_values: no forward batch");
  require(static_cast<int>(vbar.size()) == B, "backward_values: adjoint size mismatch");
  require(static_cast<int>(theta_grad.size()) == net_->param_count(),
          "backward_values: gradient size mismatch");
  const int L = net_->layer_count();
  Av_.row(0).head(B) = net_->scale().output_factor() * vbar.transpose();
  for (int l = L - 1; l >= 0; --l) {
    const auto& spec = net_->layers()[static_cast<size_t>(l)];
    const int out = spec.out_dim;
    const int in = spec.in_dim;
    const Mat& prev_v = (l == 0) ? X0v_ : Xv_[static_cast<size_t>(l - 1)];
    Eigen::Map<Mat> Wg(theta_grad.data() + net_->weight_offset(l), out, in);
    Eigen::Map<Vec> bg(theta_grad.data() + net_->bias_offset(l), out);
    Wg.noalias() += Av_.topLeftCorner(out, B) * prev_v.leftCols(B).transpose();
    bg.noalias() += Av_.topLeftCorner(out, B).rowwise().sum();
    if (l > 0) {
      Gv_.topLeftCorner(in, B).noalias() =
          net_->weight(l).transpose() * Av_.topLeftCorner(out, B);
      for (int p = 0; p < B; ++p) {
        act_derivs(l - 1, p, 1);
        Av_.col(p).head(in).array() = d1_.head(in) * Gv_.col(p).head(in).array();
      }
    }
  }
}

void JetEvaluator::backward_jets(const std::vector<Jet>& adjoints, Vec& theta_grad) {
  const int B = batch_;
  require(have_jets_, "backward_jets: forward_jets has not been called");
  require(static_cast<int>(adjoints.size()) == B, "backward_jets: adjoint count mismatch");
  require(static_cast<int>(theta_grad.size()) == net_->param_count(),
          "backward_jets: gradient size mismatch");
  const int L = net_->layer_count();
  const int C = B * nchan_;
  const double fo = net_->scale().output_factor();

  for (int p = 0; p < B; ++p) {
    const Jet& a = adjoints[static_cast<size_t>(p)];
    require(static_cast<int>(a.grad.size()) == m_ && a.hess.rows() == m_ && a.hess.cols() == m_,
            "backward_jets: adjoint jet has wrong dimensions");
    Av_(0, p) = fo * a.value;
    const int base = p * nchan_;
    for (int i = 0; i < m_; ++i) Ad_(0, base + i) = fo * a.grad(i);
    for (int t = 0; t < npairs_; ++t) {
      const auto [i, j] = pairs_[static_cast<size_t>(t)];
      Ad_(0, base + m_ + t) = (i == j) ? fo * a.hess(i, i) : fo * (a.hess(i, j) + a.hess(j, i));
    }
  }

  for (int l = L - 1; l >= 0; --l) {
    const auto& spec = net_->layers()[static_cast<size_t>(l)];
    const int out = spec.out_dim;
    const int in = spec.in_dim;
    const Mat& prev_v = (l == 0) ? X0v_ : Xv_[static_cast<size_t>(l - 1)];
    const Mat& prev_d = (l == 0) ? X0d_ : Xd_[static_cast<size_t>(l - 1)];
    Eigen::Map<Mat> Wg(theta_grad.data() + net_->weight_offset(l), out, in);
    Eigen::Map<Vec> bg(theta_grad.data() + net_->bias_offset(l), out);
    Wg.noalias() += Av_.topLeftCorner(out, B) * prev_v.leftCols(B).transpose();
    Wg.noalias() += Ad_.topLeftCorner(out, C) * prev_d.leftCols(C).transpose();
    bg.noalias() += Av_.topLeftCorner(out, B).rowwise().sum();
    if (l == 0) break;

    Gv_.topLeftCorner(in, B).noalias() =
        net_->weight(l).transpose() * Av_.topLeftCorner(out, B);
    Gd_.topLeftCorner(in, C).noalias() =
        net_->weight(l).transpose() * Ad_.topLeftCorner(out, C);

    // Reverse the activation of layer l-1. Pre-activation gradient/Hessian
    // channels of that layer are needed for the chain-rule terms.
    const Mat& Sd = Sd_[static_cast<size_t>(l - 1)];
    for (int p = 0; p < B; ++p) {
      act_derivs(l - 1, p, 3);
      const int base = p * nchan_;
      auto d1 = d1_.head(in);
      auto d2 = d2_.head(in);
      auto d3 = d3_.head(in);
      acc_.head(in) = d1 * Gv_.col(p).head(in).array();
      for (int i = 0; i < m_; ++i) {
        Gacc_.col(i).head(in).array() = d1 * Gd_.col(base + i).head(in).array();
        acc_.head(in) +=
            d2 * Gd_.col(base + i).head(in).array() * Sd.col(base + i).head(in).array();
      }
      for (int t = 0; t < npairs_; ++t) {
        const auto [i, j] = pairs_[static_cast<size_t>(t)];
        auto hbar = Gd_.col(base + m_ + t).head(in).array();
        auto gi = Sd.col(base + i).head(in).array();
        auto gj = Sd.col(base + j).head(in).array();
        auto ht = Sd.col(base + m_ + t).head(in).array();
        acc_.head(in) += hbar * (d3 * gi * gj + d2 * ht);
        if (i == j) {
          Gacc_.col(i).head(in).array() += 2.0 * d2 * hbar * gi;
        } else {
          Gacc_.col(i).head(in).array() += d2 * hbar * gj;
          Gacc_.col(j).head(in).array() += d2 * hbar * gi;
        }
        Ad_.col(base + m_ + t).head(in).array() = d1 * hbar;
      }
      for (int i = 0; i < m_; ++i) Ad_.col(base + i).head(in) = Gacc_.col(i).head(in);
      Av_.col(p).head(in) = acc_.head(in).matrix();
    }
  }
}

// --- contract-level helpers --------------------------------------------------

double eval(const Network& net, const Vec& z) {
  JetEvaluator ev(net, 1);
  ev.forward_values(z);
  return ev.value(0);
}

Jet eval_jet(const Network& net, const Vec& z) {
  JetEvaluator ev(net, 1);
  ev.forward_jets(z);
  return ev.jet(0);
}

double loss_param_grad(const Network& net, const std::vector<Vec>& points,
                       const JetObjective& objective, Vec& theta_grad) {
  require(!points.empty(), "loss_param_grad: no points");
  const int m = net.input_dim();
  const long N = static_cast<long>(points.size());
  const int B = static_cast<int>(std::min<long>(N, 64));
  JetEvaluator ev(net, B);

  std::vector<Jet> jets(points.size());
  Mat block(m, B);
  for (long b = 0; b < N; b += B) {
    const int nb = static_cast<int>(std::min<long>(B, N - b));
    for (int k = 0; k < nb; ++k) {
      const Vec& z = points[static_cast<size_t>(b + k)];
      if (static_cast<int>(z.size()) != m)
        throw ShapeError("loss_param_grad: point dimension mismatch");
      block.col(k) = z;
    }
    ev.forward_jets(block.leftCols(nb));
    for (int k = 0; k < nb; ++k) jets[static_cast<size_t>(b + k)] = ev.jet(k);
  }

  std::vector<Jet> adjoints(points.size(), Jet::zero(m));
  const double value = objective(jets, adjoints);

  theta_grad = Vec::Zero(net.param_count());
  std::vector<Jet> slice;
  for (long b = 0; b < N; b += B) {
    const int nb = static_cast<int>(std::min<long>(B, N - b));
    for (int k = 0; k < nb; ++k)
      block.col(k) = points[static_cast<size_t>(b + k)];
    ev.forward_jets(block.leftCols(nb));
    slice.assign(adjoints.begin() + b, adjoints.begin() + b + nb);
    ev.backward_jets(slice, theta_grad);
  }
  return value;
}

double param_magnitude_stat(const Network& net) {
  const int L = net.layer_count();
  require(L >= 2, "param_magnitude_stat: network has no hidden layer");
  double layer_sum = 0.0;
  for (int l = 0; l + 1 < L; ++l) {
    const auto Win = net.weight(l);
    const auto b = net.bias(l);
    const auto Wout = net.weight(l + 1);
    const int n = net.layers()[static_cast<size_t>(l)].out_dim;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double w1 = Win.row(i).lpNorm<1>();
      const double a = Wout.col(i).lpNorm<1>();
      const double bi = std::abs(b(i));
      const double term = a * (w1 * w1 * w1 + 2.0 * w1 * w1 * bi + w1 * bi * bi);
      acc += term * term;
    }
    layer_sum += acc / n;
  }
  return layer_sum / (L - 1);
}

double max_abs_param(const Network& net) {
  return net.param_count() == 0 ? 0.0 : net.params().cwiseAbs().maxCoeff();
}

}  // namespace msgreen::net
