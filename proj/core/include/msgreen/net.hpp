#pragma once

// Dense fully connected networks with an analytic derivative engine.
//
// The engine propagates, alongside each pre-/post-activation value, the first
// and second derivatives of that value with respect to the network *input*
// ("jets"). It also supports a reverse pass that pulls an adjoint of
// (value, gradient, Hessian) back to the network parameters, which is what
// gradient-based training of derivative-dependent losses needs.
//
// Networks may carry a scale transform: for scale (epsilon, alpha, beta) the
// network computes epsilon^alpha * mlp(z * epsilon^-beta). The transform has
// no trainable parameters; with epsilon = 1 (or alpha = beta = 0) it is the
// exact identity.

#include "msgreen/common.hpp"

#include <functional>
#include <vector>

namespace msgreen::net {

enum class Activation { tanh, arctan };

Activation activation_from_name(const std::string& name);
const char* activation_name(Activation a);

struct ScaleParams {
  double epsilon = 1.0;
  double alpha = 0.0;
  double beta = 0.0;

  double input_factor() const { return std::pow(epsilon, -beta); }
  double output_factor() const { return std::pow(epsilon, alpha); }
};

struct LayerSpec {
  int in_dim = 0;
  int out_dim = 0;
};

// Value plus first/second derivatives with respect to the network input.
// Also used for adjoints of the same shape. hess is stored as a full
// symmetric matrix.
struct Jet {
  double value = 0.0;
  Vec grad;
  Mat hess;

  static Jet zero(int m);
};

class Network {
 public:
  // layers[k].out_dim must equal layers[k+1].in_dim; the last layer must
  // have out_dim == 1. An activation follows every layer except the last.
  Network(std::vector<LayerSpec> layers, Activation act, ScaleParams scale = {});

  // Convenience builder: input_dim -> hidden[0] -> ... -> hidden.back() -> 1.
  static Network mlp(int input_dim, const std::vector<int>& hidden, Activation act,
                     ScaleParams scale = {});

  int input_dim() const { return layers_.front().in_dim; }
  int output_dim() const { return layers_.back().out_dim; }
  int layer_count() const { return static_cast<int>(layers_.size()); }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  Activation activation() const { return act_; }
  const ScaleParams& scale() const { return scale_; }
  void set_scale(const ScaleParams& s) { scale_ = s; }

  int param_count() const { return static_cast<int>(params_.size()); }
  const Vec& params() const { return params_; }
  Vec& params() { return params_; }

  // Weights of layer l as an out_dim x in_dim view into the flat parameter
  // vector (column-major), followed by the bias vector.
  Eigen::Map<const Mat> weight(int l) const;
  Eigen::Map<Mat> weight(int l);
  Eigen::Map<const Vec> bias(int l) const;
  Eigen::Map<Vec> bias(int l);

  // Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)] per layer, weights
  // then biases, from a seeded generator. Fully deterministic.
  void init_uniform(std::uint64_t seed);
  std::uint64_t init_seed() const { return init_seed_; }
  void set_init_seed(std::uint64_t s) { init_seed_ = s; }

  int weight_offset(int l) const { return offsets_[static_cast<size_t>(l)].first; }
  int bias_offset(int l) const { return offsets_[static_cast<size_t>(l)].second; }

 private:
  std::vector<LayerSpec> layers_;
  Activation act_;
  ScaleParams scale_;
  Vec params_;
  std::vector<std::pair<int, int>> offsets_;  // (weight, bias) offset per layer
  std::uint64_t init_seed_ = 0;
};

// Batched forward/reverse engine bound to one network. Forward passes keep
// the full trace, so a reverse pass may follow each forward with the adjoints
// of that batch. The engine never allocates after construction.
//
// A batch is a matrix whose columns are input points. Jets are propagated in
// channels: for input dimension m there are m gradient channels and
// m*(m+1)/2 upper-triangle Hessian channels per point.
class JetEvaluator {
 public:
  explicit JetEvaluator(const Network& net, int max_batch = 64);

  const Network& network() const { return *net_; }
  int max_batch() const { return max_batch_; }

  // --- forward -----------------------------------------------------------
  void forward_values(const Eigen::Ref<const Mat>& Z);
  void forward_jets(const Eigen::Ref<const Mat>& Z);
  int batch() const { return batch_; }

  double value(int p) const;  // after either forward
  Jet jet(int p) const;       // after forward_jets

  // Lean per-entry access for hot loops (no allocation, no bounds checks).
  double jet_grad(int p, int i) const {
    return net_->scale().output_factor() * Sd_.back()(0, p * nchan_ + i);
  }
  double jet_hess(int p, int i, int j) const {
    return net_->scale().output_factor() *
           Sd_.back()(0, p * nchan_ + m_ + tri_[static_cast<size_t>(i)][static_cast<size_t>(j)]);
  }

  // --- reverse -----------------------------------------------------------
  // Accumulates d(sum_p vbar[p] * value_p)/d(theta) into theta_grad, which
  // must have length param_count(). Valid after forward_values.
  void backward_values(const Eigen::Ref<const Vec>& vbar, Vec& theta_grad);

  // Accumulates the pullback of per-point jet adjoints into theta_grad.
  // adjoint[p].hess may be an arbitrary (not necessarily symmetric) matrix;
  // it acts on the symmetric Hessian output, i.e. entry (i,j) of the Hessian
  // receives adjoint (i,j) + (j,i) for i != j. Valid after forward_jets.
  void backward_jets(const std::vector<Jet>& adjoints, Vec& theta_grad);

 private:
  const Network* net_;
  int max_batch_;
  int m_;        // input dimension
  int npairs_;   // m*(m+1)/2
  int nchan_;    // m + npairs_
  int batch_ = 0;
  bool have_jets_ = false;

  std::vector<std::pair<int, int>> pairs_;  // channel -> (i,j), i <= j
  std::vector<std::vector<int>> tri_;       // (i,j) -> hessian channel

  Mat Zraw_;                 // raw input copy, for error reporting
  Mat X0v_, X0d_;            // scaled input values / channels
  std::vector<Mat> Sv_, Sd_; // pre-activation per layer
  std::vector<Mat> Xv_, Xd_; // post-activation per hidden layer
  Mat Av_, Ad_, Gv_, Gd_;    // reverse-pass ping-pong buffers
  Mat Gacc_;                 // per-point gradient-channel accumulators
  Eigen::ArrayXd d1_, d2_, d3_, acc_;

  void run_value_chain();
  void run_jet_chain();
  void check_finite(bool jets) const;
  void act_derivs(int layer, int p, int order);  // fills d1_ (, d2_, d3_)
};

// --- contract-level helpers -------------------------------------------------

double eval(const Network& net, const Vec& z);
Jet eval_jet(const Network& net, const Vec& z);

// Objective over the jets of a set of points: receives one jet per point,
// writes the adjoint of each jet, returns the objective value.
using JetObjective =
    std::function<double(const std::vector<Jet>&, std::vector<Jet>&)>;

// Evaluates the objective on the jets of `points` and accumulates its
// parameter gradient (computed in one reverse sweep, not by finite
// differences) into theta_grad. Returns the objective value.
double loss_param_grad(const Network& net, const std::vector<Vec>& points,
                       const JetObjective& objective, Vec& theta_grad);

// Mean over hidden units of
//   ( |a_i| * (|w_i|_1^3 + 2 |w_i|_1^2 |b_i| + |w_i|_1 b_i^2) )^2
// where w_i, b_i are the unit's incoming weights and bias and a_i is the
// l1 norm of its outgoing weights. For deeper networks the statistic is the
// mean of the per-hidden-layer values. Raw parameters only; the scale
// transform does not enter.
double param_magnitude_stat(const Network& net);

double max_abs_param(const Network& net);

}  // namespace msgreen::net
