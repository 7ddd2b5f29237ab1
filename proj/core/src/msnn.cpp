#include "msgreen/msnn.hpp"

#include <cmath>

namespace msgreen::msnn {

double default_alpha(int d) {
  require(d == 1 || d == 2, "default_alpha: d must be 1 or 2");
  return 2.0 - d;
}

MsNet make_msnet(int d, double epsilon, const std::vector<int>& large_hidden,
                 const std::vector<int>& small_hidden, net::Activation act,
                 std::uint64_t seed, double alpha, double beta) {
  require(d == 1 || d == 2, "make_msnet: d must be 1 or 2");
  if (std::isnan(alpha)) alpha = default_alpha(d);
  net::ScaleParams scale{epsilon, alpha, beta};
  MsNet ms{net::Network::mlp(3 * d, large_hidden, act, scale),
           net::Network::mlp(3 * d, small_hidden, act), d};
  // distinct deterministic streams so the components do not start identical
  ms.large.init_uniform(seed);
  ms.small.init_uniform(splitmix64(seed ^ 0x6d736e6e736d6cULL));
  return ms;
}

KernelEvaluator::KernelEvaluator(const MsNet& ms)
    : ms_(&ms), large_(ms.large, 1), small_(ms.small, 1) {
  require(ms.large.input_dim() == 3 * ms.dim && ms.small.input_dim() == 3 * ms.dim,
          "KernelEvaluator: component input dims must equal 3d");
}

double KernelEvaluator::value(const Vec& x, const Vec& y) {
  const Vec z = pde::feature_map(x, y);
  large_.forward_values(z);
  small_.forward_values(z);
  return large_.value(0) + small_.value(0);
}

MsJet KernelEvaluator::jet(const Vec& x, const Vec& y) {
  const int d = ms_->dim;
  const Vec zf = pde::feature_map(x, y);
  const Vec zs = pde::feature_map(y, x);
  MsJet out;
  out.grad_x = Vec::Zero(d);
  out.hess_x = Mat::Zero(d, d);
  for (net::JetEvaluator* ev : {&large_, &small_}) {
    ev->forward_jets(zf);
    const net::Jet j = ev->jet(0);
    const pde::XDerivatives dx = pde::fold_to_x(j, d);
    out.value += dx.value;
    out.grad_x += dx.grad;
    out.hess_x += dx.hess;
    ev->forward_values(zs);
    out.value_swapped += ev->value(0);
  }
  return out;
}

Vec KernelEvaluator::grad_y(const Vec& x, const Vec& y) {
  const int d = ms_->dim;
  const Vec zf = pde::feature_map(x, y);
  Vec g = Vec::Zero(d);
  for (net::JetEvaluator* ev : {&large_, &small_}) {
    ev->forward_jets(zf);
    const net::Jet j = ev->jet(0);
    // y enters through the middle block directly and the last block negated
    for (int i = 0; i < d; ++i) g[i] += j.grad[d + i] - j.grad[2 * d + i];
  }
  return g;
}

double ms_eval(const MsNet& ms, const Vec& x, const Vec& y) {
  return KernelEvaluator(ms).value(x, y);
}

MsJet ms_jet(const MsNet& ms, const Vec& x, const Vec& y) {
  return KernelEvaluator(ms).jet(x, y);
}

Vec ms_grad_y(const MsNet& ms, const Vec& x, const Vec& y) {
  return KernelEvaluator(ms).grad_y(x, y);
}

}  // namespace msgreen::msnn
