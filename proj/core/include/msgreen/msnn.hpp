#pragma once

// Two-scale composite kernel model: a large-scale component with an active
// scale transform (epsilon^alpha * mlp(z/epsilon^beta)) plus a small-scale
// component with the identity transform. Both act on the feature vector
// psi(x,y) = (x, y, x-y).

#include "msgreen/common.hpp"
#include "msgreen/net.hpp"
#include "msgreen/pde.hpp"

#include <vector>

namespace msgreen::msnn {

// Exponent heuristic keeping the large component's operator response at the
// mollifier-peak magnitude eps^{-d}.
double default_alpha(int d);

struct MsNet {
  net::Network large;
  net::Network small;
  int dim = 1;
};

// Builds the pair with the large component scaled by (epsilon, alpha, beta)
// and the small component unscaled. alpha = NaN selects default_alpha(d).
// Component initializations derive from `seed` deterministically.
MsNet make_msnet(int d, double epsilon, const std::vector<int>& large_hidden,
                 const std::vector<int>& small_hidden, net::Activation act,
                 std::uint64_t seed, double alpha = std::numeric_limits<double>::quiet_NaN(),
                 double beta = 1.0);

// Jet of the composite with respect to x (chain rule through psi folded in),
// plus the swapped-order value used by the symmetry penalty.
struct MsJet {
  double value = 0.0;
  Vec grad_x;
  Mat hess_x;
  double value_swapped = 0.0;
};

double ms_eval(const MsNet& ms, const Vec& x, const Vec& y);
MsJet ms_jet(const MsNet& ms, const Vec& x, const Vec& y);

// Gradient of the composite with respect to y (for boundary-flux integrals).
Vec ms_grad_y(const MsNet& ms, const Vec& x, const Vec& y);

// Reusable evaluator (owns per-component engines; no allocation per call).
class KernelEvaluator {
 public:
  explicit KernelEvaluator(const MsNet& ms);
  double value(const Vec& x, const Vec& y);
  MsJet jet(const Vec& x, const Vec& y);
  Vec grad_y(const Vec& x, const Vec& y);

 private:
  const MsNet* ms_;
  net::JetEvaluator large_, small_;
};

}  // namespace msgreen::msnn
