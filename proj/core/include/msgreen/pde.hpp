#pragma once

// Differential operator descriptions, the Gaussian kernel-smoothing source
// term, the closed-form 1D kernel, and the pointwise operator residual
// applied to network jets.
//
// Networks take the feature vector psi(x,y) = (x, y, x-y) of length 3d, so
// derivatives with respect to x pick up chain-rule contributions through both
// the first and the third block; fold_to_x performs that folding.

#include "msgreen/common.hpp"
#include "msgreen/net.hpp"

#include <functional>
#include <string>

namespace msgreen::pde {

using ScalarField = std::function<double(const Vec&)>;
using VectorField = std::function<Vec(const Vec&)>;
using MatrixField = std::function<Mat(const Vec&)>;

// Gaussian approximation of the Dirac delta with width epsilon:
//   N_eps(x,y) = (1/(eps*sqrt(pi)))^d * exp(-|x-y|^2 / eps^2).
struct Mollifier {
  double epsilon = 1.0;

  explicit Mollifier(double eps) : epsilon(eps) {
    require(eps > 0.0 && eps <= 1.0, "Mollifier: epsilon must lie in (0, 1]");
  }
  double peak(int d) const;  // value at x == y
};

double mollifier_value(const Mollifier& m, const Vec& x, const Vec& y);

// Kernel of -u'' on [0,1] with homogeneous Dirichlet data:
// x*(1-y) for x < y, else y*(1-x).
double exact_green_1d(double x, double y);

// Feature vector (x, y, x-y), length 3d.
Vec feature_map(const Vec& x, const Vec& y);

// Second-order elliptic operator in one of two sign conventions:
//   divergence_form:  L u = div(A(x) grad u)
//                     (expanded: sum_ij A_ij d2_ij u + sum_j (div A)_j d_j u)
//   reaction_form:    L u = -Laplace(u) - c(x) u
struct OperatorSpec {
  enum class Kind { divergence_form, reaction_form };

  Kind kind = Kind::reaction_form;
  int dim = 1;
  MatrixField A;       // divergence_form only; symmetric d x d
  VectorField div_A;   // column-wise divergence of A, supplied analytically
  ScalarField c;       // reaction_form only
  std::string coeff_name;  // built-in coefficient name; used in manifests/caches

  static OperatorSpec reaction(int d, const std::string& c_name);
  static OperatorSpec reaction(int d, ScalarField c, std::string name = "custom");
  static OperatorSpec divergence(int d, const std::string& a_name);
  static OperatorSpec divergence(int d, MatrixField A, VectorField div_A,
                                 std::string name = "custom");
};

// Built-in reaction coefficients: zero, one, one_plus_x2 (1 + x_1^2),
// one_plus_r2 (1 + |x|^2).
ScalarField coefficient_from_name(const std::string& name);

// Finite-difference consistency check of op.div_A against op.A at `trials`
// random points in [-1,1]^d; throws ArgumentError beyond tol.
void spot_check_divergence(const OperatorSpec& op, std::uint64_t seed, int trials = 10,
                           double tol = 1e-6);

// Derivatives of phi(psi(x,y)) folded to plain x-derivatives.
struct XDerivatives {
  double value = 0.0;
  Vec grad;  // d
  Mat hess;  // d x d
};

XDerivatives fold_to_x(const net::Jet& jet, int d);

// L phi at x given folded derivatives.
double apply_operator(const OperatorSpec& op, const XDerivatives& dx, const Vec& x);

// L phi(x,y) - N_eps(x,y), where `jet` is the jet of phi at psi(x,y).
double residual(const OperatorSpec& op, const net::Jet& jet, const Vec& x, const Vec& y,
                const Mollifier& m);

// Convenience: evaluates the network jet internally.
double residual(const OperatorSpec& op, const net::Network& phi, const Vec& x, const Vec& y,
                const Mollifier& m);

// The residual is linear in the jet. Given rbar = d(loss)/d(residual) at
// (x,y), accumulates d(loss)/d(jet) into `adjoint` (a jet-shaped adjoint in
// feature coordinates, dimension 3d).
void residual_adjoint(const OperatorSpec& op, const Vec& x, double rbar, net::Jet& adjoint);

}  // namespace msgreen::pde
