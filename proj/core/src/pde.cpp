#include "msgreen/pde.hpp"

#include <cmath>

namespace msgreen::pde {

namespace {
constexpr double kSqrtPi = 1.7724538509055160273;
}

double Mollifier::peak(int d) const {
  return std::pow(1.0 / (epsilon * kSqrtPi), d);
}

double mollifier_value(const Mollifier& m, const Vec& x, const Vec& y) {
  if (x.size() != y.size()) throw ShapeError("mollifier_value: dim(x) != dim(y)");
  const int d = static_cast<int>(x.size());
  const double r2 = (x - y).squaredNorm();
  return m.peak(d) * std::exp(-r2 / (m.epsilon * m.epsilon));
}

double exact_green_1d(double x, double y) {
  return x < y ? x * (1.0 - y) : y * (1.0 - x);
}

Vec feature_map(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) throw ShapeError("feature_map: dim(x) != dim(y)");
  const int d = static_cast<int>(x.size());
  Vec z(3 * d);
  z.head(d) = x;
  z.segment(d, d) = y;
  z.tail(d) = x - y;
  return z;
}

ScalarField coefficient_from_name(const std::string& name) {
  if (name == "zero") return [](const Vec&) { return 0.0; };
  if (name == "one") return [](const Vec&) { return 1.0; };
  if (name == "one_plus_x2") return [](const Vec& x) { return 1.0 + x[0] * x[0]; };
  if (name == "one_plus_r2") return [](const Vec& x) { return 1.0 + x.squaredNorm(); };
  throw ArgumentError("unknown coefficient '" + name + "'");
}

OperatorSpec OperatorSpec::reaction(int d, const std::string& c_name) {
  OperatorSpec op;
  op.kind = Kind::reaction_form;
  op.dim = d;
  op.c = coefficient_from_name(c_name);
  op.coeff_name = c_name;
  return op;
}

OperatorSpec OperatorSpec::reaction(int d, ScalarField c, std::string name) {
  OperatorSpec op;
  op.kind = Kind::reaction_form;
  op.dim = d;
  op.c = std::move(c);
  op.coeff_name = std::move(name);
  return op;
}

OperatorSpec OperatorSpec::divergence(int d, const std::string& a_name) {
  if (a_name != "identity")
    throw ArgumentError("unknown coefficient matrix '" + a_name + "'");
  OperatorSpec op;
  op.kind = Kind::divergence_form;
  op.dim = d;
  op.A = [d](const Vec&) { return Mat(Mat::Identity(d, d)); };
  op.div_A = [d](const Vec&) { return Vec(Vec::Zero(d)); };
  op.coeff_name = a_name;
  return op;
}

OperatorSpec OperatorSpec::divergence(int d, MatrixField A, VectorField div_A,
                                      std::string name) {
  OperatorSpec op;
  op.kind = Kind::divergence_form;
  op.dim = d;
  op.A = std::move(A);
  op.div_A = std::move(div_A);
  op.coeff_name = std::move(name);
  return op;
}

void spot_check_divergence(const OperatorSpec& op, std::uint64_t seed, int trials,
                           double tol) {
  require(op.kind == OperatorSpec::Kind::divergence_form,
          "spot_check_divergence: operator is not in divergence form");
  const int d = op.dim;
  std::mt19937_64 rng(seed);
  const double h = 1e-5;
  for (int t = 0; t < trials; ++t) {
    Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = uniform(rng, -1.0, 1.0);
    const Vec stated = op.div_A(x);
    for (int j = 0; j < d; ++j) {
      double fd = 0.0;
      for (int i = 0; i < d; ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        fd += (op.A(xp)(i, j) - op.A(xm)(i, j)) / (2.0 * h);
      }
      if (std::abs(fd - stated[j]) > tol * std::max(1.0, std::abs(stated[j])))
        throw ArgumentError("spot_check_divergence: stated div(A) column " +
                            std::to_string(j) + " disagrees with finite differences");
    }
  }
}

XDerivatives fold_to_x(const net::Jet& jet, int d) {
  if (jet.grad.size() != 3 * d)
    throw ShapeError("fold_to_x: jet dimension is not 3d");
  XDerivatives out;
  out.value = jet.value;
  out.grad.resize(d);
  out.hess.resize(d, d);
  // d/dx_i = d/dz_i + d/dz_{2d+i}: x enters the feature vector through the
  // first block directly and through the (x - y) block.
  for (int i = 0; i < d; ++i) out.grad[i] = jet.grad[i] + jet.grad[2 * d + i];
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      out.hess(i, j) = jet.hess(i, j) + jet.hess(i, 2 * d + j) +
                       jet.hess(2 * d + i, j) + jet.hess(2 * d + i, 2 * d + j);
  return out;
}

double apply_operator(const OperatorSpec& op, const XDerivatives& dx, const Vec& x) {
  const int d = op.dim;
  if (static_cast<int>(x.size()) != d) throw ShapeError("apply_operator: dim(x) != d");
  if (op.kind == OperatorSpec::Kind::reaction_form) {
    return -dx.hess.trace() - op.c(x) * dx.value;
  }
  const Mat A = op.A(x);
  const Vec divA = op.div_A(x);
  double acc = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) acc += A(i, j) * dx.hess(i, j);
  acc += divA.dot(dx.grad);
  return acc;
}

double residual(const OperatorSpec& op, const net::Jet& jet, const Vec& x, const Vec& y,
                const Mollifier& m) {
  return apply_operator(op, fold_to_x(jet, op.dim), x) - mollifier_value(m, x, y);
}

double residual(const OperatorSpec& op, const net::Network& phi, const Vec& x, const Vec& y,
                const Mollifier& m) {
  return residual(op, net::eval_jet(phi, feature_map(x, y)), x, y, m);
}

void residual_adjoint(const OperatorSpec& op, const Vec& x, double rbar, net::Jet& adjoint) {
  const int d = op.dim;
  if (adjoint.grad.size() != 3 * d || adjoint.hess.rows() != 3 * d)
    throw ShapeError("residual_adjoint: adjoint dimension is not 3d");
  if (op.kind == OperatorSpec::Kind::reaction_form) {
    adjoint.value += -rbar * op.c(x);
    // hess_x(i,i) folds four feature-Hessian entries, each with weight 1
    for (int i = 0; i < d; ++i) {
      adjoint.hess(i, i) += -rbar;
      adjoint.hess(i, 2 * d + i) += -rbar;
      adjoint.hess(2 * d + i, i) += -rbar;
      adjoint.hess(2 * d + i, 2 * d + i) += -rbar;
    }
    return;
  }
  const Mat A = op.A(x);
  const Vec divA = op.div_A(x);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const double w = rbar * A(i, j);
      adjoint.hess(i, j) += w;
      adjoint.hess(i, 2 * d + j) += w;
      adjoint.hess(2 * d + i, j) += w;
      adjoint.hess(2 * d + i, 2 * d + j) += w;
    }
  for (int j = 0; j < d; ++j) {
    adjoint.grad[j] += rbar * divA[j];
    adjoint.grad[2 * d + j] += rbar * divA[j];
  }
}

}  // namespace msgreen::pde
