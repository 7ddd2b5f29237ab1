#include "msgreen/pde.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

using namespace msgreen;
using pde::Mollifier;
using pde::OperatorSpec;

TEST_SUITE_BEGIN("pde");

TEST_CASE("mollifier peak values") {
  const double rpi = std::sqrt(std::numbers::pi);
  CHECK(Mollifier(0.01).peak(1) == doctest::Approx(100.0 / rpi).epsilon(1e-14));
  CHECK(Mollifier(1.0).peak(2) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-14));
  Vec y(1);
  y[0] = 0.4;
  CHECK(pde::mollifier_value(Mollifier(0.01), y, y) ==
        doctest::Approx(100.0 / rpi).epsilon(1e-14));
}

TEST_CASE("mollifier integrates to one") {
  // trapezoid over [y - 8 eps, y + 8 eps]; the tail beyond is < 1e-28
  for (double eps : {1.0, 0.1, 0.01}) {
    const Mollifier m(eps);
    Vec y(1), x(1);
    y[0] = 0.3;
    const int n = 4000;
    const double lo = y[0] - 8 * eps, hi = y[0] + 8 * eps, h = (hi - lo) / n;
    double mass = 0.0;
    for (int i = 0; i <= n; ++i) {
      x[0] = lo + i * h;
      const double w = (i == 0 || i == n) ? 0.5 : 1.0;
      mass += w * h * pde::mollifier_value(m, x, y);
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("mollifier is radial in x - y") {
  const Mollifier m(0.25);
  // Dyadic coordinates keep x - y exact under translation, so the value must
  // agree bit for bit between the two pairs.
  Vec x(2), y(2);
  x << 0.125, 0.375;
  y << 0.25, 0.125;
  Vec xs(2), ys(2);
  xs << 0.625, 0.875;
  ys << 0.75, 0.625;  // same offset, shifted by 0.5
  CHECK(pde::mollifier_value(m, x, y) == pde::mollifier_value(m, xs, ys));
  CHECK(pde::mollifier_value(m, x, y) == pde::mollifier_value(m, y, x));
}

TEST_CASE("mollifier rejects epsilon outside (0, 1]") {
  CHECK_THROWS_AS(Mollifier(0.0), ArgumentError);
  CHECK_THROWS_AS(Mollifier(-0.5), ArgumentError);
  CHECK_THROWS_AS(Mollifier(1.5), ArgumentError);
}

TEST_CASE("exact interval kernel") {
  CHECK(pde::exact_green_1d(0.3, 0.5) == 0.3 * (1 - 0.5));
  CHECK(pde::exact_green_1d(0.5, 0.5) == 0.25);
  CHECK(pde::exact_green_1d(0.7, 0.5) == 0.5 * (1 - 0.7));
  CHECK(pde::exact_green_1d(0.0, 0.5) == 0.0);
  CHECK(pde::exact_green_1d(1.0, 0.5) == 0.0);
  // symmetry
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const double a = u01(rng), b = u01(rng);
    CHECK(pde::exact_green_1d(a, b) == pde::exact_green_1d(b, a));
  }
}

TEST_CASE("feature map stacks (x, y, x - y)") {
  Vec x(2), y(2);
  x << 1.0, 2.0;
  y << 0.25, -1.0;
  const Vec z = pde::feature_map(x, y);
  REQUIRE(z.size() == 6);
  CHECK(z[0] == 1.0);
  CHECK(z[1] == 2.0);
  CHECK(z[2] == 0.25);
  CHECK(z[3] == -1.0);
  CHECK(z[4] == 0.75);
  CHECK(z[5] == 3.0);
}

TEST_CASE("fold_to_x matches finite differences through the feature map") {
  std::mt19937_64 rng(3);
  for (int d : {1, 2}) {
    net::Network phi = net::Network::mlp(3 * d, {10}, net::Activation::tanh);
    phi.init_uniform(rng());
    Vec x(d), y(d);
    for (int i = 0; i < d; ++i) {
      x[i] = u01(rng);
      y[i] = u01(rng);
    }
    auto g = [&](const Vec& xx) { return net::eval(phi, pde::feature_map(xx, y)); };
    const pde::XDerivatives dx = pde::fold_to_x(net::eval_jet(phi, pde::feature_map(x, y)), d);
    CHECK(dx.value == g(x));
    const double h = 1e-5;
    for (int i = 0; i < d; ++i) {
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      CHECK(dx.grad[i] == doctest::Approx((g(xp) - g(xm)) / (2 * h)).epsilon(1e-6));
      CHECK(dx.hess(i, i) ==
            doctest::Approx((g(xp) - 2 * g(x) + g(xm)) / (h * h)).epsilon(1e-4));
    }
    if (d == 2) {
      Vec xpp = x, xpm = x, xmp = x, xmm = x;
      xpp[0] += h; xpp[1] += h;
      xpm[0] += h; xpm[1] -= h;
      xmp[0] -= h; xmp[1] += h;
      xmm[0] -= h; xmm[1] -= h;
      const double fd = (g(xpp) - g(xpm) - g(xmp) + g(xmm)) / (4 * h * h);
      CHECK(dx.hess(0, 1) == doctest::Approx(fd).epsilon(1e-4));
      // symmetric up to summation order of the feature-block contributions
      CHECK(std::abs(dx.hess(0, 1) - dx.hess(1, 0)) < 1e-15);
    }
  }
}

TEST_CASE("reaction operator on a quadratic") {
  // u(x) = x1^2, c = 1 + x1^2: L u = -2 - (1 + x1^2) x1^2
  OperatorSpec op = OperatorSpec::reaction(1, "one_plus_x2");
  pde::XDerivatives dx;
  dx.grad = Vec::Zero(1);
  dx.hess = Mat::Zero(1, 1);
  Vec x(1);
  x[0] = 0.5;
  dx.value = 0.25;
  dx.grad[0] = 1.0;
  dx.hess(0, 0) = 2.0;
  CHECK(pde::apply_operator(op, dx, x) ==
        doctest::Approx(-2.0 - (1.0 + 0.25) * 0.25).epsilon(1e-15));
}

TEST_CASE("divergence operator with identity coefficient is the Laplacian") {
  OperatorSpec op = OperatorSpec::divergence(2, "identity");
  pde::XDerivatives dx;
  dx.value = 3.0;
  dx.grad = Vec::Zero(2);
  dx.grad << 5.0, -1.0;
  dx.hess = Mat::Zero(2, 2);
  dx.hess(0, 0) = 2.0;
  dx.hess(1, 1) = -7.0;
  dx.hess(0, 1) = dx.hess(1, 0) = 4.0;  // off-diagonals must not enter
  Vec x(2);
  x << 0.3, 0.4;
  CHECK(pde::apply_operator(op, dx, x) == doctest::Approx(-5.0).epsilon(1e-15));
}

TEST_CASE("built-in coefficients") {
  Vec x(2);
  x << 0.5, 2.0;
  CHECK(pde::coefficient_from_name("zero")(x) == 0.0);
  CHECK(pde::coefficient_from_name("one")(x) == 1.0);
  CHECK(pde::coefficient_from_name("one_plus_x2")(x) == 1.25);
  CHECK(pde::coefficient_from_name("one_plus_r2")(x) == 1.0 + 0.25 + 4.0);
  CHECK_THROWS_AS(pde::coefficient_from_name("nope"), ArgumentError);
}

TEST_CASE("divergence spot check accepts identity and rejects a wrong div") {
  OperatorSpec ok = OperatorSpec::divergence(2, "identity");
  CHECK_NOTHROW(pde::spot_check_divergence(ok, 5));
  OperatorSpec bad = OperatorSpec::divergence(
      2, [](const Vec&) { return Mat::Identity(2, 2); },
      [](const Vec&) { Vec v(2); v << 1.0, 0.0; return v; }, "broken");
  CHECK_THROWS_AS(pde::spot_check_divergence(bad, 5), ArgumentError);
}

TEST_CASE("residual at x = y with zero network equals minus the mollifier peak") {
  const Mollifier m(0.01);
  OperatorSpec op = OperatorSpec::reaction(1, "zero");
  net::Network phi = net::Network::mlp(3, {4}, net::Activation::tanh);
  phi.params().setZero();
  Vec y(1);
  y[0] = 0.4;
  const double r = pde::residual(op, phi, y, y, m);
  CHECK(r == doctest::Approx(-100.0 / std::sqrt(std::numbers::pi)).epsilon(1e-14));
  // squared residual is the frozen interior loss for one coincident pair
  CHECK(r * r == doctest::Approx(1e4 / std::numbers::pi).epsilon(1e-14));
}

TEST_CASE("residual is linear in the jet") {
  std::mt19937_64 rng(9);
  OperatorSpec op = OperatorSpec::reaction(1, "one_plus_x2");
  const Mollifier m(0.1);
  Vec x(1), y(1);
  x[0] = 0.3;
  y[0] = 0.6;
  net::Jet a = net::Jet::zero(3), b = net::Jet::zero(3);
  a.value = u01(rng);
  b.value = u01(rng);
  for (int i = 0; i < 3; ++i) {
    a.grad[i] = u01(rng);
    b.grad[i] = u01(rng);
    for (int j = 0; j < 3; ++j) {
      a.hess(i, j) = u01(rng);
      b.hess(i, j) = u01(rng);
    }
  }
  a.hess = (a.hess + a.hess.transpose()).eval();
  b.hess = (b.hess + b.hess.transpose()).eval();
  net::Jet sum = net::Jet::zero(3);
  sum.value = a.value + 2 * b.value;
  sum.grad = a.grad + 2 * b.grad;
  sum.hess = a.hess + 2 * b.hess;
  const double N = pde::mollifier_value(m, x, y);
  const double ra = pde::residual(op, a, x, y, m) + N;
  const double rb = pde::residual(op, b, x, y, m) + N;
  const double rs = pde::residual(op, sum, x, y, m) + N;
  CHECK(rs == doctest::Approx(ra + 2 * rb).epsilon(1e-12));
}

TEST_CASE("residual_adjoint is the transpose of the residual's jet dependence") {
  std::mt19937_64 rng(15);
  for (const auto& op :
       {OperatorSpec::reaction(2, "one_plus_r2"), OperatorSpec::divergence(2, "identity")}) {
    Vec x(2), y(2);
    x << 0.2, -0.1;
    y << 0.4, 0.3;
    const Mollifier m(0.5);
    const double rbar = 1.7;
    net::Jet adj = net::Jet::zero(6);
    pde::residual_adjoint(op, x, rbar, adj);

    // <adj, J> must equal rbar * (residual(J) - residual(0)) for any jet J
    net::Jet J = net::Jet::zero(6);
    J.value = u01(rng);
    for (int i = 0; i < 6; ++i) {
      J.grad[i] = u01(rng);
      for (int j = 0; j < 6; ++j) J.hess(i, j) = u01(rng);
    }
    J.hess = (0.5 * (J.hess + J.hess.transpose())).eval();
    const net::Jet zero = net::Jet::zero(6);
    const double dr = pde::residual(op, J, x, y, m) - pde::residual(op, zero, x, y, m);

    double pairing = adj.value * J.value + adj.grad.dot(J.grad);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) pairing += adj.hess(i, j) * J.hess(i, j);
    CHECK(pairing == doctest::Approx(rbar * dr).epsilon(1e-12));
  }
}

TEST_SUITE_END();
