#include "msgreen/quad.hpp"

#include "msgreen/pde.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>

using namespace msgreen;
using geom::Domain;

namespace {

// closed forms for the exactness checks
double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// int_{-1}^{1} x^k dx
double interval_monomial(int k) { return k % 2 ? 0.0 : 2.0 / (k + 1); }

// int over the reference triangle {x,y >= 0, x + y <= 1} of x^a y^b
double triangle_monomial(int a, int b) {
  return factorial(a) * factorial(b) / factorial(a + b + 2);
}

}  // namespace

TEST_SUITE_BEGIN("quad");

TEST_CASE("two-point Gauss rule is the textbook rule") {
  const quad::Rule1d r = quad::gauss_legendre(2);
  REQUIRE(r.nodes.size() == 2);
  CHECK(r.nodes[0] == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(r.nodes[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(r.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.weights[1] == doctest::Approx(1.0).epsilon(1e-15));
  const quad::Rule1d r3 = quad::gauss_legendre(3);
  CHECK(r3.nodes[1] == 0.0);  // odd rules pin the middle node exactly
}

TEST_CASE("Gauss-Legendre weights sum to the interval length") {
  for (int n = 1; n <= 20; ++n) {
    const quad::Rule1d r = quad::gauss_legendre(n);
    CHECK(r.weights.sum() == doctest::Approx(2.0).epsilon(1e-14));
    for (long i = 0; i + 1 < r.nodes.size(); ++i) CHECK(r.nodes[i] < r.nodes[i + 1]);
    // symmetric about zero
    for (long i = 0; i < r.nodes.size(); ++i)
      CHECK(r.nodes[i] == doctest::Approx(-r.nodes[r.nodes.size() - 1 - i]).epsilon(1e-15));
  }
  CHECK_THROWS_AS(quad::gauss_legendre(0), ArgumentError);
  CHECK_THROWS_AS(quad::gauss_legendre(21), ArgumentError);
}

TEST_CASE("Gauss-Legendre integrates monomials up to degree 2n-1") {
  for (int n = 1; n <= 10; ++n) {
    const quad::Rule1d r = quad::gauss_legendre(n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0.0;
      for (long i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], k);
      CHECK(std::abs(s - interval_monomial(k)) < 1e-12);
    }
  }
}

TEST_CASE("triangle rules integrate monomials up to their degree") {
  for (int deg = 1; deg <= 5; ++deg) {
    const quad::TriangleRule r = quad::dunavant(deg);
    CHECK(r.weights.sum() == doctest::Approx(0.5).epsilon(1e-14));
    for (int a = 0; a + 0 <= deg; ++a)
      for (int b = 0; a + b <= deg; ++b) {
        double s = 0.0;
        for (long q = 0; q < r.weights.size(); ++q)
          s += r.weights[q] * std::pow(r.points(0, q), a) * std::pow(r.points(1, q), b);
        CHECK(std::abs(s - triangle_monomial(a, b)) < 1e-12);
      }
  }
  CHECK_THROWS_AS(quad::dunavant(0), ArgumentError);
  CHECK_THROWS_AS(quad::dunavant(6), ArgumentError);
}

TEST_CASE("degree-2 triangle rule reproduces the quadratic moments") {
  const quad::TriangleRule r = quad::dunavant(2);
  double xx = 0.0, xy = 0.0, yy = 0.0;
  for (long q = 0; q < r.weights.size(); ++q) {
    xx += r.weights[q] * r.points(0, q) * r.points(0, q);
    xy += r.weights[q] * r.points(0, q) * r.points(1, q);
    yy += r.weights[q] * r.points(1, q) * r.points(1, q);
  }
  CHECK(xx == doctest::Approx(1.0 / 12).epsilon(1e-14));
  CHECK(xy == doctest::Approx(1.0 / 24).epsilon(1e-14));
  CHECK(yy == doctest::Approx(1.0 / 12).epsilon(1e-14));
}

TEST_CASE("quadrature mesh weight totals the domain measure") {
  for (auto [kind, target] : {std::pair{0, 64}, {1, 128}, {2, 400}}) {
    const Domain dom = kind == 0   ? Domain::interval(0.0, 2.0)
                       : kind == 1 ? Domain::rectangle(0.0, 1.0, 0.0, 1.0)
                                   : Domain::unit_circle();
    const geom::Mesh mesh = geom::coarse_mesh(dom, target);
    const quad::QuadratureMesh qm = quad::make_quadrature(mesh, 4, 3);
    double meshed = 0.0;
    for (int e = 0; e < mesh.element_count(); ++e) meshed += mesh.element_measure(e);
    CHECK(qm.weights.sum() == doctest::Approx(meshed).epsilon(1e-12));
    CHECK(qm.points.cols() == qm.weights.size());
    if (kind < 2) CHECK(qm.weights.sum() == doctest::Approx(dom.measure()).epsilon(1e-10));
  }
}

TEST_CASE("quadrature mesh integrates a polynomial exactly") {
  const Domain dom = Domain::rectangle(0.0, 1.0, 0.0, 1.0);
  const geom::Mesh mesh = geom::coarse_mesh(dom, 32);
  const quad::QuadratureMesh qm = quad::make_quadrature(mesh, 4, 3);
  double s = 0.0;
  for (long q = 0; q < qm.weights.size(); ++q) {
    const double x = qm.points(0, q), y = qm.points(1, q);
    s += qm.weights[q] * (x * x * y + 2 * y * y);  // integral = 1/6 + 2/3
  }
  CHECK(s == doctest::Approx(1.0 / 6 + 2.0 / 3).epsilon(1e-13));
}

TEST_CASE("boundary quadrature: interval endpoints") {
  const Domain dom = Domain::interval(0.0, 1.0);
  const quad::BoundaryQuadrature bq = quad::boundary_quadrature(dom, 4, 4);
  REQUIRE(bq.weights.size() == 2);
  CHECK(bq.weights.sum() == 2.0);
  CHECK(bq.normals(0, 0) == -1.0);
  CHECK(bq.normals(0, 1) == 1.0);
  CHECK(bq.points(0, 0) == 0.0);
  CHECK(bq.points(0, 1) == 1.0);
}

TEST_CASE("boundary quadrature: rectangle perimeter and outward normals") {
  const Domain dom = Domain::rectangle(0.0, 2.0, 0.0, 1.0);
  const quad::BoundaryQuadrature bq = quad::boundary_quadrature(dom, 8, 3);
  CHECK(bq.weights.sum() == doctest::Approx(6.0).epsilon(1e-12));
  for (long q = 0; q < bq.weights.size(); ++q) {
    Vec p = bq.points.col(q);
    CHECK(dom.on_boundary(p));
    Vec out = p + 1e-8 * bq.normals.col(q);
    CHECK(!dom.contains(out));
  }
}

TEST_CASE("boundary quadrature: circle circumference and radial normals") {
  const Domain dom = Domain::unit_circle();
  const quad::BoundaryQuadrature bq = quad::boundary_quadrature(dom, 64, 4);
  CHECK(bq.weights.sum() == doctest::Approx(2 * std::numbers::pi).epsilon(1e-8));
  for (long q = 0; q < bq.weights.size(); ++q) {
    CHECK(bq.points.col(q).norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((bq.normals.col(q) - bq.points.col(q)).norm() < 1e-12);
  }
  // integrates x^2 over the circle: pi
  double s = 0.0;
  for (long q = 0; q < bq.weights.size(); ++q)
    s += bq.weights[q] * bq.points(0, q) * bq.points(0, q);
  CHECK(s == doctest::Approx(std::numbers::pi).epsilon(1e-8));
}

TEST_CASE("kernel solve reproduces u(x) = x(1-x) for f = 2") {
  const Domain dom = Domain::interval(0.0, 1.0);
  const geom::Mesh fine = geom::coarse_mesh(dom, 200);
  const quad::QuadratureMesh qm = quad::make_quadrature(fine, 4, 3);
  const quad::Kernel G = [](const Vec& x, const Vec& y) {
    return pde::exact_green_1d(x[0], y[0]);
  };
  Mat X(1, 5);
  X << 0.1, 0.25, 0.5, 0.75, 0.9;
  const Vec u = quad::solve_with_green(G, [](const Vec&) { return 2.0; }, qm, X);
  for (long i = 0; i < X.cols(); ++i)
    CHECK(u[i] == doctest::Approx(X(0, i) * (1 - X(0, i))).epsilon(1e-6));
  CHECK(u[2] == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("kernel solve is linear in the source") {
  const Domain dom = Domain::interval(0.0, 1.0);
  const quad::QuadratureMesh qm = quad::make_quadrature(geom::coarse_mesh(dom, 64), 3, 3);
  const quad::Kernel G = [](const Vec& x, const Vec& y) {
    return pde::exact_green_1d(x[0], y[0]);
  };
  const quad::ScalarFn f1 = [](const Vec& y) { return std::sin(3 * y[0]); };
  const quad::ScalarFn f2 = [](const Vec& y) { return y[0] * y[0]; };
  const quad::ScalarFn fsum = [&](const Vec& y) { return f1(y) + 2.0 * f2(y); };
  Mat X(1, 3);
  X << 0.2, 0.5, 0.8;
  const Vec a = quad::solve_with_green(G, f1, qm, X);
  const Vec b = quad::solve_with_green(G, f2, qm, X);
  const Vec s = quad::solve_with_green(G, fsum, qm, X);
  CHECK((s - (a + 2.0 * b)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("boundary term of the representation formula") {
  // For L = -u'' on [0,1] with G the exact kernel, u(x) = x solves Lu = 0
  // with u(0)=0, u(1)=1; the representation reduces to the boundary integral
  //   u(x) = -sum_b g2(b) * dG/dy(x, b) * n(b)
  const Domain dom = Domain::interval(0.0, 1.0);
  const quad::BoundaryQuadrature bq = quad::boundary_quadrature(dom, 1, 1);
  const quad::KernelGradY dG = [](const Vec& x, const Vec& y) {
    Vec g(1);
    g[0] = y[0] < x[0] ? 1.0 - x[0] : -x[0];  // d/dy of the exact kernel
    return g;
  };
  const quad::ScalarFn g2 = [](const Vec& y) { return y[0]; };  // boundary data u = x
  Mat X(1, 3);
  X << 0.25, 0.5, 0.75;
  // representation: u = volume term (zero here) - boundary term
  const Vec u = -quad::boundary_term(dG, g2, {}, bq, X);
  for (long i = 0; i < X.cols(); ++i)
    CHECK(u[i] == doctest::Approx(X(0, i)).epsilon(1e-12));
}

TEST_SUITE_END();
