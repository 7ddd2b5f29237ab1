#include "msgreen/quad.hpp"

#include "msgreen/parallel.hpp"

#include <cmath>
#include <numbers>

namespace msgreen::quad {

Rule1d gauss_legendre(int n) {
  require(n >= 1 && n <= 20, "gauss_legendre: n must lie in [1, 20]");
  Rule1d r;
  r.nodes = Vec::Zero(n);
  r.weights = Vec::Zero(n);

  // Legendre value and derivative by the three-term recurrence
  auto legendre = [n](double t, double& pn, double& dpn) {
    double p0 = 1.0, p1 = t;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    pn = n == 0 ? 1.0 : p1;
    dpn = n == 0 ? 0.0 : n * (t * p1 - p0) / (t * t - 1.0);
  };

  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pn = 0.0, dpn = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      legendre(t, pn, dpn);
      const double dt = pn / dpn;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    if (i == n - 1 - i) t = 0.0;  // odd n: the middle root is exact
    legendre(t, pn, dpn);
    const double w = 2.0 / ((1.0 - t * t) * dpn * dpn);
    r.nodes[i] = -t;  // i counts roots from the largest, so -t ascends
    r.nodes[n - 1 - i] = t;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  return r;
}

TriangleRule dunavant(int degree) {
  require(degree >= 1 && degree <= 5, "dunavant: degree must lie in [1, 5]");
  std::vector<Eigen::Vector2d> pts;
  std::vector<double> wts;  // unit-sum weights; scaled by the area 1/2 below
  auto centroid = [&](double w) {
    pts.emplace_back(1.0 / 3.0, 1.0 / 3.0);
    wts.push_back(w);
  };
  // the orbit of barycentric (a, b, b) under coordinate rotation
  auto orbit3 = [&](double w, double a, double b) {
    pts.emplace_back(b, b);
    pts.emplace_back(a, b);
    pts.emplace_back(b, a);
    wts.insert(wts.end(), 3, w);
  };

  switch (degree) {
    case 1:
      centroid(1.0);
      break;
    case 2:
      orbit3(1.0 / 3.0, 2.0 / 3.0, 1.0 / 6.0);
      break;
    case 3:
      centroid(-27.0 / 48.0);
      orbit3(25.0 / 48.0, 3.0 / 5.0, 1.0 / 5.0);
      break;
    case 4:
    case 5: {
      const double s = std::sqrt(15.0);
      centroid(9.0 / 40.0);
      orbit3((155.0 + s) / 1200.0, (9.0 - 2.0 * s) / 21.0, (6.0 + s) / 21.0);
      orbit3((155.0 - s) / 1200.0, (9.0 + 2.0 * s) / 21.0, (6.0 - s) / 21.0);
      break;
    }
  }

  TriangleRule r;
  const int n = static_cast<int>(pts.size());
  r.points.resize(2, n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    r.points.col(i) = pts[static_cast<size_t>(i)];
    r.weights[i] = 0.5 * wts[static_cast<size_t>(i)];
  }
  return r;
}

QuadratureMesh make_quadrature(const geom::Mesh& mesh, int gl_points, int degree) {
  QuadratureMesh qm;
  const long ne = mesh.element_count();
  require(ne > 0, "make_quadrature: empty mesh");
  if (mesh.dim == 1) {
    const Rule1d r = gauss_legendre(gl_points);
    const int npe = gl_points;
    qm.points.resize(1, ne * npe);
    qm.weights.resize(ne * npe);
    qm.element.resize(static_cast<size_t>(ne * npe));
    for (long e = 0; e < ne; ++e) {
      const double a = mesh.vertices(0, mesh.elements[static_cast<size_t>(e)][0]);
      const double b = mesh.vertices(0, mesh.elements[static_cast<size_t>(e)][1]);
      const double mid = 0.5 * (a + b), h2 = 0.5 * (b - a);
      for (int j = 0; j < npe; ++j) {
        qm.points(0, e * npe + j) = mid + h2 * r.nodes[j];
        qm.weights[e * npe + j] = std::abs(h2) * r.weights[j];
        qm.element[static_cast<size_t>(e * npe + j)] = e;
      }
    }
  } else {
    const TriangleRule r = dunavant(degree);
    const int npe = static_cast<int>(r.weights.size());
    qm.points.resize(2, ne * npe);
    qm.weights.resize(ne * npe);
    qm.element.resize(static_cast<size_t>(ne * npe));
    for (long e = 0; e < ne; ++e) {
      const auto& el = mesh.elements[static_cast<size_t>(e)];
      const Eigen::Vector2d v0 = mesh.vertices.col(el[0]);
      Eigen::Matrix2d J;
      J.col(0) = Eigen::Vector2d(mesh.vertices.col(el[1])) - v0;
      J.col(1) = Eigen::Vector2d(mesh.vertices.col(el[2])) - v0;
      const double area = mesh.element_measure(e);
      for (int j = 0; j < npe; ++j) {
        qm.points.col(e * npe + j) = v0 + J * r.points.col(j);
        qm.weights[e * npe + j] = 2.0 * area * r.weights[j];
        qm.element[static_cast<size_t>(e * npe + j)] = e;
      }
    }
  }
  return qm;
}

BoundaryQuadrature boundary_quadrature(const geom::Domain& dom, int panels, int gl_points) {
  require(panels >= 1, "boundary_quadrature: panels must be >= 1");
  BoundaryQuadrature bq;
  if (dom.kind == geom::Domain::Kind::interval) {
    bq.points.resize(1, 2);
    bq.points(0, 0) = dom.a;
    bq.points(0, 1) = dom.b;
    bq.weights = Vec::Ones(2);  // counting measure on the two endpoints
    bq.normals.resize(1, 2);
    bq.normals(0, 0) = -1.0;
    bq.normals(0, 1) = 1.0;
    return bq;
  }

  const Rule1d r = gauss_legendre(gl_points);
  if (dom.kind == geom::Domain::Kind::rectangle) {
    struct Edge {
      Eigen::Vector2d from, to, normal;
    };
    const std::vector<Edge> edges = {
        {{dom.ax, dom.ay}, {dom.bx, dom.ay}, {0.0, -1.0}},
        {{dom.bx, dom.ay}, {dom.bx, dom.by}, {1.0, 0.0}},
        {{dom.bx, dom.by}, {dom.ax, dom.by}, {0.0, 1.0}},
        {{dom.ax, dom.by}, {dom.ax, dom.ay}, {-1.0, 0.0}},
    };
    const long nq = 4L * panels * gl_points;
    bq.points.resize(2, nq);
    bq.weights.resize(nq);
    bq.normals.resize(2, nq);
    long k = 0;
    for (const auto& edge : edges) {
      const Eigen::Vector2d step = (edge.to - edge.from) / panels;
      const double half_len = step.norm() / 2.0;
      for (int p = 0; p < panels; ++p) {
        const Eigen::Vector2d mid = edge.from + (p + 0.5) * step;
        for (int j = 0; j < gl_points; ++j, ++k) {
          bq.points.col(k) = mid + 0.5 * r.nodes[j] * step;
          bq.weights[k] = half_len * r.weights[j];
          bq.normals.col(k) = edge.normal;
        }
      }
    }
    return bq;
  }

  // unit circle: Gauss-Legendre panels in the angle
  const long nq = static_cast<long>(panels) * gl_points;
  bq.points.resize(2, nq);
  bq.weights.resize(nq);
  bq.normals.resize(2, nq);
  const double arc = 2.0 * std::numbers::pi / panels;
  long k = 0;
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * arc;
    for (int j = 0; j < gl_points; ++j, ++k) {
      const double theta = mid + 0.5 * arc * r.nodes[j];
      bq.points.col(k) = Eigen::Vector2d(std::cos(theta), std::sin(theta));
      bq.weights[k] = 0.5 * arc * r.weights[j];
      bq.normals.col(k) = bq.points.col(k);  // radial on the unit circle
    }
  }
  return bq;
}

Vec solve_with_green(const Kernel& G, const ScalarFn& f, const QuadratureMesh& qm,
                     const Mat& eval_points) {
  const long nq = qm.weights.size();
  const long nx = eval_points.cols();
  Vec fw(nq);
  for (long q = 0; q < nq; ++q) fw[q] = qm.weights[q] * f(qm.points.col(q));
  Vec u = Vec::Zero(nx);
  parallel_chunks(nx, 16, [&](long, long b, long e) {
    for (long i = b; i < e; ++i) {
      const Vec x = eval_points.col(i);
      double acc = 0.0;
      for (long q = 0; q < nq; ++q) acc += fw[q] * G(x, qm.points.col(q));
      u[i] = acc;
    }
  });
  return u;
}

Vec boundary_term(const KernelGradY& grad_y, const ScalarFn& g2, const pde::MatrixField& A,
                  const BoundaryQuadrature& bq, const Mat& eval_points) {
  const long nq = bq.weights.size();
  const long nx = eval_points.cols();
  const int d = static_cast<int>(bq.points.rows());
  // w_q g2(y_q) A(y_q)^T n_q, folded so the kernel gradient enters as a dot product
  Mat wn(d, nq);
  for (long q = 0; q < nq; ++q) {
    const Vec y = bq.points.col(q);
    Vec an = A ? Vec(A(y).transpose() * bq.normals.col(q).head(d)) : Vec(bq.normals.col(q).head(d));
    wn.col(q) = bq.weights[q] * g2(y) * an;
  }
  Vec out = Vec::Zero(nx);
  parallel_chunks(nx, 16, [&](long, long b, long e) {
    for (long i = b; i < e; ++i) {
      const Vec x = eval_points.col(i);
      double acc = 0.0;
      for (long q = 0; q < nq; ++q) acc += grad_y(x, bq.points.col(q)).dot(wn.col(q));
      out[i] = acc;
    }
  });
  return out;
}

}  // namespace msgreen::quad
