#pragma once

// Numerical integration: Gauss-Legendre rules on [-1,1], symmetric triangle
// rules (Dunavant tables, degrees 1-5), quadrature meshes assembled from fine
// meshes, and the kernel-based solution map u(x) = sum_q w_q f(y_q) G(x, y_q)
// plus its boundary-flux companion term.

#include "msgreen/common.hpp"
#include "msgreen/geom.hpp"
#include "msgreen/pde.hpp"

#include <functional>
#include <vector>

namespace msgreen::quad {

struct Rule1d {
  Vec nodes;    // ascending, in [-1, 1]
  Vec weights;  // positive, sum 2
};

// Nodes and weights of the n-point Gauss-Legendre rule (exact through degree
// 2n-1). 1 <= n <= 20.
Rule1d gauss_legendre(int n);

struct TriangleRule {
  Mat points;   // 2 x n, on the reference triangle (0,0)-(1,0)-(0,1)
  Vec weights;  // sum 1/2 (the reference area)
};

// Symmetric triangle rule exact through the requested polynomial degree.
// Degrees 1, 2, 3, 5 are tabulated; 4 is served by the degree-5 rule.
TriangleRule dunavant(int degree);

struct QuadratureMesh {
  Mat points;                 // d x nq mapped nodes
  Vec weights;                // scaled so the total equals |Omega|
  std::vector<long> element;  // owning fine-mesh element per node
};

// Maps the reference rules over every element of a fine mesh. gl_points is
// used for 1D (segment) elements, degree for triangles.
QuadratureMesh make_quadrature(const geom::Mesh& mesh, int gl_points, int degree);

struct BoundaryQuadrature {
  Mat points;   // d x nq
  Vec weights;  // sum = |boundary| (2 points of unit weight in 1D)
  Mat normals;  // d x nq outward unit normals
};

// Quadrature along the domain boundary: the two endpoints in 1D (weight 1
// each), per-edge Gauss-Legendre panels for rectangles, angular panels for
// the unit circle.
BoundaryQuadrature boundary_quadrature(const geom::Domain& dom, int panels, int gl_points);

using Kernel = std::function<double(const Vec& x, const Vec& y)>;
using KernelGradY = std::function<Vec(const Vec& x, const Vec& y)>;
using ScalarFn = std::function<double(const Vec&)>;

// u(x_i) = sum_q w_q f(y_q) G(x_i, y_q). Evaluation points run as a parallel
// map; the sum over quadrature nodes is accumulated in index order per point.
Vec solve_with_green(const Kernel& G, const ScalarFn& f, const QuadratureMesh& qm,
                     const Mat& eval_points);

// out(x_i) = sum_q w_q g2(y_q) * (A(y_q) grad_y G(x_i, y_q)) . n_q.
// A may be empty, in which case the identity is used. The Dirichlet solution
// representation subtracts this term from the volume term.
Vec boundary_term(const KernelGradY& grad_y, const ScalarFn& g2, const pde::MatrixField& A,
                  const BoundaryQuadrature& bq, const Mat& eval_points);

}  // namespace msgreen::quad
