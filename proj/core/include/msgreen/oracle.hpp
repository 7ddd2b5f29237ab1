#pragma once

// Reference solvers: second-order finite differences in 1D, linear-triangle
// FEM in 2D, a Jacobi-scaled conjugate-gradient solver with a MINRES fallback
// for indefinite shifts, and discrete kernel fields driven by mollified point
// sources (optionally cached to disk as text).

#include "msgreen/common.hpp"
#include "msgreen/geom.hpp"
#include "msgreen/pde.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <vector>

namespace msgreen::oracle {

struct DiscreteField {
  std::shared_ptr<const geom::Mesh> mesh;
  Vec values;  // one per vertex; zero on Dirichlet nodes

  // Piecewise-linear interpolation. `hint` (optional, caller-owned) caches
  // the containing element between nearby queries.
  double interpolate(const Vec& x, int* hint = nullptr) const;
  double operator()(const Vec& x) const { return interpolate(x); }
  double at(double x) const;  // 1D convenience
};

// -u'' - c u = f on (a, b) with homogeneous Dirichlet data, central
// differences on a uniform grid with n >= 3 interior nodes, direct
// tridiagonal solve. SolverError on a vanishing pivot.
DiscreteField solve_1d(const pde::ScalarField& c, const pde::ScalarField& f, int n,
                       double a = 0.0, double b = 1.0);

struct Csr {
  int n = 0;
  std::vector<int> rowptr{0};
  std::vector<int> col;
  std::vector<double> val;

  Vec apply(const Vec& x) const;
  double diag(int i) const;
};

struct SolveStats {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
  bool used_minres = false;
};

using IterateObserver = std::function<void(const Vec&)>;

// Jacobi-scaled conjugate gradients to relative residual rtol; if a search
// direction exposes non-positive curvature (p' A p <= 0) the solve restarts
// under MINRES, which tolerates indefinite matrices. `on_iterate` sees every
// CG iterate (used by the energy-norm tests).
Vec solve_spd(const Csr& A, const Vec& b, double rtol, int maxit,
              SolveStats* stats = nullptr, const IterateObserver& on_iterate = {});

// Unpreconditioned MINRES for symmetric (possibly indefinite) systems.
Vec minres(const Csr& A, const Vec& b, double rtol, int maxit,
           SolveStats* stats = nullptr);

struct FemSystem {
  Csr A;
  Vec b;
  std::vector<int> dirichlet;  // sorted vertex ids
};

// P1 assembly of the bilinear form of -Laplace - c (stiffness minus the
// c-weighted mass) with load f. With eliminate=true, Dirichlet rows/columns
// are removed symmetrically (unit diagonal, zero load).
FemSystem assemble_fem(const pde::ScalarField& c, const pde::ScalarField& f,
                       const geom::Mesh& mesh, bool eliminate = true);

// FEM solve of -Laplace u - c u = f, homogeneous Dirichlet; CG to relative
// residual rtol with at most 10 n iterations. SolverError on non-convergence.
DiscreteField solve_2d_fem(const pde::ScalarField& c, const pde::ScalarField& f,
                           std::shared_ptr<const geom::Mesh> mesh, double rtol = 1e-10);

// Discrete kernel field G_eps(., y): solves the operator against the
// mollified source N_eps(., y). In 1D, `resolution` is the element count of
// the uniform grid; in 2D, the target element count of the fine triangle
// mesh. y must lie strictly inside the domain. Divergence-form operators are
// supported for the identity coefficient only.
DiscreteField reference_green(const pde::OperatorSpec& op, const geom::Domain& dom,
                              const pde::Mollifier& m, const Vec& y, int resolution);

// Cache-backed variant. Entries are plain text keyed by operator, domain,
// epsilon, y and resolution, and reload bit-exactly.
DiscreteField reference_green_cached(const pde::OperatorSpec& op, const geom::Domain& dom,
                                     const pde::Mollifier& m, const Vec& y, int resolution,
                                     const std::filesystem::path& cache_dir);

}  // namespace msgreen::oracle
