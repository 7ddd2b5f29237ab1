#include "msgreen/oracle.hpp"

#include "msgreen/csv.hpp"
#include "msgreen/quad.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace msgreen::oracle {

double DiscreteField::interpolate(const Vec& x, int* hint) const {
  require(mesh != nullptr, "DiscreteField: no mesh");
  if (mesh->dim == 1) {
    const double t = x[0];
    const auto& vx = mesh->vertices;
    const int nv = mesh->vertex_count();
    if (t <= vx(0, 0)) return values[0];
    if (t >= vx(0, nv - 1)) return values[nv - 1];
    int lo = 0, hi = nv - 1;  // vertices ascend for the grids built here
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      (vx(0, mid) <= t ? lo : hi) = mid;
    }
    const double w = (t - vx(0, lo)) / (vx(0, hi) - vx(0, lo));
    return (1.0 - w) * values[lo] + w * values[hi];
  }
  const int start = hint ? *hint : -1;
  const int e = geom::locate_element(*mesh, x, 1e-10, start);
  if (e < 0) throw ArgumentError("DiscreteField: point outside the mesh");
  if (hint) *hint = e;
  const auto& el = mesh->elements[static_cast<size_t>(e)];
  const Eigen::Vector2d v0 = mesh->vertices.col(el[0]);
  Eigen::Matrix2d J;
  J.col(0) = Eigen::Vector2d(mesh->vertices.col(el[1])) - v0;
  J.col(1) = Eigen::Vector2d(mesh->vertices.col(el[2])) - v0;
  const Eigen::Vector2d lam = J.partialPivLu().solve(Eigen::Vector2d(x.head(2)) - v0);
  return (1.0 - lam[0] - lam[1]) * values[el[0]] + lam[0] * values[el[1]] +
         lam[1] * values[el[2]];
}

double DiscreteField::at(double x) const {
  Vec p(1);
  p[0] = x;
  return interpolate(p);
}

DiscreteField solve_1d(const pde::ScalarField& c, const pde::ScalarField& f, int n,
                       double a, double b) {
  require(n >= 3, "solve_1d: need at least 3 interior nodes");
  require(b > a, "solve_1d: empty interval");
  const double h = (b - a) / (n + 1);
  Vec diag(n), rhs(n);
  for (int i = 0; i < n; ++i) {
    Vec x(1);
    x[0] = a + (i + 1) * h;
    diag[i] = 2.0 / (h * h) - (c ? c(x) : 0.0);
    rhs[i] = f(x);
  }
  const double off = -1.0 / (h * h);

  // Thomas sweep
  Vec cp(n), dp(n);
  double pivot = diag[0];
  if (std::abs(pivot) < 1e-300) throw SolverError("solve_1d: singular tridiagonal system");
  cp[0] = off / pivot;
  dp[0] = rhs[0] / pivot;
  for (int i = 1; i < n; ++i) {
    pivot = diag[i] - off * cp[i - 1];
    if (std::abs(pivot) < 1e-300) throw SolverError("solve_1d: singular tridiagonal system");
    cp[i] = off / pivot;
    dp[i] = (rhs[i] - off * dp[i - 1]) / pivot;
  }
  Vec u(n);
  u[n - 1] = dp[n - 1];
  for (int i = n - 2; i >= 0; --i) u[i] = dp[i] - cp[i] * u[i + 1];

  auto mesh = std::make_shared<geom::Mesh>(
      geom::coarse_mesh(geom::Domain::interval(a, b), n + 1));
  DiscreteField field;
  field.mesh = mesh;
  field.values = Vec::Zero(n + 2);
  field.values.segment(1, n) = u;
  return field;
}

Vec Csr::apply(const Vec& x) const {
  Vec y = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int k = rowptr[static_cast<size_t>(i)]; k < rowptr[static_cast<size_t>(i) + 1]; ++k)
      acc += val[static_cast<size_t>(k)] * x[col[static_cast<size_t>(k)]];
    y[i] = acc;
  }
  return y;
}

double Csr::diag(int i) const {
  for (int k = rowptr[static_cast<size_t>(i)]; k < rowptr[static_cast<size_t>(i) + 1]; ++k)
    if (col[static_cast<size_t>(k)] == i) return val[static_cast<size_t>(k)];
  return 0.0;
}

Vec minres(const Csr& A, const Vec& b, double rtol, int maxit, SolveStats* stats) {
  const int n = A.n;
  Vec x = Vec::Zero(n);
  const double beta1 = b.norm();
  if (stats) *stats = {0, 0.0, true, true};
  if (beta1 == 0.0) return x;

  // Paige-Saunders Lanczos/Givens recurrence
  Vec r1 = b, r2 = b, y = b;
  Vec w = Vec::Zero(n), w2 = Vec::Zero(n), w1;
  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0;
  int itn = 0;
  bool converged = false;
  while (itn < maxit) {
    ++itn;
    const Vec v = y / beta;
    y = A.apply(v);
    if (itn >= 2) y -= (beta / oldb) * r1;
    const double alfa = v.dot(y);
    y -= (alfa / beta) * r2;
    r1 = r2;
    r2 = y;
    oldb = beta;
    beta = y.norm();

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    double gamma = std::sqrt(gbar * gbar + beta * beta);
    gamma = std::max(gamma, 1e-300);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    w1 = w2;
    w2 = w;
    w = (v - oldeps * w1 - delta * w2) / gamma;
    x += phi * w;

    if (phibar / beta1 <= rtol) {
      converged = true;
      break;
    }
  }
  if (stats) {
    stats->iterations = itn;
    stats->rel_residual = phibar / beta1;
    stats->converged = converged;
    stats->used_minres = true;
  }
  return x;
}

Vec solve_spd(const Csr& A, const Vec& b, double rtol, int maxit, SolveStats* stats,
              const IterateObserver& on_iterate) {
  const int n = A.n;
  require(b.size() == n, "solve_spd: shape mismatch");
  Vec x = Vec::Zero(n);
  const double bnorm = b.norm();
  if (stats) *stats = {0, 0.0, true, false};
  if (bnorm == 0.0) return x;

  Vec dinv(n);
  for (int i = 0; i < n; ++i) {
    const double d = A.diag(i);
    dinv[i] = d != 0.0 ? 1.0 / d : 1.0;
  }

  Vec r = b;
  Vec z = dinv.cwiseProduct(r);
  Vec p = z;
  double rz = r.dot(z);
  int it = 0;
  bool converged = false;
  while (it < maxit) {
    const Vec Ap = A.apply(p);
    const double pAp = p.dot(Ap);
    if (pAp <= 0.0) return minres(A, b, rtol, maxit, stats);  // indefinite shift
    const double alpha = rz / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    ++it;
    if (on_iterate) on_iterate(x);
    if (r.norm() / bnorm <= rtol) {
      converged = true;
      break;
    }
    z = dinv.cwiseProduct(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  if (stats) {
    stats->iterations = it;
    stats->rel_residual = r.norm() / bnorm;
    stats->converged = converged;
  }
  return x;
}

FemSystem assemble_fem(const pde::ScalarField& c, const pde::ScalarField& f,
                       const geom::Mesh& mesh, bool eliminate) {
  require(mesh.dim == 2, "assemble_fem: 2D mesh required");
  const int nv = mesh.vertex_count();
  const quad::TriangleRule rule = quad::dunavant(3);
  const int nq = static_cast<int>(rule.weights.size());

  std::vector<std::map<int, double>> rows(static_cast<size_t>(nv));
  Vec load = Vec::Zero(nv);

  Eigen::Matrix<double, 2, 3> ref_grad;
  ref_grad << -1.0, 1.0, 0.0, -1.0, 0.0, 1.0;

  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto& el = mesh.elements[static_cast<size_t>(e)];
    const Eigen::Vector2d v0 = mesh.vertices.col(el[0]);
    Eigen::Matrix2d J;
    J.col(0) = Eigen::Vector2d(mesh.vertices.col(el[1])) - v0;
    J.col(1) = Eigen::Vector2d(mesh.vertices.col(el[2])) - v0;
    const double area = mesh.element_measure(e);
    const Eigen::Matrix<double, 2, 3> grad = J.inverse().transpose() * ref_grad;

    Eigen::Matrix3d Ke = area * grad.transpose() * grad;
    Eigen::Vector3d be = Eigen::Vector3d::Zero();
    for (int q = 0; q < nq; ++q) {
      const Eigen::Vector2d xi = rule.points.col(q);
      const Eigen::Vector3d lam(1.0 - xi[0] - xi[1], xi[0], xi[1]);
      const Vec p = v0 + J * xi;
      const double w = 2.0 * area * rule.weights[q];
      if (c) Ke -= (w * c(p)) * (lam * lam.transpose());
      be += (w * f(p)) * lam;
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) rows[static_cast<size_t>(el[i])][el[j]] += Ke(i, j);
      load[el[i]] += be[i];
    }
  }

  FemSystem sys;
  sys.dirichlet = mesh.boundary_vertices();
  if (eliminate) {
    std::vector<char> is_d(static_cast<size_t>(nv), 0);
    for (int i : sys.dirichlet) is_d[static_cast<size_t>(i)] = 1;
    for (int i = 0; i < nv; ++i) {
      if (is_d[static_cast<size_t>(i)]) {
        rows[static_cast<size_t>(i)].clear();
        rows[static_cast<size_t>(i)][i] = 1.0;
        load[i] = 0.0;
      } else {
        auto& row = rows[static_cast<size_t>(i)];
        for (auto it = row.begin(); it != row.end();)
          it = is_d[static_cast<size_t>(it->first)] ? row.erase(it) : std::next(it);
      }
    }
  }

  sys.A.n = nv;
  sys.A.rowptr.assign(1, 0);
  for (int i = 0; i < nv; ++i) {
    for (const auto& [j, v] : rows[static_cast<size_t>(i)]) {
      sys.A.col.push_back(j);
      sys.A.val.push_back(v);
    }
    sys.A.rowptr.push_back(static_cast<int>(sys.A.col.size()));
  }
  sys.b = load;
  return sys;
}

DiscreteField solve_2d_fem(const pde::ScalarField& c, const pde::ScalarField& f,
                           std::shared_ptr<const geom::Mesh> mesh, double rtol) {
  require(mesh != nullptr, "solve_2d_fem: null mesh");
  FemSystem sys = assemble_fem(c, f, *mesh, true);
  SolveStats stats;
  Vec u = solve_spd(sys.A, sys.b, rtol, 10 * sys.A.n, &stats);
  if (!stats.converged)
    throw SolverError("solve_2d_fem: iterative solve stalled at relative residual " +
                      format_double(stats.rel_residual) + " after " +
                      std::to_string(stats.iterations) + " iterations");
  for (int i : sys.dirichlet) u[i] = 0.0;
  DiscreteField field;
  field.mesh = std::move(mesh);
  field.values = std::move(u);
  return field;
}

namespace {

// The divergence form is handled by reducing to the reaction form: with the
// identity coefficient the operator is the plain Laplacian, so solving
// -Laplace G = -N gives div(grad G) = N.
void reduce_operator(const pde::OperatorSpec& op, pde::ScalarField& c, double& rhs_sign) {
  if (op.kind == pde::OperatorSpec::Kind::reaction_form) {
    c = op.c;
    rhs_sign = 1.0;
    return;
  }
  if (op.coeff_name != "identity")
    throw ArgumentError(
        "reference_green: divergence-form solves support the identity coefficient only");
  c = {};
  rhs_sign = -1.0;
}

std::string cache_key(const pde::OperatorSpec& op, const geom::Domain& dom,
                      const pde::Mollifier& m, const Vec& y, int resolution) {
  std::string key = op.kind == pde::OperatorSpec::Kind::reaction_form ? "reaction" : "divergence";
  key += " " + op.coeff_name + " " + dom.name() + " eps=" + format_double(m.epsilon) + " y=";
  for (long i = 0; i < y.size(); ++i) key += (i ? "," : "") + format_double(y[i]);
  key += " res=" + std::to_string(resolution);
  return key;
}

}  // namespace

DiscreteField reference_green(const pde::OperatorSpec& op, const geom::Domain& dom,
                              const pde::Mollifier& m, const Vec& y, int resolution) {
  require(y.size() == dom.dim, "reference_green: anchor dimension mismatch");
  require(dom.contains(y) && !dom.on_boundary(y),
          "reference_green: anchor must lie strictly inside the domain");
  require(op.dim == dom.dim, "reference_green: operator dimension mismatch");

  pde::ScalarField c;
  double rhs_sign = 1.0;
  reduce_operator(op, c, rhs_sign);
  const auto rhs = [&m, &y, rhs_sign](const Vec& x) {
    return rhs_sign * pde::mollifier_value(m, x, y);
  };
  if (dom.dim == 1) {
    require(resolution >= 4, "reference_green: resolution too small");
    return solve_1d(c, rhs, resolution - 1, dom.a, dom.b);
  }
  auto mesh = std::make_shared<geom::Mesh>(geom::coarse_mesh(dom, resolution));
  return solve_2d_fem(c, rhs, std::move(mesh));
}

DiscreteField reference_green_cached(const pde::OperatorSpec& op, const geom::Domain& dom,
                                     const pde::Mollifier& m, const Vec& y, int resolution,
                                     const std::filesystem::path& cache_dir) {
  const std::string key = cache_key(op, dom, m, y, resolution);
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the key string
  for (unsigned char ch : key) h = (h ^ ch) * 0x100000001b3ULL;
  std::ostringstream name;
  name << "ref_" << std::hex << h << ".txt";
  const auto path = cache_dir / name.str();

  if (std::filesystem::exists(path)) {
    // recompute on any mismatch or parse failure
    try {
      std::ifstream in(path);
      std::string header, stored_key, nline;
      std::getline(in, header);
      std::getline(in, stored_key);
      std::getline(in, nline);
      if (header == "msgreen-ref v1" && stored_key == key) {
        const long n = std::stol(nline);
        Vec vals(n);
        std::string line;
        bool ok = true;
        for (long i = 0; i < n && ok; ++i) {
          if (!std::getline(in, line)) {
            ok = false;
            break;
          }
          vals[i] = parse_double(line);
        }
        if (ok) {
          DiscreteField field;
          field.mesh = dom.dim == 1
                           ? std::make_shared<geom::Mesh>(
                                 geom::coarse_mesh(geom::Domain::interval(dom.a, dom.b),
                                                   resolution))
                           : std::make_shared<geom::Mesh>(geom::coarse_mesh(dom, resolution));
          if (field.mesh->vertex_count() == n) {
            field.values = std::move(vals);
            return field;
          }
        }
      }
    } catch (const std::exception&) {
    }
  }

  DiscreteField field = reference_green(op, dom, m, y, resolution);
  std::filesystem::create_directories(cache_dir);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write reference cache entry: " + path.string());
  out << "msgreen-ref v1\n" << key << "\n" << field.values.size() << "\n";
  for (long i = 0; i < field.values.size(); ++i) out << format_double(field.values[i]) << "\n";
  return field;
}

}  // namespace msgreen::oracle
