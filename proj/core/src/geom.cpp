#include "msgreen/geom.hpp"

#include "msgreen/csv.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>

namespace msgreen::geom {

// --- Domain -----------------------------------------------------------------

Domain Domain::interval(double a, double b) {
  require(a < b, "Domain::interval: a < b required");
  Domain d;
  d.kind = Kind::interval;
  d.dim = 1;
  d.a = a;
  d.b = b;
  return d;
}

Domain Domain::rectangle(double ax, double bx, double ay, double by) {
  require(ax < bx && ay < by, "Domain::rectangle: empty interior");
  Domain d;
  d.kind = Kind::rectangle;
  d.dim = 2;
  d.ax = ax;
  d.bx = bx;
  d.ay = ay;
  d.by = by;
  return d;
}

Domain Domain::unit_circle() {
  Domain d;
  d.kind = Kind::unit_circle;
  d.dim = 2;
  return d;
}

bool Domain::contains(const Vec& p, double tol) const {
  if (static_cast<int>(p.size()) != dim) return false;
  switch (kind) {
    case Kind::interval:
      return p[0] >= a - tol && p[0] <= b + tol;
    case Kind::rectangle:
      return p[0] >= ax - tol && p[0] <= bx + tol && p[1] >= ay - tol && p[1] <= by + tol;
    case Kind::unit_circle:
      return p.norm() <= 1.0 + tol;
  }
  return false;
}

bool Domain::on_boundary(const Vec& p, double tol) const {
  if (static_cast<int>(p.size()) != dim) return false;
  switch (kind) {
    case Kind::interval:
      return std::abs(p[0] - a) <= tol || std::abs(p[0] - b) <= tol;
    case Kind::rectangle: {
      if (!contains(p, tol)) return false;
      return std::abs(p[0] - ax) <= tol || std::abs(p[0] - bx) <= tol ||
             std::abs(p[1] - ay) <= tol || std::abs(p[1] - by) <= tol;
    }
    case Kind::unit_circle:
      return std::abs(p.norm() - 1.0) <= tol;
  }
  return false;
}

double Domain::measure() const {
  switch (kind) {
    case Kind::interval:
      return b - a;
    case Kind::rectangle:
      return (bx - ax) * (by - ay);
    case Kind::unit_circle:
      return EIGEN_PI;
  }
  return 0.0;
}

double Domain::boundary_measure() const {
  switch (kind) {
    case Kind::interval:
      return 2.0;  // two points
    case Kind::rectangle:
      return 2.0 * ((bx - ax) + (by - ay));
    case Kind::unit_circle:
      return 2.0 * EIGEN_PI;
  }
  return 0.0;
}

std::string Domain::name() const {
  switch (kind) {
    case Kind::interval:
      return "interval[" + format_double(a) + "," + format_double(b) + "]";
    case Kind::rectangle:
      return "rectangle[" + format_double(ax) + "," + format_double(bx) + "]x[" +
             format_double(ay) + "," + format_double(by) + "]";
    case Kind::unit_circle:
      return "unit_circle";
  }
  return "?";
}

// --- Mesh -------------------------------------------------------------------

double Mesh::element_measure(int e) const {
  const auto& el = elements[static_cast<size_t>(e)];
  if (dim == 1) return std::abs(vertices(0, el[1]) - vertices(0, el[0]));
  const Eigen::Vector2d a = vertices.col(el[0]), b = vertices.col(el[1]),
                        c = vertices.col(el[2]);
  return 0.5 * std::abs((b.x() - a.x()) * (c.y() - a.y()) -
                        (c.x() - a.x()) * (b.y() - a.y()));
}

Vec Mesh::element_centroid(int e) const {
  const auto& el = elements[static_cast<size_t>(e)];
  const int nv = dim == 1 ? 2 : 3;
  Vec c = Vec::Zero(dim);
  for (int k = 0; k < nv; ++k) c += vertices.col(el[k]);
  return c / nv;
}

std::vector<int> Mesh::boundary_vertices() const {
  std::vector<int> out;
  for (const auto& f : boundary) {
    out.push_back(f.v[0]);
    if (f.v[1] >= 0) out.push_back(f.v[1]);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

double signed_area(const Mesh& m, const std::array<int, 3>& el) {
  const Eigen::Vector2d a = m.vertices.col(el[0]), b = m.vertices.col(el[1]),
                        c = m.vertices.col(el[2]);
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

Mesh interval_mesh(const Domain& dom, int n) {
  Mesh m;
  m.dim = 1;
  m.vertices.resize(1, n + 1);
  for (int i = 0; i <= n; ++i)
    m.vertices(0, i) = dom.a + (dom.b - dom.a) * (static_cast<double>(i) / n);
  m.vertices(0, n) = dom.b;  // exact endpoint
  for (int i = 0; i < n; ++i) m.elements.push_back({i, i + 1, -1});
  BoundaryFacet lo, hi;
  lo.v = {0, -1};
  lo.element = 0;
  lo.normal = {-1.0, 0.0};
  hi.v = {n, -1};
  hi.element = n - 1;
  hi.normal = {1.0, 0.0};
  m.boundary = {lo, hi};
  return m;
}

Mesh rectangle_mesh(const Domain& dom, int target) {
  const double aspect = (dom.bx - dom.ax) / (dom.by - dom.ay);
  int nx = std::max(1, static_cast<int>(std::lround(std::sqrt(target / 2.0 * aspect))));
  int ny = std::max(1, static_cast<int>(std::lround(target / (2.0 * nx))));
  Mesh m;
  m.dim = 2;
  m.vertices.resize(2, (nx + 1) * (ny + 1));
  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      m.vertices(0, vid(i, j)) = dom.ax + (dom.bx - dom.ax) * (static_cast<double>(i) / nx);
      m.vertices(1, vid(i, j)) = dom.ay + (dom.by - dom.ay) * (static_cast<double>(j) / ny);
    }
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v11 = vid(i + 1, j + 1),
                v01 = vid(i, j + 1);
      m.elements.push_back({v00, v10, v11});
      m.elements.push_back({v00, v11, v01});
    }
  auto quad0 = [nx](int i, int j) { return 2 * (j * nx + i); };
  for (int i = 0; i < nx; ++i) {
    BoundaryFacet bt, tp;
    bt.v = {vid(i, 0), vid(i + 1, 0)};
    bt.element = quad0(i, 0);
    bt.normal = {0.0, -1.0};
    m.boundary.push_back(bt);
    tp.v = {vid(i + 1, ny), vid(i, ny)};
    tp.element = quad0(i, ny - 1) + 1;
    tp.normal = {0.0, 1.0};
    m.boundary.push_back(tp);
  }
  for (int j = 0; j < ny; ++j) {
    BoundaryFacet lf, rt;
    lf.v = {vid(0, j + 1), vid(0, j)};
    lf.element = quad0(0, j) + 1;
    lf.normal = {-1.0, 0.0};
    m.boundary.push_back(lf);
    rt.v = {vid(nx, j), vid(nx, j + 1)};
    rt.element = quad0(nx - 1, j);
    rt.normal = {1.0, 0.0};
    m.boundary.push_back(rt);
  }
  return m;
}

Mesh circle_mesh(int target) {
  const int K = std::max(1, static_cast<int>(std::lround(std::sqrt(target / 6.0))));
  Mesh m;
  m.dim = 2;
  auto ring_start = [](int r) { return r == 0 ? 0 : 1 + 3 * r * (r - 1); };
  const int nv = ring_start(K) + 6 * K;
  m.vertices.resize(2, nv);
  m.vertices.col(0).setZero();
  for (int r = 1; r <= K; ++r) {
    const int n = 6 * r;
    const double rad = static_cast<double>(r) / K;
    for (int k = 0; k < n; ++k) {
      const double th = 2.0 * EIGEN_PI * k / n;
      m.vertices(0, ring_start(r) + k) = rad * std::cos(th);
      m.vertices(1, ring_start(r) + k) = rad * std::sin(th);
    }
  }
  // Zip consecutive rings together; integer angle comparison keeps the
  // construction exact and deterministic.
  for (int r = 1; r <= K; ++r) {
    const int s1 = ring_start(r);
    const int n1 = 6 * r;
    if (r == 1) {
      for (int k = 0; k < 6; ++k) m.elements.push_back({0, s1 + k, s1 + (k + 1) % 6});
      continue;
    }
    const int s0 = ring_start(r - 1);
    const int n0 = 6 * (r - 1);
    int i0 = 0, i1 = 0;
    while (i0 < n0 || i1 < n1) {
      const bool advance_outer =
          i1 < n1 && (i0 == n0 || static_cast<long>(i1 + 1) * n0 <= static_cast<long>(i0 + 1) * n1);
      if (advance_outer) {
        m.elements.push_back({s1 + i1 % n1, s1 + (i1 + 1) % n1, s0 + i0 % n0});
        ++i1;
      } else {
        m.elements.push_back({s0 + i0 % n0, s1 + i1 % n1, s0 + (i0 + 1) % n0});
        ++i0;
      }
    }
  }
  for (auto& el : m.elements)
    if (signed_area(m, el) < 0.0) std::swap(el[1], el[2]);
  const int sK = ring_start(K);
  const int nK = 6 * K;
  for (int k = 0; k < nK; ++k) {
    BoundaryFacet f;
    f.v = {sK + k, sK + (k + 1) % nK};
    f.element = -1;  // resolved below
    const Eigen::Vector2d mid =
        0.5 * (m.vertices.col(f.v[0]) + m.vertices.col(f.v[1]));
    f.normal = mid.normalized();
    m.boundary.push_back(f);
  }
  // attach each boundary edge to its (unique) element
  std::map<std::pair<int, int>, int> edge_owner;
  for (int e = 0; e < m.element_count(); ++e) {
    const auto& el = m.elements[static_cast<size_t>(e)];
    for (int k = 0; k < 3; ++k) {
      const int u = el[k], w = el[(k + 1) % 3];
      edge_owner[{std::min(u, w), std::max(u, w)}] = e;
    }
  }
  for (auto& f : m.boundary)
    f.element = edge_owner.at({std::min(f.v[0], f.v[1]), std::max(f.v[0], f.v[1])});
  return m;
}

}  // namespace

Mesh coarse_mesh(const Domain& dom, int target_elements) {
  require(target_elements >= 1, "coarse_mesh: target_elements >= 1 required");
  switch (dom.kind) {
    case Domain::Kind::interval:
      return interval_mesh(dom, target_elements);
    case Domain::Kind::rectangle:
      return rectangle_mesh(dom, target_elements);
    case Domain::Kind::unit_circle:
      return circle_mesh(target_elements);
  }
  throw ArgumentError("coarse_mesh: unsupported domain kind");
}

int locate_element(const Mesh& mesh, const Vec& p, double tol, int hint) {
  auto inside = [&](int e) {
    const auto& el = mesh.elements[static_cast<size_t>(e)];
    if (mesh.dim == 1) {
      const double x0 = mesh.vertices(0, el[0]), x1 = mesh.vertices(0, el[1]);
      return p[0] >= std::min(x0, x1) - tol && p[0] <= std::max(x0, x1) + tol;
    }
    const Eigen::Vector2d a = mesh.vertices.col(el[0]), b = mesh.vertices.col(el[1]),
                          c = mesh.vertices.col(el[2]);
    const double det = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
    if (det == 0.0) return false;
    const double l1 =
        ((p[0] - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (p[1] - a.y())) / det;
    const double l2 =
        ((b.x() - a.x()) * (p[1] - a.y()) - (p[0] - a.x()) * (b.y() - a.y())) / det;
    return l1 >= -tol && l2 >= -tol && l1 + l2 <= 1.0 + tol;
  };
  if (hint >= 0 && hint < mesh.element_count() && inside(hint)) return hint;
  for (int e = 0; e < mesh.element_count(); ++e)
    if (inside(e)) return e;
  return -1;
}

Graph adjacency_graph(const Mesh& mesh) {
  Graph g;
  g.n = mesh.element_count();
  g.adj.assign(static_cast<size_t>(g.n), {});
  std::map<std::pair<int, int>, std::vector<int>> facets;
  for (int e = 0; e < g.n; ++e) {
    const auto& el = mesh.elements[static_cast<size_t>(e)];
    if (mesh.dim == 1) {
      facets[{el[0], -1}].push_back(e);
      facets[{el[1], -1}].push_back(e);
    } else {
      for (int k = 0; k < 3; ++k) {
        const int u = el[k], w = el[(k + 1) % 3];
        facets[{std::min(u, w), std::max(u, w)}].push_back(e);
      }
    }
  }
  for (const auto& [key, elems] : facets) {
    for (size_t i = 0; i < elems.size(); ++i)
      for (size_t j = i + 1; j < elems.size(); ++j) {
        g.adj[static_cast<size_t>(elems[i])].push_back(elems[j]);
        g.adj[static_cast<size_t>(elems[j])].push_back(elems[i]);
      }
  }
  for (auto& a : g.adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return g;
}

std::vector<std::vector<int>> Partition::elements_of_part() const {
  std::vector<std::vector<int>> out(static_cast<size_t>(parts));
  for (size_t e = 0; e < part_of.size(); ++e)
    out[static_cast<size_t>(part_of[e])].push_back(static_cast<int>(e));
  return out;
}

namespace {

// Fiedler vector of the subgraph given by local adjacency lists, via power
// iteration on (c I - L) restricted to the complement of the constant
// vector. 200 iterations / tolerance 1e-8; deterministic start vector.
Vec fiedler_vector(const std::vector<std::vector<int>>& adj) {
  const int n = static_cast<int>(adj.size());
  Vec v(n);
  for (int i = 0; i < n; ++i)
    v[i] = static_cast<double>(splitmix64(static_cast<std::uint64_t>(i) + 1) >> 11) *
               0x1.0p-53 -
           0.5;
  int maxdeg = 0;
  for (const auto& a : adj) maxdeg = std::max(maxdeg, static_cast<int>(a.size()));
  const double c = 2.0 * maxdeg + 1.0;

  v.array() -= v.mean();
  double nrm = v.norm();
  if (nrm < 1e-300) {
    v.setZero();
    v[0] = 1.0;
    v.array() -= v.mean();
    nrm = v.norm();
  }
  v /= nrm;

  Vec w(n);
  for (int it = 0; it < 200; ++it) {
    for (int i = 0; i < n; ++i) {
      double acc = (c - static_cast<double>(adj[static_cast<size_t>(i)].size())) * v[i];
      for (int j : adj[static_cast<size_t>(i)]) acc += v[j];
      w[i] = acc;
    }
    w.array() -= w.mean();
    const double wn = w.norm();
    if (wn < 1e-300) break;  // degenerate (complete graph etc.)
    w /= wn;
    const double delta = (w - v).norm();
    v = w;
    if (delta < 1e-8) break;
  }
  return v;
}

// Connected components of `side` (local indices, membership via flags).
std::vector<std::vector<int>> side_components(const std::vector<std::vector<int>>& adj,
                                              const std::vector<char>& in_side) {
  const int n = static_cast<int>(adj.size());
  std::vector<char> seen(static_cast<size_t>(n), 0);
  std::vector<std::vector<int>> comps;
  for (int s = 0; s < n; ++s) {
    if (!in_side[static_cast<size_t>(s)] || seen[static_cast<size_t>(s)]) continue;
    std::vector<int> comp;
    std::deque<int> queue{s};
    seen[static_cast<size_t>(s)] = 1;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      comp.push_back(u);
      for (int w : adj[static_cast<size_t>(u)])
        if (in_side[static_cast<size_t>(w)] && !seen[static_cast<size_t>(w)]) {
          seen[static_cast<size_t>(w)] = 1;
          queue.push_back(w);
        }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  return comps;
}

// Moves every component except the largest (ties: smallest leading index)
// to the other side. Returns true if anything moved.
bool reattach_strays(const std::vector<std::vector<int>>& adj, std::vector<char>& in_side) {
  auto comps = side_components(adj, in_side);
  if (comps.size() <= 1) return false;
  size_t keep = 0;
  for (size_t k = 1; k < comps.size(); ++k) {
    if (comps[k].size() > comps[keep].size() ||
        (comps[k].size() == comps[keep].size() && comps[k][0] < comps[keep][0]))
      keep = k;
  }
  for (size_t k = 0; k < comps.size(); ++k) {
    if (k == keep) continue;
    for (int u : comps[k]) in_side[static_cast<size_t>(u)] = 0;
  }
  return true;
}

void bisect(const Graph& g, const std::vector<int>& idx, int p, int base,
            std::vector<int>& out) {
  if (p == 1) {
    for (int e : idx) out[static_cast<size_t>(e)] = base;
    return;
  }
  const int n = static_cast<int>(idx.size());
  const int p1 = (p + 1) / 2;
  const int p2 = p - p1;

  // local adjacency restricted to idx
  std::vector<int> local_of(out.size(), -1);
  for (int i = 0; i < n; ++i) local_of[static_cast<size_t>(idx[static_cast<size_t>(i)])] = i;
  std::vector<std::vector<int>> adj(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int w : g.adj[static_cast<size_t>(idx[static_cast<size_t>(i)])]) {
      const int lw = local_of[static_cast<size_t>(w)];
      if (lw >= 0) adj[static_cast<size_t>(i)].push_back(lw);
    }

  const Vec f = fiedler_vector(adj);
  std::vector<int> order(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (f[a] != f[b]) return f[a] < f[b];
    return a < b;  // ties broken by index, so equal-value vertices stay together
  });

  long kA = std::lround(static_cast<double>(n) * p1 / p);
  kA = std::clamp<long>(kA, p1, n - p2);

  std::vector<char> in_a(static_cast<size_t>(n), 0);
  for (long i = 0; i < kA; ++i) in_a[static_cast<size_t>(order[static_cast<size_t>(i)])] = 1;

  // connectivity repair: strand in one side -> move to the other side
  std::vector<char> in_b(static_cast<size_t>(n));
  for (int rounds = 0; rounds < 100; ++rounds) {
    bool moved = reattach_strays(adj, in_a);
    for (int i = 0; i < n; ++i) in_b[static_cast<size_t>(i)] = !in_a[static_cast<size_t>(i)];
    moved = reattach_strays(adj, in_b) || moved;
    for (int i = 0; i < n; ++i) in_a[static_cast<size_t>(i)] = !in_b[static_cast<size_t>(i)];
    if (!moved) break;
  }

  std::vector<int> side_a, side_b;
  for (int i = 0; i < n; ++i) {
    if (in_a[static_cast<size_t>(i)])
      side_a.push_back(idx[static_cast<size_t>(i)]);
    else
      side_b.push_back(idx[static_cast<size_t>(i)]);
  }
  if (static_cast<int>(side_a.size()) < p1 || static_cast<int>(side_b.size()) < p2) {
    // repair starved one side; fall back to the raw quantile split
    side_a.clear();
    side_b.clear();
    for (long i = 0; i < n; ++i) {
      const int e = idx[static_cast<size_t>(order[static_cast<size_t>(i)])];
      (i < kA ? side_a : side_b).push_back(e);
    }
  }
  bisect(g, side_a, p1, base, out);
  bisect(g, side_b, p2, base + p1, out);
}

}  // namespace

Partition partition(const Graph& g, int p) {
  require(p >= 1, "partition: p >= 1 required");
  if (p > g.n)
    throw ArgumentError("partition: requested " + std::to_string(p) + " parts for " +
                        std::to_string(g.n) + " elements");
  Partition part;
  part.parts = p;
  part.part_of.assign(static_cast<size_t>(g.n), -1);
  std::vector<int> all(static_cast<size_t>(g.n));
  for (int i = 0; i < g.n; ++i) all[static_cast<size_t>(i)] = i;
  bisect(g, all, p, 0, part.part_of);
  return part;
}

// --- sampling ----------------------------------------------------------------

namespace {

Vec sample_in_element(const Mesh& mesh, int e, std::mt19937_64& rng) {
  const auto& el = mesh.elements[static_cast<size_t>(e)];
  if (mesh.dim == 1) {
    const double t = u01(rng);
    Vec p(1);
    p[0] = mesh.vertices(0, el[0]) + t * (mesh.vertices(0, el[1]) - mesh.vertices(0, el[0]));
    return p;
  }
  double u = u01(rng), v = u01(rng);
  if (u + v > 1.0) {
    u = 1.0 - u;
    v = 1.0 - v;
  }
  const Eigen::Vector2d a = mesh.vertices.col(el[0]), b = mesh.vertices.col(el[1]),
                        c = mesh.vertices.col(el[2]);
  Vec p(2);
  p = a + u * (b - a) + v * (c - a);
  return p;
}

Vec sample_boundary_point(const Domain& dom, int k, std::mt19937_64& rng) {
  Vec p(dom.dim);
  switch (dom.kind) {
    case Domain::Kind::interval:
      // alternate the two endpoints; no randomness needed on a 0-d boundary
      p[0] = (k % 2 == 0) ? dom.a : dom.b;
      return p;
    case Domain::Kind::rectangle: {
      const double w = dom.bx - dom.ax, h = dom.by - dom.ay;
      double s = u01(rng) * 2.0 * (w + h);
      if (s < w) {
        p << dom.ax + s, dom.ay;
      } else if (s < w + h) {
        p << dom.bx, dom.ay + (s - w);
      } else if (s < 2.0 * w + h) {
        p << dom.bx - (s - w - h), dom.by;
      } else {
        p << dom.ax, dom.by - (s - 2.0 * w - h);
      }
      return p;
    }
    case Domain::Kind::unit_circle: {
      const double th = 2.0 * EIGEN_PI * u01(rng);
      p << std::cos(th), std::sin(th);
      return p;
    }
  }
  throw ArgumentError("sample_boundary_point: unsupported domain");
}

Vec sample_far_point(const Domain& dom, std::mt19937_64& rng) {
  Vec p(dom.dim);
  switch (dom.kind) {
    case Domain::Kind::interval:
      p[0] = uniform(rng, dom.a, dom.b);
      return p;
    case Domain::Kind::rectangle:
      p << uniform(rng, dom.ax, dom.bx), uniform(rng, dom.ay, dom.by);
      return p;
    case Domain::Kind::unit_circle: {
      const double r = std::sqrt(u01(rng));
      const double th = 2.0 * EIGEN_PI * u01(rng);
      p << r * std::cos(th), r * std::sin(th);
      return p;
    }
  }
  throw ArgumentError("sample_far_point: unsupported domain");
}

Vec sample_near_point(const Domain& dom, const Vec& y, double radius, std::mt19937_64& rng) {
  Vec p(dom.dim);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    if (dom.dim == 1) {
      p[0] = y[0] + radius * (2.0 * u01(rng) - 1.0);
    } else {
      const double r = radius * std::sqrt(u01(rng));
      const double th = 2.0 * EIGEN_PI * u01(rng);
      p[0] = y[0] + r * std::cos(th);
      p[1] = y[1] + r * std::sin(th);
    }
    if (dom.contains(p)) return p;
  }
  throw SamplingError("sample_batch: 10,000 rejected attempts for a near point (ball radius " +
                      format_double(radius) + " barely intersects the domain)");
}

}  // namespace

SampleBatch sample_batch(const Domain& dom, const Mesh& coarse, const Partition& part,
                         int part_id, const SampleCounts& counts, double epsilon,
                         std::uint64_t seed) {
  require(part_id >= 0 && part_id < part.parts, "sample_batch: part_id out of range");
  require(counts.y_count >= 1 && counts.boundary_per_y >= 1 && counts.near_per_y >= 1 &&
              counts.far_per_y >= 1,
          "sample_batch: all counts must be >= 1");
  require(epsilon > 0, "sample_batch: epsilon must be positive");
  require(static_cast<int>(part.part_of.size()) == coarse.element_count(),
          "sample_batch: partition does not match mesh");

  std::vector<int> elems;
  for (int e = 0; e < coarse.element_count(); ++e)
    if (part.part_of[static_cast<size_t>(e)] == part_id) elems.push_back(e);
  require(!elems.empty(), "sample_batch: empty part");

  std::vector<double> cum(elems.size());
  double total = 0.0;
  for (size_t i = 0; i < elems.size(); ++i) {
    total += coarse.element_measure(elems[i]);
    cum[i] = total;
  }

  std::mt19937_64 rng(seed ^ static_cast<std::uint64_t>(part_id));
  SampleBatch batch;
  batch.y_anchors.reserve(static_cast<size_t>(counts.y_count));
  for (int j = 0; j < counts.y_count; ++j) {
    const double u = u01(rng) * total;
    const size_t pick = static_cast<size_t>(
        std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
    const int e = elems[std::min(pick, elems.size() - 1)];
    batch.y_anchors.push_back(sample_in_element(coarse, e, rng));
  }

  const double radius = 2.0 * epsilon;
  for (int j = 0; j < counts.y_count; ++j) {
    const Vec& y = batch.y_anchors[static_cast<size_t>(j)];
    for (int k = 0; k < counts.boundary_per_y; ++k)
      batch.boundary_pairs.emplace_back(sample_boundary_point(dom, k, rng), y);
    for (int k = 0; k < counts.near_per_y; ++k)
      batch.near_pairs.emplace_back(sample_near_point(dom, y, radius, rng), y);
    for (int k = 0; k < counts.far_per_y; ++k)
      batch.far_pairs.emplace_back(sample_far_point(dom, rng), y);
  }
  return batch;
}

SampleBatch sample_batch_at(const Domain& dom, const std::vector<Vec>& y_anchors,
                            const SampleCounts& counts, double epsilon,
                            std::uint64_t seed) {
  require(!y_anchors.empty(), "sample_batch_at: no anchors");
  require(counts.boundary_per_y >= 1 && counts.near_per_y >= 1 && counts.far_per_y >= 1,
          "sample_batch_at: all counts must be >= 1");
  require(epsilon > 0, "sample_batch_at: epsilon must be positive");
  for (const Vec& y : y_anchors)
    require(dom.contains(y), "sample_batch_at: anchor outside the domain");

  std::mt19937_64 rng(seed);
  SampleBatch batch;
  batch.y_anchors = y_anchors;
  const double radius = 2.0 * epsilon;
  for (const Vec& y : batch.y_anchors) {
    for (int k = 0; k < counts.boundary_per_y; ++k)
      batch.boundary_pairs.emplace_back(sample_boundary_point(dom, k, rng), y);
    for (int k = 0; k < counts.near_per_y; ++k)
      batch.near_pairs.emplace_back(sample_near_point(dom, y, radius, rng), y);
    for (int k = 0; k < counts.far_per_y; ++k)
      batch.far_pairs.emplace_back(sample_far_point(dom, rng), y);
  }
  return batch;
}

// --- mesh i/o -----------------------------------------------------------------

void save_mesh(const Mesh& mesh, const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_mesh: cannot open " + path.string());
  out << "msgreen-mesh v1\n";
  out << "dim " << mesh.dim << "\n";
  out << "vertices " << mesh.vertex_count() << "\n";
  out << "elements " << mesh.element_count() << "\n";
  out << "boundary " << mesh.boundary.size() << "\n";
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    out << "v";
    for (int k = 0; k < mesh.dim; ++k) out << ' ' << format_double(mesh.vertices(k, i));
    out << '\n';
  }
  for (const auto& el : mesh.elements) {
    out << "e " << el[0] << ' ' << el[1];
    if (mesh.dim == 2) out << ' ' << el[2];
    out << '\n';
  }
  for (const auto& f : mesh.boundary) {
    out << "b " << f.v[0];
    if (mesh.dim == 2) out << ' ' << f.v[1];
    out << ' ' << f.element;
    out << ' ' << format_double(f.normal[0]);
    if (mesh.dim == 2) out << ' ' << format_double(f.normal[1]);
    out << '\n';
  }
  if (!out) throw IoError("save_mesh: write failed for " + path.string());
}

Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_mesh: cannot open " + path.string());
  std::string line;
  auto next_line = [&](const char* what) {
    if (!std::getline(in, line)) throw IoError(std::string("load_mesh: missing ") + what);
    return line;
  };
  if (next_line("header") != "msgreen-mesh v1")
    throw IoError("load_mesh: bad header in " + path.string());
  Mesh mesh;
  int nv = 0, ne = 0, nb = 0;
  {
    std::istringstream s(next_line("dim"));
    std::string tag;
    s >> tag >> mesh.dim;
    if (tag != "dim" || (mesh.dim != 1 && mesh.dim != 2))
      throw IoError("load_mesh: bad dim line");
  }
  auto read_count = [&](const char* tag_want) {
    std::istringstream s(next_line(tag_want));
    std::string tag;
    int n = -1;
    s >> tag >> n;
    if (tag != tag_want || n < 0) throw IoError(std::string("load_mesh: bad ") + tag_want);
    return n;
  };
  nv = read_count("vertices");
  ne = read_count("elements");
  nb = read_count("boundary");
  mesh.vertices.resize(mesh.dim, nv);
  for (int i = 0; i < nv; ++i) {
    std::istringstream s(next_line("vertex"));
    std::string tag, tok;
    s >> tag;
    if (tag != "v") throw IoError("load_mesh: expected vertex line");
    for (int k = 0; k < mesh.dim; ++k) {
      s >> tok;
      mesh.vertices(k, i) = parse_double(tok);
    }
  }
  for (int e = 0; e < ne; ++e) {
    std::istringstream s(next_line("element"));
    std::string tag;
    std::array<int, 3> el{-1, -1, -1};
    s >> tag >> el[0] >> el[1];
    if (mesh.dim == 2) s >> el[2];
    if (tag != "e") throw IoError("load_mesh: expected element line");
    mesh.elements.push_back(el);
  }
  for (int fidx = 0; fidx < nb; ++fidx) {
    std::istringstream s(next_line("boundary facet"));
    std::string tag, tok;
    BoundaryFacet f;
    s >> tag >> f.v[0];
    if (mesh.dim == 2) s >> f.v[1];
    s >> f.element;
    s >> tok;
    f.normal[0] = parse_double(tok);
    if (mesh.dim == 2) {
      s >> tok;
      f.normal[1] = parse_double(tok);
    }
    if (tag != "b") throw IoError("load_mesh: expected boundary line");
    mesh.boundary.push_back(f);
  }
  return mesh;
}

}  // namespace msgreen::geom
