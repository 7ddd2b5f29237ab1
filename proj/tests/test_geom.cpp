#include "msgreen/geom.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <queue>
#include <set>

using namespace msgreen;
using geom::Domain;
using geom::Graph;
using geom::Mesh;
using geom::Partition;

namespace {

bool part_connected(const Graph& g, const std::vector<int>& members) {
  if (members.empty()) return false;
  std::set<int> in(members.begin(), members.end());
  std::set<int> seen{members[0]};
  std::queue<int> q;
  q.push(members[0]);
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (int w : g.adj[static_cast<size_t>(v)])
      if (in.count(w) && !seen.count(w)) {
        seen.insert(w);
        q.push(w);
      }
  }
  return seen.size() == in.size();
}

}  // namespace

TEST_SUITE_BEGIN("geom");

TEST_CASE("domains know their geometry") {
  const Domain iv = Domain::interval(0.0, 2.0);
  CHECK(iv.measure() == 2.0);
  Vec p(1);
  p[0] = 1.0;
  CHECK(iv.contains(p));
  p[0] = 2.0;
  CHECK(iv.on_boundary(p));
  p[0] = 2.1;
  CHECK(!iv.contains(p));
  CHECK(iv.name() == "interval[0,2]");

  const Domain rc = Domain::rectangle(-1.0, 1.0, 0.0, 3.0);
  CHECK(rc.measure() == 6.0);
  CHECK(rc.boundary_measure() == 10.0);
  Vec q(2);
  q << 0.0, 1.5;
  CHECK(rc.contains(q));
  q << -1.0, 1.5;
  CHECK(rc.on_boundary(q));

  const Domain cc = Domain::unit_circle();
  CHECK(cc.measure() == doctest::Approx(std::numbers::pi).epsilon(1e-14));
  CHECK(cc.boundary_measure() == doctest::Approx(2 * std::numbers::pi).epsilon(1e-14));
  q << 0.6, 0.8;
  CHECK(cc.on_boundary(q));
  q << 0.6, 0.7;
  CHECK(cc.contains(q));
}

TEST_CASE("interval mesh has evenly spaced vertices") {
  const Mesh m = geom::coarse_mesh(Domain::interval(0.0, 1.0), 4);
  REQUIRE(m.vertex_count() == 5);
  REQUIRE(m.element_count() == 4);
  for (int i = 0; i < 5; ++i) CHECK(m.vertices(0, i) == doctest::Approx(0.25 * i).epsilon(1e-15));
  CHECK(m.boundary.size() == 2);
  CHECK(m.element_measure(0) == doctest::Approx(0.25).epsilon(1e-15));
  const auto bv = m.boundary_vertices();
  REQUIRE(bv.size() == 2);
  CHECK(m.vertices(0, bv[0]) == 0.0);
  CHECK(m.vertices(0, bv[1]) == 1.0);
}

TEST_CASE("rectangle mesh covers the area with oriented triangles") {
  const Domain dom = Domain::rectangle(0.0, 2.0, 0.0, 1.0);
  const Mesh m = geom::coarse_mesh(dom, 16);
  // per-axis rounding may miss the target, but not by more than a factor of 2
  CHECK(m.element_count() >= 8);
  CHECK(m.element_count() <= 32);
  double area = 0.0;
  for (int e = 0; e < m.element_count(); ++e) {
    CHECK(m.element_measure(e) > 0.0);
    area += m.element_measure(e);
  }
  CHECK(area == doctest::Approx(dom.measure()).epsilon(1e-12));
  // every boundary facet's normal points outward
  for (const auto& f : m.boundary) {
    const Vec mid = 0.5 * (m.vertex(f.v[0]) + m.vertex(f.v[1]));
    Vec out = mid + 1e-6 * Vec(f.normal);
    CHECK(!dom.contains(out));
  }
}

TEST_CASE("circle mesh approximates the disk") {
  const Domain dom = Domain::unit_circle();
  const Mesh m = geom::coarse_mesh(dom, 256);
  double area = 0.0;
  for (int e = 0; e < m.element_count(); ++e) area += m.element_measure(e);
  CHECK(area == doctest::Approx(std::numbers::pi).epsilon(0.02));
  for (const auto& f : m.boundary) {
    CHECK(m.vertex(f.v[0]).norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.vertex(f.v[1]).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("locate_element finds the containing element deterministically") {
  const Mesh m1 = geom::coarse_mesh(Domain::interval(0.0, 1.0), 10);
  Vec p(1);
  p[0] = 0.37;
  CHECK(geom::locate_element(m1, p) == 3);
  p[0] = 0.3;  // element boundary: first match in element order
  CHECK(geom::locate_element(m1, p) == 2);
  p[0] = 1.2;
  CHECK(geom::locate_element(m1, p) == -1);

  const Mesh m2 = geom::coarse_mesh(Domain::unit_circle(), 64);
  Vec q(2);
  q << 0.2, 0.1;
  const int e = geom::locate_element(m2, q);
  REQUIRE(e >= 0);
  // barycentric containment: centroid of that element is near q's element
  CHECK(geom::locate_element(m2, m2.element_centroid(e)) == e);
}

TEST_CASE("adjacency graph connects facet-sharing elements") {
  const Mesh m = geom::coarse_mesh(Domain::interval(0.0, 1.0), 5);
  const Graph g = geom::adjacency_graph(m);
  REQUIRE(g.n == 5);
  CHECK(g.adj[0] == std::vector<int>{1});
  CHECK(g.adj[2] == std::vector<int>{1, 3});
  CHECK(g.adj[4] == std::vector<int>{3});
}

TEST_CASE("path graph splits into contiguous halves") {
  const Mesh m = geom::coarse_mesh(Domain::interval(0.0, 1.0), 4);
  const Graph g = geom::adjacency_graph(m);
  const Partition p = geom::partition(g, 2);
  REQUIRE(p.parts == 2);
  CHECK(p.part_of[0] == p.part_of[1]);
  CHECK(p.part_of[2] == p.part_of[3]);
  CHECK(p.part_of[0] != p.part_of[3]);
}

TEST_CASE("partition invariants: cover, balance, connectivity") {
  for (auto [domkind, target, parts] :
       {std::tuple{0, 64, 8}, {1, 128, 8}, {2, 200, 16}}) {
    const Domain dom = domkind == 0   ? Domain::interval(0.0, 1.0)
                       : domkind == 1 ? Domain::rectangle(0.0, 1.0, 0.0, 1.0)
                                      : Domain::unit_circle();
    const Mesh m = geom::coarse_mesh(dom, target);
    const Graph g = geom::adjacency_graph(m);
    const Partition p = geom::partition(g, parts);
    REQUIRE(p.parts == parts);
    REQUIRE(static_cast<int>(p.part_of.size()) == m.element_count());
    const auto members = p.elements_of_part();
    REQUIRE(static_cast<int>(members.size()) == parts);
    size_t total = 0;
    const double mean = static_cast<double>(m.element_count()) / parts;
    for (int k = 0; k < parts; ++k) {
      CHECK(!members[static_cast<size_t>(k)].empty());
      CHECK(static_cast<double>(members[static_cast<size_t>(k)].size()) <= 2.0 * mean);
      CHECK(part_connected(g, members[static_cast<size_t>(k)]));
      total += members[static_cast<size_t>(k)].size();
    }
    CHECK(total == p.part_of.size());
  }
}

TEST_CASE("partition is deterministic") {
  const Mesh m = geom::coarse_mesh(Domain::unit_circle(), 128);
  const Graph g = geom::adjacency_graph(m);
  const Partition a = geom::partition(g, 8);
  const Partition b = geom::partition(g, 8);
  CHECK(a.part_of == b.part_of);
}

TEST_CASE("sampling is seeded, contained, and respects the near radius") {
  const Domain dom = Domain::interval(0.0, 1.0);
  const Mesh m = geom::coarse_mesh(dom, 16);
  const Partition p = geom::partition(geom::adjacency_graph(m), 4);
  geom::SampleCounts counts;
  counts.y_count = 3;
  counts.boundary_per_y = 4;
  counts.near_per_y = 25;
  counts.far_per_y = 25;
  const double eps = 0.05;

  const auto batch = geom::sample_batch(dom, m, p, 1, counts, eps, 42);
  const auto batch2 = geom::sample_batch(dom, m, p, 1, counts, eps, 42);
  const auto other = geom::sample_batch(dom, m, p, 1, counts, eps, 43);

  REQUIRE(batch.y_anchors.size() == 3);
  REQUIRE(batch.near_pairs.size() == 75);
  REQUIRE(batch.far_pairs.size() == 75);
  REQUIRE(batch.boundary_pairs.size() == 12);

  for (size_t i = 0; i < batch.y_anchors.size(); ++i)
    CHECK((batch.y_anchors[i] - batch2.y_anchors[i]).cwiseAbs().maxCoeff() == 0.0);
  bool differs = false;
  for (size_t i = 0; i < batch.y_anchors.size(); ++i)
    differs |= batch.y_anchors[i][0] != other.y_anchors[i][0];
  CHECK(differs);

  // anchors live in elements of part 1
  const auto members = p.elements_of_part();
  const std::set<int> mine(members[1].begin(), members[1].end());
  for (const auto& y : batch.y_anchors) CHECK(mine.count(geom::locate_element(m, y)) == 1);

  for (const auto& [x, y] : batch.near_pairs) {
    CHECK(dom.contains(x));
    CHECK((x - y).norm() <= 2 * eps);
  }
  for (const auto& [x, y] : batch.far_pairs) CHECK(dom.contains(x));
  for (const auto& [x, y] : batch.boundary_pairs) CHECK(dom.on_boundary(x));
}

TEST_CASE("fixed-anchor sampling uses the supplied anchors") {
  const Domain dom = Domain::unit_circle();
  geom::SampleCounts counts;
  counts.boundary_per_y = 6;
  counts.near_per_y = 10;
  counts.far_per_y = 10;
  Vec y(2);
  y << 0.3, 0.3;
  const auto batch = geom::sample_batch_at(dom, {y}, counts, 0.1, 7);
  REQUIRE(batch.y_anchors.size() == 1);
  CHECK((batch.y_anchors[0] - y).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(batch.near_pairs.size() == 10);
  for (const auto& [x, yy] : batch.near_pairs) {
    CHECK((x - y).norm() <= 0.2 + 1e-12);
    CHECK(dom.contains(x));
  }
  for (const auto& [x, yy] : batch.boundary_pairs)
    CHECK(x.norm() == doctest::Approx(1.0).epsilon(1e-12));

  Vec outside(2);
  outside << 2.0, 0.0;
  CHECK_THROWS_AS(geom::sample_batch_at(dom, {outside}, counts, 0.1, 7), ArgumentError);
}

TEST_CASE("mesh save/load round-trips bit-exactly") {
  for (int kind : {0, 1, 2}) {
    const Domain dom = kind == 0   ? Domain::interval(0.25, 0.75)
                       : kind == 1 ? Domain::rectangle(0.0, 1.0, 0.0, 2.0)
                                   : Domain::unit_circle();
    const Mesh m = geom::coarse_mesh(dom, 32);
    const auto path = std::filesystem::temp_directory_path() / "msgreen_mesh.txt";
    geom::save_mesh(m, path);
    const Mesh r = geom::load_mesh(path);
    CHECK(r.dim == m.dim);
    REQUIRE(r.vertex_count() == m.vertex_count());
    REQUIRE(r.element_count() == m.element_count());
    CHECK((r.vertices - m.vertices).cwiseAbs().maxCoeff() == 0.0);
    CHECK(r.elements == m.elements);
    REQUIRE(r.boundary.size() == m.boundary.size());
    for (size_t i = 0; i < r.boundary.size(); ++i) {
      CHECK(r.boundary[i].v == m.boundary[i].v);
      CHECK(r.boundary[i].element == m.boundary[i].element);
      CHECK((r.boundary[i].normal - m.boundary[i].normal).cwiseAbs().maxCoeff() == 0.0);
    }
    std::filesystem::remove(path);
  }
}

TEST_SUITE_END();
