#pragma once

// Domains, coarse meshing, spectral graph partitioning into connected
// subdomains, and seeded collocation sampling.

#include "msgreen/common.hpp"

#include <array>
#include <filesystem>
#include <vector>

namespace msgreen::geom {

struct Domain {
  enum class Kind { interval, rectangle, unit_circle };

  Kind kind = Kind::interval;
  int dim = 1;
  double a = 0.0, b = 1.0;                       // interval bounds
  double ax = 0.0, bx = 1.0, ay = 0.0, by = 1.0; // rectangle bounds

  static Domain interval(double a, double b);
  static Domain rectangle(double ax, double bx, double ay, double by);
  static Domain unit_circle();

  bool contains(const Vec& p, double tol = 1e-12) const;
  bool on_boundary(const Vec& p, double tol = 1e-10) const;
  double measure() const;           // length / area
  double boundary_measure() const;  // point count (1D) / perimeter
  std::string name() const;
};

// Facet of the domain boundary: a vertex in 1D (v[1] = -1), an edge in 2D.
struct BoundaryFacet {
  std::array<int, 2> v{-1, -1};
  int element = -1;
  Eigen::Vector2d normal{0.0, 0.0};  // outward; (n, 0) in 1D
};

struct Mesh {
  int dim = 1;
  Mat vertices;                              // dim x nv
  std::vector<std::array<int, 3>> elements;  // segments use {v0, v1, -1}
  std::vector<BoundaryFacet> boundary;

  int vertex_count() const { return static_cast<int>(vertices.cols()); }
  int element_count() const { return static_cast<int>(elements.size()); }
  Vec vertex(int i) const { return vertices.col(i); }
  double element_measure(int e) const;  // length / area
  Vec element_centroid(int e) const;
  std::vector<int> boundary_vertices() const;  // sorted, unique
};

// Structured meshes: equal segments (1D), split-quad triangles (rectangle),
// ring triangulation with boundary vertices on the unit circle.
Mesh coarse_mesh(const Domain& dom, int target_elements);

// Index of an element containing p (first match in element order), or -1.
// `hint` is tried first.
int locate_element(const Mesh& mesh, const Vec& p, double tol = 1e-10, int hint = -1);

struct Graph {
  int n = 0;
  std::vector<std::vector<int>> adj;  // sorted neighbor lists
};

// One graph vertex per element; edges between elements sharing a facet.
Graph adjacency_graph(const Mesh& mesh);

struct Partition {
  int parts = 0;
  std::vector<int> part_of;  // element index -> part id in [0, parts)

  std::vector<std::vector<int>> elements_of_part() const;
};

// Recursive spectral bisection (Fiedler vector by power iteration on a
// shifted Laplacian; proportional quantile split; stranded components moved
// to the opposite side). Parts are nonempty, connected, and balanced within
// a factor 2 of the mean size for the mesh graphs used here.
Partition partition(const Graph& g, int p);

struct SampleCounts {
  int y_count = 1;
  int boundary_per_y = 2;
  int near_per_y = 500;
  int far_per_y = 500;
};

// Collocation points for one subdomain. Pairs are stored flattened in
// y-major order: all pairs of y_anchors[0] first.
struct SampleBatch {
  std::vector<Vec> y_anchors;                    // uniform over the part
  std::vector<std::pair<Vec, Vec>> boundary_pairs;  // x on the domain boundary
  std::vector<std::pair<Vec, Vec>> near_pairs;      // |x - y| <= 2 eps, x in domain
  std::vector<std::pair<Vec, Vec>> far_pairs;       // x uniform over the domain
};

// Deterministic given (seed, inputs); the per-part generator is seeded with
// seed XOR part_id so subdomains can be sampled independently in parallel.
// Near points are drawn by rejection from the ball of radius exactly
// 2*epsilon around y intersected with the domain; more than 10,000 rejected
// attempts for one point raise SamplingError.
SampleBatch sample_batch(const Domain& dom, const Mesh& coarse, const Partition& part,
                         int part_id, const SampleCounts& counts, double epsilon,
                         std::uint64_t seed);

// Same pair sampling with the anchors supplied by the caller (fixed-anchor
// experiments). counts.y_count is ignored; anchors must lie in the domain.
SampleBatch sample_batch_at(const Domain& dom, const std::vector<Vec>& y_anchors,
                            const SampleCounts& counts, double epsilon,
                            std::uint64_t seed);

// Plain text mesh round-trip (header with dimension and counts, then vertex,
// element and boundary-facet lines).
void save_mesh(const Mesh& mesh, const std::filesystem::path& path);
Mesh load_mesh(const std::filesystem::path& path);

}  // namespace msgreen::geom
