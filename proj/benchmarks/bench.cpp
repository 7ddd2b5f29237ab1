// Hot-path microbenchmarks. The training-step numbers are what the
// experiment presets are sized against: multiply steps/sec by the step
// budget of a preset to estimate its wall time on the current machine.

#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "msgreen/experiment.hpp"
#include "msgreen/geom.hpp"
#include "msgreen/msnn.hpp"
#include "msgreen/net.hpp"
#include "msgreen/oracle.hpp"
#include "msgreen/pde.hpp"
#include "msgreen/quad.hpp"
#include "msgreen/train.hpp"

using namespace msgreen;

namespace {

Vec v1(double x) {
  Vec v(1);
  v[0] = x;
  return v;
}

geom::SampleBatch make_batch(int d, int pairs_per_kind, double eps, std::uint64_t seed) {
  const geom::Domain dom =
      d == 1 ? geom::Domain::interval(0.0, 1.0) : geom::Domain::unit_circle();
  geom::SampleCounts counts;
  counts.near_per_y = pairs_per_kind;
  counts.far_per_y = pairs_per_kind;
  counts.boundary_per_y = 2;
  const Vec y = d == 1 ? v1(0.5) : Vec(Vec::Zero(2));
  return geom::sample_batch_at(dom, {y}, counts, eps, seed);
}

// Forward jets (value/grad/hess) of a width-20 network over a full batch.
void BM_JetForward(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  net::Network n = net::Network::mlp(3 * d, {20}, net::Activation::tanh);
  n.init_uniform(1);
  const int batch = 256;
  net::JetEvaluator ev(n, batch);
  Mat Z(3 * d, batch);
  std::mt19937_64 rng(2);
  for (long i = 0; i < Z.size(); ++i) Z.data()[i] = uniform(rng, -1.0, 1.0);
  for (auto _ : state) {
    ev.forward_jets(Z);
    benchmark::DoNotOptimize(ev.value(0));
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_JetForward)->Arg(1)->Arg(2);

// One full optimizer gradient of the three-term loss on a two-scale model;
// this is the per-step cost of stage-2 training.
void BM_TrainingGradient(benchmark::State& state) {
  const int d = 1;
  const int pairs = static_cast<int>(state.range(0));
  const double eps = 0.01;
  const auto batch = make_batch(d, pairs, eps, 7);
  const auto op = pde::OperatorSpec::reaction(d, "one_plus_x2");
  const pde::Mollifier m(eps);
  const auto w = train::LossWeights::defaults(eps, d);
  msnn::MsNet ms = msnn::make_msnet(d, eps, {20}, {20}, net::Activation::tanh, 3);
  Vec gl, gs;
  for (auto _ : state) {
    const auto l = train::loss_with_grad(ms, batch, op, m, w, gl, gs);
    benchmark::DoNotOptimize(l.total);
  }
  state.SetItemsProcessed(state.iterations() * 2 * pairs);
}
BENCHMARK(BM_TrainingGradient)->Arg(100)->Arg(250)->Arg(500);

// Full training steps (gradient + Adam update) via the public driver.
void BM_TrainingSteps(benchmark::State& state) {
  const int d = 1;
  const double eps = 0.1;
  const auto batch = make_batch(d, 100, eps, 7);
  const auto op = pde::OperatorSpec::reaction(d, "one_plus_x2");
  const pde::Mollifier m(eps);
  const auto w = train::LossWeights::defaults(eps, d);
  train::TrainConfig cfg;
  cfg.stage1_steps = 0;
  cfg.stage2_steps = 50;
  cfg.record_every = 50;
  for (auto _ : state) {
    msnn::MsNet ms = msnn::make_msnet(d, eps, {20}, {20}, net::Activation::tanh, 3);
    const auto rep = train::train_staged(ms, batch, op, m, cfg, w);
    benchmark::DoNotOptimize(rep.steps_run);
  }
  state.SetItemsProcessed(state.iterations() * 50);
}
BENCHMARK(BM_TrainingSteps);

// Quadrature solve with the closed-form kernel: 512 elements, 201 points.
void BM_QuadratureSolve(benchmark::State& state) {
  const geom::Mesh fine = geom::coarse_mesh(geom::Domain::interval(0.0, 1.0), 512);
  const quad::QuadratureMesh qm = quad::make_quadrature(fine, 4, 3);
  const quad::Kernel G = [](const Vec& x, const Vec& y) {
    return pde::exact_green_1d(x[0], y[0]);
  };
  const quad::ScalarFn f = [](const Vec& y) { return 9.87 * y[0]; };
  Mat X(1, 201);
  for (int i = 0; i < 201; ++i) X(0, i) = i / 200.0;
  for (auto _ : state) {
    const Vec u = quad::solve_with_green(G, f, qm, X);
    benchmark::DoNotOptimize(u.sum());
  }
}
BENCHMARK(BM_QuadratureSolve);

// Discrete reference kernel on the acceptance-scale 1D grid.
void BM_Reference1d(benchmark::State& state) {
  const auto op = pde::OperatorSpec::reaction(1, "one_plus_x2");
  const geom::Domain dom = geom::Domain::interval(0.0, 1.0);
  const pde::Mollifier m(0.01);
  for (auto _ : state) {
    const auto ref = oracle::reference_green(op, dom, m, v1(0.5), 8192);
    benchmark::DoNotOptimize(ref.values.sum());
  }
}
BENCHMARK(BM_Reference1d);

// Spectral bisection of a 2D coarse mesh into 16 parts.
void BM_Partition(benchmark::State& state) {
  const geom::Mesh mesh = geom::coarse_mesh(geom::Domain::unit_circle(), 800);
  const geom::Graph g = geom::adjacency_graph(mesh);
  for (auto _ : state) {
    const geom::Partition p = geom::partition(g, 16);
    benchmark::DoNotOptimize(p.part_of.data());
  }
}
BENCHMARK(BM_Partition);

}  // namespace

BENCHMARK_MAIN();
