#include "msgreen/experiment.hpp"

#include "doctest.h"
#include "msgreen/oracle.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace msgreen;
namespace fs = std::filesystem;

namespace {

Vec v1(double x) {
  Vec v(1);
  v[0] = x;
  return v;
}

Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Minimal 1D config shared by the runner smokes; callers override what they need.
config::ExperimentConfig micro_config(const std::string& kind) {
  config::ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.problem.domain = "interval";
  cfg.problem.coefficient = "zero";
  cfg.problem.epsilon = 0.5;
  cfg.arch.large_hidden = {6};
  cfg.arch.small_hidden = {6};
  cfg.arch.single_hidden = {10};
  cfg.sampling.y_count = 2;
  cfg.sampling.near_per_y = 25;
  cfg.sampling.far_per_y = 25;
  cfg.training.stage1_steps = 20;
  cfg.training.stage2_steps = 30;
  cfg.training.record_every = 10;
  cfg.training.eval_every = 25;
  cfg.reference.grid_1d = 512;
  cfg.solve.fine_elements = 128;
  cfg.solve.eval_points = 33;
  cfg.y_points = {v1(0.4)};
  cfg.seed = 11;
  return cfg;
}

// Central second differences, 1D and five-point 2D.
double fd_neg_lap_1d(const pde::ScalarField& u, double x, double h) {
  return -(u(v1(x + h)) - 2.0 * u(v1(x)) + u(v1(x - h))) / (h * h);
}

double fd_neg_lap_2d(const pde::ScalarField& u, const Vec& p, double h) {
  const double c = u(p);
  const double xx = u(v2(p[0] + h, p[1])) - 2.0 * c + u(v2(p[0] - h, p[1]));
  const double yy = u(v2(p[0], p[1] + h)) - 2.0 * c + u(v2(p[0], p[1] - h));
  return -(xx + yy) / (h * h);
}

}  // namespace

TEST_SUITE_BEGIN("experiment");

TEST_CASE("manufactured solutions vanish on the boundary and match their source terms") {
  const double h = 1e-4;

  SUBCASE("interval families") {
    const geom::Domain dom = geom::Domain::interval(1.0, 3.0);
    for (const char* name : {"sin_pi", "sin_3pi"}) {
      const auto sol = experiment::manufactured_solution(name, dom);
      CHECK(sol.name == name);
      CHECK(std::abs(sol.u(v1(1.0))) < 1e-12);
      CHECK(std::abs(sol.u(v1(3.0))) < 1e-12);
      for (double x : {1.3, 2.0, 2.6})
        CHECK(sol.neg_laplacian(v1(x)) ==
              doctest::Approx(fd_neg_lap_1d(sol.u, x, h)).epsilon(1e-5));
    }
    const auto sp = experiment::manufactured_solution("sin_pi", dom);
    CHECK(sp.u(v1(2.0)) == doctest::Approx(1.0));  // half-period peak
  }

  SUBCASE("rectangle product of sines") {
    const geom::Domain dom = geom::Domain::rectangle(0.0, 2.0, 0.0, 1.0);
    const auto sol = experiment::manufactured_solution("product_sin", dom);
    CHECK(std::abs(sol.u(v2(0.0, 0.5))) < 1e-12);
    CHECK(std::abs(sol.u(v2(2.0, 0.5))) < 1e-12);
    CHECK(std::abs(sol.u(v2(1.3, 0.0))) < 1e-12);
    CHECK(std::abs(sol.u(v2(1.3, 1.0))) < 1e-12);
    for (const Vec& p : {v2(0.5, 0.3), v2(1.5, 0.7)})
      CHECK(sol.neg_laplacian(p) ==
            doctest::Approx(fd_neg_lap_2d(sol.u, p, h)).epsilon(1e-5));
  }

  SUBCASE("unit-circle families") {
    const geom::Domain dom = geom::Domain::unit_circle();
    const auto quad = experiment::manufactured_solution("one_minus_r2", dom);
    CHECK(std::abs(quad.u(v2(1.0, 0.0))) < 1e-12);
    CHECK(quad.u(v2(0.0, 0.0)) == doctest::Approx(1.0));
    CHECK(quad.neg_laplacian(v2(0.3, -0.2)) == doctest::Approx(4.0));

    const auto bump = experiment::manufactured_solution("bump", dom);
    CHECK(std::abs(bump.u(v2(0.0, 1.0))) < 1e-12);
    for (const Vec& p : {v2(0.3, -0.2), v2(-0.5, 0.1)})
      CHECK(bump.neg_laplacian(p) ==
            doctest::Approx(fd_neg_lap_2d(bump.u, p, h)).epsilon(1e-5));
  }

  SUBCASE("name and domain must agree") {
    CHECK_THROWS_AS(
        experiment::manufactured_solution("sin_pi", geom::Domain::unit_circle()),
        ConfigError);
    CHECK_THROWS_AS(
        experiment::manufactured_solution("bump", geom::Domain::interval(0.0, 1.0)),
        ConfigError);
    CHECK_THROWS_AS(
        experiment::manufactured_solution("mystery", geom::Domain::interval(0.0, 1.0)),
        ConfigError);
  }
}

TEST_CASE("manufactured sources are consistent with the reference solver") {
  const geom::Domain dom = geom::Domain::interval(0.0, 1.0);
  const auto sol = experiment::manufactured_solution("sin_pi", dom);

  // Reaction form: feeding the manufactured source into the finite-difference
  // solver must recover the manufactured solution.
  const auto op = pde::OperatorSpec::reaction(1, "one_plus_x2");
  const pde::ScalarField f = experiment::manufactured_rhs(sol, op);
  const auto u = oracle::solve_1d(op.c, f, 2047);
  for (double x : {0.2, 0.5, 0.8})
    CHECK(u.at(x) == doctest::Approx(sol.u(v1(x))).epsilon(1e-5));

  // Divergence form with the identity coefficient reduces to the plain
  // Laplacian, with the sign flipped relative to the reaction convention.
  const auto div = pde::OperatorSpec::divergence(1, "identity");
  const pde::ScalarField g = experiment::manufactured_rhs(sol, div);
  for (double x : {0.2, 0.5, 0.8})
    CHECK(g(v1(x)) == doctest::Approx(-sol.neg_laplacian(v1(x))));

  auto custom = pde::OperatorSpec::divergence(1, "identity");
  custom.coeff_name = "one_plus_x2";
  CHECK_THROWS_AS(experiment::manufactured_rhs(sol, custom), ArgumentError);
}

TEST_CASE("partitioned kernel routes each query to the owning part") {
  const geom::Domain dom = geom::Domain::interval(0.0, 1.0);
  auto coarse = std::make_shared<geom::Mesh>(geom::coarse_mesh(dom, 8));
  const geom::Partition part = geom::partition(geom::adjacency_graph(*coarse), 2);

  std::map<int, msnn::MsNet> models;
  models.emplace(0, msnn::make_msnet(1, 0.5, {6}, {6}, net::Activation::tanh, 101));
  models.emplace(1, msnn::make_msnet(1, 0.5, {6}, {6}, net::Activation::tanh, 202));
  const experiment::PartitionedKernel kernel(coarse, part, std::move(models));

  for (double yv = 0.03; yv < 1.0; yv += 0.06) {
    const Vec y = v1(yv);
    const int e = geom::locate_element(*coarse, y);
    REQUIRE(e >= 0);
    const int expected = part.part_of[static_cast<size_t>(e)];
    CHECK(kernel.route(y) == expected);
    const Vec x = v1(0.37);
    CHECK(kernel.value(x, y) == msnn::ms_eval(kernel.model(expected), x, y));
    CHECK(kernel.grad_y(x, y) == msnn::ms_grad_y(kernel.model(expected), x, y));
  }

  CHECK_THROWS_AS(kernel.route(v1(1.5)), ArgumentError);
  CHECK_THROWS_AS(kernel.model(7), ArgumentError);

  std::map<int, msnn::MsNet> incomplete;
  incomplete.emplace(0, msnn::make_msnet(1, 0.5, {6}, {6}, net::Activation::tanh, 101));
  CHECK_THROWS_AS(experiment::PartitionedKernel(coarse, part, std::move(incomplete)),
                  ArgumentError);

  geom::Partition mismatched;
  mismatched.parts = 1;
  mismatched.part_of = {0, 0, 0};
  std::map<int, msnn::MsNet> one;
  one.emplace(0, msnn::make_msnet(1, 0.5, {6}, {6}, net::Activation::tanh, 101));
  CHECK_THROWS_AS(experiment::PartitionedKernel(coarse, mismatched, std::move(one)),
                  ArgumentError);
}

TEST_CASE("grid evaluation agrees with pointwise kernel calls") {
  const int n = 300;  // crosses the internal batch boundary
  Mat X(1, n);
  for (int i = 0; i < n; ++i) X(0, i) = static_cast<double>(i) / (n - 1);
  const Vec y = v1(0.4);

  const msnn::MsNet ms = msnn::make_msnet(1, 0.5, {8}, {8}, net::Activation::tanh, 33);
  const Vec batched = experiment::eval_kernel_on_grid(ms, X, y);
  REQUIRE(batched.size() == n);
  for (int i = 0; i < n; i += 17)
    CHECK(batched[i] == doctest::Approx(msnn::ms_eval(ms, X.col(i), y)).epsilon(1e-14));

  const Vec large_only = experiment::eval_kernel_on_grid(ms.large, X, y);
  for (int i = 0; i < n; i += 17)
    CHECK(large_only[i] ==
          doctest::Approx(net::eval(ms.large, pde::feature_map(X.col(i), y))).epsilon(1e-14));

  Mat wrong(2, 4);
  wrong.setZero();
  CHECK_THROWS_AS(experiment::eval_kernel_on_grid(ms.large, wrong, y), ArgumentError);
}

TEST_CASE("sup error against a reference field scans every vertex") {
  const geom::Domain dom = geom::Domain::interval(0.0, 1.0);
  const auto op = pde::OperatorSpec::reaction(1, "zero");
  const pde::Mollifier mol(0.1);
  const Vec y = v1(0.4);
  const auto ref = oracle::reference_green(op, dom, mol, y, 256);

  msnn::MsNet zero = msnn::make_msnet(1, 0.1, {6}, {6}, net::Activation::tanh, 5);
  zero.large.params().setZero();
  zero.small.params().setZero();
  CHECK(experiment::sup_error_vs_field(zero, ref, y) == ref.values.cwiseAbs().maxCoeff());

  const msnn::MsNet ms = msnn::make_msnet(1, 0.1, {6}, {6}, net::Activation::tanh, 5);
  double manual = 0.0;
  for (long i = 0; i < ref.mesh->vertices.cols(); ++i)
    manual = std::max(manual,
                      std::abs(msnn::ms_eval(ms, ref.mesh->vertices.col(i), y) -
                               ref.values[i]));
  CHECK(experiment::sup_error_vs_field(ms, ref, y) ==
        doctest::Approx(manual).epsilon(1e-13));
}

TEST_CASE("mollifier study sharpens toward the closed-form kernel") {
  config::ExperimentConfig cfg = micro_config("mollifier_study");
  cfg.epsilons = {1.0, 0.1};
  cfg.y_points = {v1(0.5)};
  cfg.reference.grid_1d = 2048;
  cfg.out_dir = fresh_dir("msgreen_exp_mollifier").string();

  const auto res = experiment::run_mollifier_study(cfg);
  REQUIRE(res.sup_error.rows() == 2);
  REQUIRE(res.sup_error.cols() == 1);
  CHECK(res.sup_error(0, 0) > res.sup_error(1, 0));  // blur shrinks with epsilon
  CHECK(res.sup_error(1, 0) > 0.0);
  CHECK(res.sup_error(1, 0) < 0.05);
  CHECK(fs::exists(res.out_dir / "mollifier_errors.csv"));
  CHECK(fs::exists(res.out_dir / "green_eps0_y0.csv"));
  CHECK(fs::exists(res.out_dir / "green_eps1_y0.csv"));
  CHECK(fs::exists(res.out_dir / "manifest.json"));

  config::ExperimentConfig bad = cfg;
  bad.problem.coefficient = "one";
  CHECK_THROWS_AS(experiment::run_mollifier_study(bad), ConfigError);
}

TEST_CASE("fixed-anchor training writes traces, checkpoints and a summary") {
  config::ExperimentConfig cfg = micro_config("fixed_y");
  cfg.models = {"multi"};
  cfg.seeds = {3};
  cfg.out_dir = fresh_dir("msgreen_exp_fixedy_a").string();

  const auto res = experiment::run_fixed_y(cfg);
  REQUIRE(res.entries.size() == 1);
  CHECK(res.entries[0].model == "multi");
  CHECK(res.entries[0].seed == 3);
  CHECK(res.entries[0].steps == 50);
  CHECK(std::isfinite(res.entries[0].final_sup_error));
  CHECK(res.entries[0].final_sup_error < 1.0);
  for (const char* f : {"anchors.csv", "fixed_y_summary.csv", "fixed_y_errors.csv",
                        "training_multi_y0_seed0.csv", "manifest.json"})
    CHECK(fs::exists(res.out_dir / f));
  CHECK(fs::exists(res.out_dir / "checkpoints" / "multi_y0_seed0.txt"));

  // Same preset, fresh output directory: every data artifact must be
  // byte-identical (timing lives only in the manifest).
  config::ExperimentConfig rerun = cfg;
  rerun.out_dir = fresh_dir("msgreen_exp_fixedy_b").string();
  const auto res2 = experiment::run_fixed_y(rerun);
  for (const char* f : {"anchors.csv", "fixed_y_summary.csv", "fixed_y_errors.csv",
                        "training_multi_y0_seed0.csv"})
    CHECK(slurp(res.out_dir / f) == slurp(res2.out_dir / f));
  CHECK(slurp(res.out_dir / "checkpoints" / "multi_y0_seed0.txt") ==
        slurp(res2.out_dir / "checkpoints" / "multi_y0_seed0.txt"));
}

TEST_CASE("fixed-anchor grid search picks a configured learning rate") {
  config::ExperimentConfig cfg = micro_config("fixed_y");
  cfg.models = {"multi"};
  cfg.seeds = {3};
  cfg.training.stage1_steps = 10;
  cfg.training.stage2_steps = 15;
  cfg.training.grid_lr0 = {1e-2, 3e-2};
  cfg.training.grid_proxy_steps = 10;
  cfg.out_dir = fresh_dir("msgreen_exp_fixedy_grid").string();

  const auto res = experiment::run_fixed_y(cfg);
  CHECK((res.chosen.lr0 == 1e-2 || res.chosen.lr0 == 3e-2));
  CHECK(fs::exists(res.out_dir / "grid_search.csv"));
  const std::string grid = slurp(res.out_dir / "grid_search.csv");
  CHECK(grid.find("chosen") != std::string::npos);
}

TEST_CASE("parameter sweep reports convergence per model and epsilon") {
  config::ExperimentConfig cfg = micro_config("param_hist");
  cfg.epsilons = {1.0};
  cfg.param_hist.check_every = 5;
  cfg.param_hist.max_steps = 15;
  cfg.param_hist.threshold = 10.0;  // trivially met at the first check
  cfg.out_dir = fresh_dir("msgreen_exp_paramhist").string();

  const auto res = experiment::run_param_hist(cfg);
  REQUIRE(res.entries.size() == 3);
  const experiment::ParamHistEntry* by_model[3] = {nullptr, nullptr, nullptr};
  for (const auto& e : res.entries) {
    CHECK(e.epsilon == 1.0);
    CHECK(e.converged);
    CHECK(e.steps == 5);
    CHECK(e.param_stat > 0.0);
    CHECK(e.max_abs_param > 0.0);
    if (e.model == "multi") by_model[0] = &e;
    if (e.model == "large") by_model[1] = &e;
    if (e.model == "small") by_model[2] = &e;
  }
  REQUIRE(by_model[0]);
  REQUIRE(by_model[1]);
  REQUIRE(by_model[2]);
  // At epsilon = 1 the scale transform is the identity and both single-network
  // runs start from the same initialization, so they must coincide exactly.
  CHECK(by_model[1]->sup_error == by_model[2]->sup_error);
  CHECK(by_model[1]->param_stat == by_model[2]->param_stat);
  CHECK(by_model[1]->max_abs_param == by_model[2]->max_abs_param);

  for (const char* f : {"param_hist_summary.csv", "params_multi_eps0.csv",
                        "params_large_eps0.csv", "params_small_eps0.csv",
                        "manifest.json"})
    CHECK(fs::exists(res.out_dir / f));
}

TEST_CASE("full solve trains per part and solves manufactured problems") {
  config::ExperimentConfig cfg = micro_config("full_solve");
  cfg.decomp.parts = 2;
  cfg.decomp.coarse_elements = 12;
  cfg.training.stage1_steps = 60;
  cfg.training.stage2_steps = 120;
  cfg.training.record_every = 20;
  cfg.solve.solutions = {"sin_pi"};
  cfg.reference.grid_1d = 1024;
  cfg.seed = 7;
  cfg.out_dir = fresh_dir("msgreen_exp_fullsolve").string();

  const auto res = experiment::run_full_solve(cfg);
  REQUIRE(res.solutions.size() == 1);
  CHECK(res.solutions[0].name == "sin_pi");
  CHECK(std::isfinite(res.solutions[0].rel_sup_error));
  CHECK(res.solutions[0].rel_sup_error < 1.0);
  CHECK(res.final_loss_mean < res.initial_loss_mean);
  for (const char* f : {"parts.csv", "parts_summary.csv", "training_part0.csv",
                        "training_part1.csv", "kernel_field.csv",
                        "solution_sin_pi.csv", "solve_summary.csv", "manifest.json"})
    CHECK(fs::exists(res.out_dir / f));
  CHECK(fs::exists(res.out_dir / "checkpoints" / "part0.txt"));
  CHECK(fs::exists(res.out_dir / "checkpoints" / "part1.txt"));

  config::ExperimentConfig empty = cfg;
  empty.training.stage1_steps = 0;
  empty.training.stage2_steps = 0;
  empty.out_dir = fresh_dir("msgreen_exp_fullsolve_empty").string();
  CHECK_THROWS_AS(experiment::run_full_solve(empty), ConfigError);
}

TEST_CASE("run dispatches on the configured kind and returns the manifest") {
  config::ExperimentConfig cfg = micro_config("mollifier_study");
  cfg.epsilons = {0.5};
  cfg.y_points = {v1(0.5)};
  cfg.reference.grid_1d = 512;
  cfg.out_dir = fresh_dir("msgreen_exp_dispatch").string();

  const fs::path manifest = experiment::run(cfg);
  CHECK(manifest.filename() == "manifest.json");
  CHECK(fs::exists(manifest));
}

TEST_SUITE_END();
