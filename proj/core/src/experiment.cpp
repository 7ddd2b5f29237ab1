#include "msgreen/experiment.hpp"

#include "msgreen/checkpoint.hpp"
#include "msgreen/csv.hpp"
#include "msgreen/net.hpp"
#include "msgreen/parallel.hpp"
#include "msgreen/quad.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace msgreen::experiment {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// stable seed derivation for named sub-runs
std::uint64_t derive_seed(std::uint64_t base, const std::string& salt) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : salt) h = (h ^ c) * 0x100000001b3ULL;
  return splitmix64(base ^ h);
}

double resolved_alpha(const config::ArchConfig& arch, int d) {
  return std::isnan(arch.alpha) ? msnn::default_alpha(d) : arch.alpha;
}

std::vector<std::string> model_list(const config::ExperimentConfig& cfg) {
  return cfg.models.empty() ? std::vector<std::string>{"multi", "large", "small"}
                            : cfg.models;
}

std::vector<Vec> default_anchors(int d) {
  std::vector<Vec> ys;
  if (d == 1) {
    for (double v : {0.5, 0.7, 0.95}) {
      Vec y(1);
      y[0] = v;
      ys.push_back(y);
    }
  } else {
    for (auto [px, py] : {std::pair{0.0, 0.0}, {0.3, 0.3}, {0.65, 0.65}}) {
      Vec y(2);
      y << px, py;
      ys.push_back(y);
    }
  }
  return ys;
}

int reference_resolution(const config::ExperimentConfig& cfg) {
  return cfg.problem.dim() == 1 ? cfg.reference.grid_1d : cfg.reference.fem_elements;
}

oracle::DiscreteField make_reference(const config::ExperimentConfig& cfg,
                                     const pde::OperatorSpec& op, const geom::Domain& dom,
                                     const pde::Mollifier& mol, const Vec& y) {
  const int res = reference_resolution(cfg);
  if (cfg.reference.cache_dir.empty())
    return oracle::reference_green(op, dom, mol, y, res);
  return oracle::reference_green_cached(op, dom, mol, y, res, cfg.reference.cache_dir);
}

void write_manifest(const fs::path& dir, const config::ExperimentConfig& cfg,
                    double wall_seconds, std::vector<std::string> outputs) {
  std::sort(outputs.begin(), outputs.end());
  nlohmann::json j;
  j["config"] = nlohmann::json::parse(config::config_echo(cfg));
  j["version"] = version_string();
  nlohmann::json seeds = nlohmann::json::array();
  for (auto s : cfg.seed_list()) seeds.push_back(s);
  j["seeds"] = seeds;
  j["wall_seconds"] = wall_seconds;
  j["outputs"] = outputs;
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw IoError("cannot write manifest in " + dir.string());
  out << j.dump(2) << "\n";
}

fs::path prepare_out_dir(const config::ExperimentConfig& cfg) {
  fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  return dir;
}

// exact closed-form kernel of -u'' = delta on [a, b] (scaled unit-interval form)
double exact_interval_green(double x, double y, double a, double b) {
  const double L = b - a;
  return L * pde::exact_green_1d((x - a) / L, (y - a) / L);
}

Vec linspace(double a, double b, int n) {
  Vec x(n);
  for (int i = 0; i < n; ++i)
    x[i] = a + (b - a) * (static_cast<double>(i) / (n - 1));
  return x;
}

}  // namespace

// --- manufactured solutions ------------------------------------------------------

Manufactured manufactured_solution(const std::string& name, const geom::Domain& dom) {
  using Kind = geom::Domain::Kind;
  Manufactured sol;
  sol.name = name;
  if (name == "sin_pi" || name == "sin_3pi") {
    if (dom.kind != Kind::interval)
      throw ConfigError("manufactured_solution: '" + name + "' needs an interval domain");
    const double a = dom.a;
    const double w = (name == "sin_pi" ? 1.0 : 3.0) * std::numbers::pi / (dom.b - dom.a);
    sol.u = [a, w](const Vec& x) { return std::sin(w * (x[0] - a)); };
    sol.neg_laplacian = [a, w](const Vec& x) { return w * w * std::sin(w * (x[0] - a)); };
    return sol;
  }
  if (name == "product_sin") {
    if (dom.kind != Kind::rectangle)
      throw ConfigError("manufactured_solution: 'product_sin' needs a rectangle domain");
    const double ax = dom.ax, ay = dom.ay;
    const double wx = std::numbers::pi / (dom.bx - dom.ax);
    const double wy = std::numbers::pi / (dom.by - dom.ay);
    sol.u = [ax, ay, wx, wy](const Vec& x) {
      return std::sin(wx * (x[0] - ax)) * std::sin(wy * (x[1] - ay));
    };
    const double lam = wx * wx + wy * wy;
    auto u = sol.u;
    sol.neg_laplacian = [u, lam](const Vec& x) { return lam * u(x); };
    return sol;
  }
  if (name == "one_minus_r2") {
    if (dom.kind != Kind::unit_circle)
      throw ConfigError("manufactured_solution: 'one_minus_r2' needs the unit circle");
    sol.u = [](const Vec& x) { return 1.0 - x.squaredNorm(); };
    sol.neg_laplacian = [](const Vec&) { return 4.0; };
    return sol;
  }
  if (name == "bump") {
    if (dom.kind != Kind::unit_circle)
      throw ConfigError("manufactured_solution: 'bump' needs the unit circle");
    sol.u = [](const Vec& x) {
      const double t = 1.0 - x.squaredNorm();
      return t * t;
    };
    sol.neg_laplacian = [](const Vec& x) { return 8.0 - 16.0 * x.squaredNorm(); };
    return sol;
  }
  throw ConfigError("manufactured_solution: unknown name '" + name + "'");
}

pde::ScalarField manufactured_rhs(const Manufactured& sol, const pde::OperatorSpec& op) {
  if (op.kind == pde::OperatorSpec::Kind::reaction_form) {
    auto c = op.c;
    auto u = sol.u;
    auto nl = sol.neg_laplacian;
    return [c, u, nl](const Vec& x) { return nl(x) - (c ? c(x) * u(x) : 0.0); };
  }
  if (op.coeff_name != "identity")
    throw ArgumentError("manufactured_rhs: divergence-form sources need the identity coefficient");
  auto nl = sol.neg_laplacian;
  return [nl](const Vec& x) { return -nl(x); };
}

// --- partitioned kernel ---------------------------------------------------------

PartitionedKernel::PartitionedKernel(std::shared_ptr<const geom::Mesh> coarse,
                                     geom::Partition part, std::map<int, msnn::MsNet> models)
    : coarse_(std::move(coarse)), part_(std::move(part)), models_(std::move(models)) {
  require(coarse_ != nullptr, "PartitionedKernel: null coarse mesh");
  require(static_cast<int>(part_.part_of.size()) == coarse_->element_count(),
          "PartitionedKernel: partition does not match the mesh");
  for (int p = 0; p < part_.parts; ++p)
    require(models_.count(p) == 1, "PartitionedKernel: missing model for part " +
                                       std::to_string(p));
}

int PartitionedKernel::route(const Vec& y) const {
  const int e = geom::locate_element(*coarse_, y);
  if (e < 0)
    throw ArgumentError("PartitionedKernel: query point lies outside the coarse mesh");
  return part_.part_of[static_cast<size_t>(e)];
}

const msnn::MsNet& PartitionedKernel::model(int part) const {
  auto it = models_.find(part);
  require(it != models_.end(), "PartitionedKernel: unknown part id");
  return it->second;
}

double PartitionedKernel::value(const Vec& x, const Vec& y) const {
  return msnn::ms_eval(model(route(y)), x, y);
}

Vec PartitionedKernel::grad_y(const Vec& x, const Vec& y) const {
  return msnn::ms_grad_y(model(route(y)), x, y);
}

// --- grid evaluation ---------------------------------------------------------------

Vec eval_kernel_on_grid(const net::Network& phi, const Mat& X, const Vec& y) {
  const int d = static_cast<int>(y.size());
  require(X.rows() == d, "eval_kernel_on_grid: point dimension mismatch");
  require(phi.input_dim() == 3 * d, "eval_kernel_on_grid: network expects 3d inputs");
  const long n = X.cols();
  constexpr int B = 256;
  net::JetEvaluator ev(phi, B);
  Mat Z(3 * d, B);
  Vec out(n);
  for (long b = 0; b < n; b += B) {
    const int nb = static_cast<int>(std::min<long>(B, n - b));
    for (int k = 0; k < nb; ++k) Z.col(k) = pde::feature_map(X.col(b + k), y);
    ev.forward_values(Z.leftCols(nb));
    for (int k = 0; k < nb; ++k) out[b + k] = ev.value(k);
  }
  return out;
}

Vec eval_kernel_on_grid(const msnn::MsNet& ms, const Mat& X, const Vec& y) {
  return eval_kernel_on_grid(ms.large, X, y) + eval_kernel_on_grid(ms.small, X, y);
}

double sup_error_vs_field(const net::Network& phi, const oracle::DiscreteField& ref,
                          const Vec& y) {
  const Vec vals = eval_kernel_on_grid(phi, ref.mesh->vertices, y);
  return (vals - ref.values).cwiseAbs().maxCoeff();
}

double sup_error_vs_field(const msnn::MsNet& ms, const oracle::DiscreteField& ref,
                          const Vec& y) {
  const Vec vals = eval_kernel_on_grid(ms, ref.mesh->vertices, y);
  return (vals - ref.values).cwiseAbs().maxCoeff();
}

// --- mollifier study ---------------------------------------------------------------

MollifierStudyResult run_mollifier_study(const config::ExperimentConfig& cfg) {
  require(cfg.kind == "mollifier_study", "run_mollifier_study: wrong config kind");
  config::validate(cfg);
  if (cfg.problem.dim() != 1 || cfg.problem.operator_kind != "reaction" ||
      cfg.problem.coefficient != "zero")
    throw ConfigError(
        "config: mollifier_study compares against the closed-form kernel and needs the 1D "
        "reaction problem with coefficient 'zero'");

  const auto t0 = Clock::now();
  const geom::Domain dom = cfg.problem.make_domain();
  const pde::OperatorSpec op = cfg.problem.make_operator();
  std::vector<double> eps = cfg.epsilons;
  if (eps.empty()) eps = {1.0, 0.1, 0.01, 0.001};
  std::vector<Vec> ys = cfg.y_points;
  if (ys.empty()) {
    Vec y(1);
    y[0] = 0.95;
    ys.push_back(y);
  }

  const fs::path dir = prepare_out_dir(cfg);
  std::vector<std::string> outputs;
  MollifierStudyResult res;
  res.epsilons = eps;
  res.ys = ys;
  res.sup_error = Mat::Zero(static_cast<long>(eps.size()), static_cast<long>(ys.size()));
  res.out_dir = dir;

  CsvWriter table(dir / "mollifier_errors.csv", {"epsilon", "y", "sup_error"});
  outputs.push_back("mollifier_errors.csv");
  for (size_t i = 0; i < eps.size(); ++i) {
    const pde::Mollifier mol{eps[i]};
    for (size_t j = 0; j < ys.size(); ++j) {
      const Vec& y = ys[j];
      const oracle::DiscreteField ref = make_reference(cfg, op, dom, mol, y);
      const auto& vx = ref.mesh->vertices;
      double sup = 0.0;
      const std::string curve_name =
          "green_eps" + std::to_string(i) + "_y" + std::to_string(j) + ".csv";
      CsvWriter curve(dir / curve_name, {"x", "g_eps", "g_exact"});
      outputs.push_back(curve_name);
      for (int v = 0; v < ref.mesh->vertex_count(); ++v) {
        const double exact = exact_interval_green(vx(0, v), y[0], dom.a, dom.b);
        sup = std::max(sup, std::abs(ref.values[v] - exact));
        curve.field(vx(0, v)).field(ref.values[v]).field(exact);
        curve.end_row();
      }
      res.sup_error(static_cast<long>(i), static_cast<long>(j)) = sup;
      table.field(eps[i]).field(y[0]).field(sup);
      table.end_row();
    }
  }
  write_manifest(dir, cfg, seconds_since(t0), std::move(outputs));
  return res;
}

// --- fixed-anchor training ------------------------------------------------------------

namespace {

struct ModelHandle {
  std::string kind;  // multi | large | small
  std::unique_ptr<msnn::MsNet> multi;
  std::unique_ptr<net::Network> single;

  double sup_error(const oracle::DiscreteField& ref, const Vec& y) const {
    return multi ? sup_error_vs_field(*multi, ref, y) : sup_error_vs_field(*single, ref, y);
  }
};

ModelHandle build_model(const std::string& kind, const config::ExperimentConfig& cfg,
                        int d, std::uint64_t seed) {
  const auto act = net::activation_from_name(cfg.arch.activation);
  const double alpha = resolved_alpha(cfg.arch, d);
  const double eps = cfg.problem.epsilon;
  ModelHandle h;
  h.kind = kind;
  if (kind == "multi") {
    h.multi = std::make_unique<msnn::MsNet>(msnn::make_msnet(
        d, eps, cfg.arch.large_hidden, cfg.arch.small_hidden, act, seed, alpha,
        cfg.arch.beta));
  } else if (kind == "large") {
    net::ScaleParams scale{eps, alpha, cfg.arch.beta};
    h.single = std::make_unique<net::Network>(
        net::Network::mlp(3 * d, cfg.arch.single_hidden, act, scale));
    h.single->init_uniform(seed);
  } else if (kind == "small") {
    h.single = std::make_unique<net::Network>(
        net::Network::mlp(3 * d, cfg.arch.single_hidden, act, net::ScaleParams{}));
    h.single->init_uniform(seed);
  } else {
    throw ConfigError("config: models: unknown model kind '" + kind + "'");
  }
  return h;
}

train::TrainConfig proxy_schedule(train::TrainConfig tc, long proxy_total) {
  if (proxy_total <= 0) return tc;
  const long total = tc.stage1_steps + tc.stage2_steps;
  if (total <= proxy_total) return tc;
  const long s1 = (proxy_total * tc.stage1_steps) / std::max<long>(total, 1);
  tc.stage1_steps = s1;
  tc.stage2_steps = proxy_total - s1;
  return tc;
}

}  // namespace

FixedYResult run_fixed_y(const config::ExperimentConfig& cfg) {
  require(cfg.kind == "fixed_y", "run_fixed_y: wrong config kind");
  config::validate(cfg);
  const auto t0 = Clock::now();
  const int d = cfg.problem.dim();
  const geom::Domain dom = cfg.problem.make_domain();
  const pde::OperatorSpec op = cfg.problem.make_operator();
  const pde::Mollifier mol{cfg.problem.epsilon};
  const train::LossWeights lw = train::LossWeights::defaults(mol.epsilon, d);
  const std::vector<Vec> ys = cfg.y_points.empty() ? default_anchors(d) : cfg.y_points;
  const std::vector<std::string> models = model_list(cfg);
  const std::vector<std::uint64_t> seeds = cfg.seed_list();

  const fs::path dir = prepare_out_dir(cfg);
  std::vector<std::string> outputs;

  // references, one per anchor
  std::vector<oracle::DiscreteField> refs(ys.size());
  for (size_t j = 0; j < ys.size(); ++j) refs[j] = make_reference(cfg, op, dom, mol, ys[j]);

  CsvWriter anchors(dir / "anchors.csv",
                    d == 1 ? std::vector<std::string>{"y_index", "y1"}
                           : std::vector<std::string>{"y_index", "y1", "y2"});
  outputs.push_back("anchors.csv");
  for (size_t j = 0; j < ys.size(); ++j) {
    anchors.field(static_cast<long>(j));
    for (int k = 0; k < d; ++k) anchors.field(ys[j][k]);
    anchors.end_row();
  }

  train::TrainConfig base;
  base.lr0 = cfg.training.lr0;
  base.decay = cfg.training.decay;
  base.decay_every = cfg.training.decay_every;
  base.stage1_steps = cfg.training.stage1_steps;
  base.stage2_steps = cfg.training.stage2_steps;
  base.minibatch = cfg.training.minibatch;
  base.record_every = cfg.training.record_every;

  FixedYResult res;
  res.out_dir = dir;
  res.chosen = base;

  // one batch per anchor, shared by every model and seed at that anchor
  auto batch_for = [&](size_t j, std::uint64_t seed) {
    return geom::sample_batch_at(dom, {ys[j]}, cfg.sampling.counts(), mol.epsilon,
                                 derive_seed(seed, "batch_y" + std::to_string(j)));
  };

  // grid search on the first anchor/seed, proxy budget optional
  if (!cfg.training.grid_lr0.empty()) {
    const std::vector<double> decays =
        cfg.training.grid_decay.empty() ? std::vector<double>{base.decay}
                                        : cfg.training.grid_decay;
    const auto grid =
        train::make_grid(proxy_schedule(base, cfg.training.grid_proxy_steps),
                         cfg.training.grid_lr0, decays);
    const std::string subject = models.front();
    const geom::SampleBatch gbatch = batch_for(0, seeds.front());
    CsvWriter gcsv(dir / "grid_search.csv", {"lr0", "decay", "error", "chosen"});
    outputs.push_back("grid_search.csv");
    const auto measure = [&](const train::TrainConfig& tc) {
      ModelHandle h = build_model(subject, cfg, d, derive_seed(seeds.front(), "grid"));
      try {
        if (h.multi)
          train::train_staged(*h.multi, gbatch, op, mol, tc, lw);
        else
          train::train_single(*h.single, d, gbatch, op, mol, tc, lw);
      } catch (const TrainError&) {
        return std::numeric_limits<double>::infinity();  // diverged -> reject
      }
      return h.sup_error(refs[0], ys[0]);
    };
    const train::GridResult gr = train::grid_search(grid, measure);
    for (const auto& entry : gr.entries) {
      const bool chosen =
          entry.cfg.lr0 == gr.best.lr0 && entry.cfg.decay == gr.best.decay;
      gcsv.field(entry.cfg.lr0).field(entry.cfg.decay).field(entry.error);
      gcsv.field(chosen ? 1 : 0);
      gcsv.end_row();
    }
    base.lr0 = gr.best.lr0;
    base.decay = gr.best.decay;
    res.chosen = base;
  }

  CsvWriter trace(dir / "fixed_y_errors.csv",
                  {"model", "y_index", "seed", "step", "sup_error"});
  outputs.push_back("fixed_y_errors.csv");
  CsvWriter summary(dir / "fixed_y_summary.csv",
                    {"model", "y_index", "seed", "steps", "final_sup_error"});
  outputs.push_back("fixed_y_summary.csv");
  fs::create_directories(dir / "checkpoints");

  const long total_steps = base.stage1_steps + base.stage2_steps;
  for (size_t j = 0; j < ys.size(); ++j) {
    for (size_t si = 0; si < seeds.size(); ++si) {
      const geom::SampleBatch batch = batch_for(j, seeds[si]);
      for (const auto& mdl : models) {
        ModelHandle h = build_model(
            mdl, cfg, d,
            derive_seed(seeds[si], mdl + "_y" + std::to_string(j)));
        const auto observe = [&](const train::StepRecord& rec) {
          if (rec.step % cfg.training.eval_every == 0 || rec.step == total_steps - 1) {
            trace.field(mdl).field(static_cast<long>(j));
            trace.field(std::to_string(seeds[si]));
            trace.field(rec.step).field(h.sup_error(refs[j], ys[j]));
            trace.end_row();
          }
        };
        train::TrainReport rep;
        if (h.multi)
          rep = train::train_staged(*h.multi, batch, op, mol, base, lw, observe);
        else
          rep = train::train_single(*h.single, d, batch, op, mol, base, lw, observe);
        const double err = h.sup_error(refs[j], ys[j]);
        summary.field(mdl).field(static_cast<long>(j));
        summary.field(std::to_string(seeds[si]));
        summary.field(rep.steps_run).field(err);
        summary.end_row();

        const std::string ck = "checkpoints/" + mdl + "_y" + std::to_string(j) +
                               "_seed" + std::to_string(si) + ".txt";
        if (h.multi)
          checkpoint::save_msnet(*h.multi, dir / ck);
        else
          checkpoint::save_network(*h.single, dir / ck);
        outputs.push_back(ck);

        const std::string log = "training_" + mdl + "_y" + std::to_string(j) + "_seed" +
                                std::to_string(si) + ".csv";
        train::write_training_log(rep, dir / log);
        outputs.push_back(log);

        res.entries.push_back(
            {mdl, static_cast<int>(j), seeds[si], err, rep.steps_run});
      }
    }
  }
  write_manifest(dir, cfg, seconds_since(t0), std::move(outputs));
  return res;
}

// --- parameter-magnitude sweep -----------------------------------------------------

namespace {

Vec all_params(const ModelHandle& h) {
  if (h.single) return h.single->params();
  Vec out(h.multi->large.param_count() + h.multi->small.param_count());
  out << h.multi->large.params(), h.multi->small.params();
  return out;
}

double model_stat(const ModelHandle& h) {
  if (h.single) return net::param_magnitude_stat(*h.single);
  return std::max(net::param_magnitude_stat(h.multi->large),
                  net::param_magnitude_stat(h.multi->small));
}

double model_max_abs(const ModelHandle& h) {
  if (h.single) return net::max_abs_param(*h.single);
  return std::max(net::max_abs_param(h.multi->large), net::max_abs_param(h.multi->small));
}

}  // namespace

ParamHistResult run_param_hist(const config::ExperimentConfig& cfg) {
  require(cfg.kind == "param_hist", "run_param_hist: wrong config kind");
  config::validate(cfg);
  const auto t0 = Clock::now();
  const int d = cfg.problem.dim();
  const geom::Domain dom = cfg.problem.make_domain();
  const pde::OperatorSpec op = cfg.problem.make_operator();
  std::vector<double> eps = cfg.epsilons;
  if (eps.empty()) eps = {1.0, 0.1, 0.01};
  Vec y;
  if (cfg.y_points.empty()) {
    y = default_anchors(d).back();  // 0.95 in 1D
  } else {
    y = cfg.y_points.front();
  }
  const std::vector<std::string> models = model_list(cfg);
  const std::uint64_t seed = cfg.seed_list().front();

  const fs::path dir = prepare_out_dir(cfg);
  std::vector<std::string> outputs;
  CsvWriter summary(dir / "param_hist_summary.csv",
                    {"model", "epsilon", "converged", "steps", "sup_error", "param_stat",
                     "max_abs_param"});
  outputs.push_back("param_hist_summary.csv");

  ParamHistResult res;
  res.out_dir = dir;

  for (size_t i = 0; i < eps.size(); ++i) {
    const pde::Mollifier mol{eps[i]};
    const train::LossWeights lw = train::LossWeights::defaults(mol.epsilon, d);
    const oracle::DiscreteField ref = make_reference(cfg, op, dom, mol, y);
    const geom::SampleBatch batch = geom::sample_batch_at(
        dom, {y}, cfg.sampling.counts(), mol.epsilon,
        derive_seed(seed, "ph_batch" + std::to_string(i)));

    for (const auto& mdl : models) {
      // the large/small single-scale pair shares one init seed so that the
      // epsilon = 1 runs coincide exactly
      const std::string salt =
          mdl == "multi" ? "ph_multi_eps" + std::to_string(i) : "ph_single_eps" + std::to_string(i);
      config::ExperimentConfig ecfg = cfg;
      ecfg.problem.epsilon = eps[i];
      ModelHandle h = build_model(mdl, ecfg, d, derive_seed(seed, salt));

      train::TrainConfig tc;
      tc.lr0 = cfg.training.lr0;
      tc.decay = cfg.training.decay;
      tc.decay_every = cfg.training.decay_every;
      tc.minibatch = cfg.training.minibatch;
      tc.record_every = cfg.training.record_every;
      const long budget = cfg.param_hist.max_steps;
      if (mdl == "multi") {
        tc.stage1_steps = std::min(cfg.training.stage1_steps, budget);
        tc.stage2_steps = budget - tc.stage1_steps;
      } else {
        tc.stage1_steps = 0;
        tc.stage2_steps = budget;
      }

      double last_err = std::numeric_limits<double>::quiet_NaN();
      const auto stop = [&](const train::StepRecord& rec) {
        if ((rec.step + 1) % cfg.param_hist.check_every != 0) return false;
        last_err = h.sup_error(ref, y);
        return last_err <= cfg.param_hist.threshold;
      };
      train::TrainReport rep;
      bool diverged = false;
      try {
        if (h.multi)
          rep = train::train_staged(*h.multi, batch, op, mol, tc, lw, {}, stop);
        else
          rep = train::train_single(*h.single, d, batch, op, mol, tc, lw, {}, stop);
      } catch (const TrainError&) {
        diverged = true;  // reported as non-converged, not fatal
      }
      const double err = diverged ? std::numeric_limits<double>::infinity()
                                  : h.sup_error(ref, y);
      const bool converged = err <= cfg.param_hist.threshold;

      const std::string pname = "params_" + mdl + "_eps" + std::to_string(i) + ".csv";
      CsvWriter pcsv(dir / pname, {"value"});
      outputs.push_back(pname);
      const Vec params = all_params(h);
      for (long k = 0; k < params.size(); ++k) {
        pcsv.field(params[k]);
        pcsv.end_row();
      }

      ParamHistEntry entry{mdl,          eps[i], converged, rep.steps_run,
                           err,          model_stat(h),     model_max_abs(h)};
      res.entries.push_back(entry);
      summary.field(mdl).field(eps[i]).field(converged ? 1 : 0).field(entry.steps);
      summary.field(err).field(entry.param_stat).field(entry.max_abs_param);
      summary.end_row();
    }
  }
  write_manifest(dir, cfg, seconds_since(t0), std::move(outputs));
  return res;
}

// --- full solve ----------------------------------------------------------------------

FullSolveResult run_full_solve(const config::ExperimentConfig& cfg) {
  require(cfg.kind == "full_solve", "run_full_solve: wrong config kind");
  config::validate(cfg);
  const auto t0 = Clock::now();
  const int d = cfg.problem.dim();
  const geom::Domain dom = cfg.problem.make_domain();
  const pde::OperatorSpec op = cfg.problem.make_operator();
  const pde::Mollifier mol{cfg.problem.epsilon};
  const train::LossWeights lw = train::LossWeights::defaults(mol.epsilon, d);

  const fs::path dir = prepare_out_dir(cfg);
  std::vector<std::string> outputs;

  // decompose
  auto coarse = std::make_shared<geom::Mesh>(geom::coarse_mesh(dom, cfg.decomp.coarse_elements));
  const geom::Graph graph = geom::adjacency_graph(*coarse);
  geom::Partition part = geom::partition(graph, cfg.decomp.parts);

  {
    CsvWriter pcsv(dir / "parts.csv", {"element", "part"});
    outputs.push_back("parts.csv");
    for (size_t e = 0; e < part.part_of.size(); ++e) {
      pcsv.field(static_cast<long>(e)).field(part.part_of[e]);
      pcsv.end_row();
    }
  }

  // per-part batches and models
  std::vector<int> part_ids(static_cast<size_t>(part.parts));
  for (int p = 0; p < part.parts; ++p) part_ids[static_cast<size_t>(p)] = p;
  std::vector<geom::SampleBatch> batches(static_cast<size_t>(part.parts));
  for (int p = 0; p < part.parts; ++p)
    batches[static_cast<size_t>(p)] = geom::sample_batch(
        dom, *coarse, part, p, cfg.sampling.counts(), mol.epsilon, cfg.seed);

  train::TrainConfig tc;
  tc.lr0 = cfg.training.lr0;
  tc.decay = cfg.training.decay;
  tc.decay_every = cfg.training.decay_every;
  tc.stage1_steps = cfg.training.stage1_steps;
  tc.stage2_steps = cfg.training.stage2_steps;
  tc.minibatch = cfg.training.minibatch;
  tc.record_every = cfg.training.record_every;
  if (tc.stage1_steps + tc.stage2_steps < 1)
    throw ConfigError("config: training: full_solve needs at least one training step");

  const auto act = net::activation_from_name(cfg.arch.activation);
  const double alpha = resolved_alpha(cfg.arch, d);
  auto results = train::train_subdomains(
      part_ids,
      [&](int p) {
        return msnn::make_msnet(d, mol.epsilon, cfg.arch.large_hidden, cfg.arch.small_hidden,
                                act, derive_seed(cfg.seed, "part" + std::to_string(p)),
                                alpha, cfg.arch.beta);
      },
      [&](int p) -> const geom::SampleBatch& { return batches[static_cast<size_t>(p)]; },
      op, mol, [&](int) { return tc; }, lw);

  FullSolveResult res;
  res.out_dir = dir;
  {
    CsvWriter psum(dir / "parts_summary.csv",
                   {"part", "elements", "interior_pairs", "steps", "initial_loss",
                    "final_loss"});
    outputs.push_back("parts_summary.csv");
    const auto elems = part.elements_of_part();
    double init_sum = 0.0, final_sum = 0.0;
    for (int p = 0; p < part.parts; ++p) {
      const auto& r = results.at(p);
      const auto& batch = batches[static_cast<size_t>(p)];
      const double init = r.report.steps.front().loss.total;
      const double fin = r.report.steps.back().loss.total;
      init_sum += init;
      final_sum += fin;
      psum.field(p).field(static_cast<long>(elems[static_cast<size_t>(p)].size()));
      psum.field(static_cast<long>(batch.near_pairs.size() + batch.far_pairs.size()));
      psum.field(r.report.steps_run).field(init).field(fin);
      psum.end_row();

      const std::string log = "training_part" + std::to_string(p) + ".csv";
      train::write_training_log(r.report, dir / log);
      outputs.push_back(log);
      const std::string ck = "checkpoints/part" + std::to_string(p) + ".txt";
      checkpoint::save_msnet(r.model, dir / ck);
      outputs.push_back(ck);
    }
    res.initial_loss_mean = init_sum / part.parts;
    res.final_loss_mean = final_sum / part.parts;
  }

  std::map<int, msnn::MsNet> models;
  for (auto& [p, r] : results) models.emplace(p, std::move(r.model));
  const PartitionedKernel kernel(coarse, part, std::move(models));

  // kernel field on a square grid (1D problems)
  if (d == 1) {
    const Vec grid = linspace(dom.a, dom.b, cfg.solve.eval_points);
    CsvWriter kcsv(dir / "kernel_field.csv", {"x", "y", "value"});
    outputs.push_back("kernel_field.csv");
    Vec xq(1), yq(1);
    for (long j = 0; j < grid.size(); ++j) {
      yq[0] = grid[j];
      if (!dom.contains(yq) || dom.on_boundary(yq)) continue;
      for (long i = 0; i < grid.size(); ++i) {
        xq[0] = grid[i];
        kcsv.field(xq[0]).field(yq[0]).field(kernel.value(xq, yq));
        kcsv.end_row();
      }
    }
  }

  // manufactured solves
  if (!cfg.solve.solutions.empty()) {
    const geom::Mesh fine = geom::coarse_mesh(dom, cfg.solve.fine_elements);
    const quad::QuadratureMesh qm =
        quad::make_quadrature(fine, cfg.solve.gl_points, cfg.solve.dunavant_degree);

    Mat X;
    if (d == 1) {
      const Vec grid = linspace(dom.a, dom.b, cfg.solve.eval_points);
      X.resize(1, grid.size());
      X.row(0) = grid.transpose();
    } else {
      std::vector<Vec> pts;
      const double lox = dom.kind == geom::Domain::Kind::rectangle ? dom.ax : -1.0;
      const double hix = dom.kind == geom::Domain::Kind::rectangle ? dom.bx : 1.0;
      const double loy = dom.kind == geom::Domain::Kind::rectangle ? dom.ay : -1.0;
      const double hiy = dom.kind == geom::Domain::Kind::rectangle ? dom.by : 1.0;
      const Vec gx = linspace(lox, hix, cfg.solve.eval_points);
      const Vec gy = linspace(loy, hiy, cfg.solve.eval_points);
      Vec p(2);
      for (long j = 0; j < gy.size(); ++j)
        for (long i = 0; i < gx.size(); ++i) {
          p << gx[i], gy[j];
          if (dom.contains(p)) pts.push_back(p);
        }
      X.resize(2, static_cast<long>(pts.size()));
      for (size_t k = 0; k < pts.size(); ++k) X.col(static_cast<long>(k)) = pts[k];
    }

    CsvWriter ssum(dir / "solve_summary.csv",
                   {"solution", "sup_error", "sup_reference", "rel_sup_error"});
    outputs.push_back("solve_summary.csv");
    const quad::Kernel kfn = [&kernel](const Vec& x, const Vec& y) {
      return kernel.value(x, y);
    };
    for (const auto& name : cfg.solve.solutions) {
      const Manufactured sol = manufactured_solution(name, dom);
      const pde::ScalarField f = manufactured_rhs(sol, op);
      const Vec u_theta = quad::solve_with_green(kfn, f, qm, X);

      const std::string sname = "solution_" + name + ".csv";
      std::vector<std::string> header;
      if (d == 1) header = {"x", "u_theta", "u_exact", "abs_error"};
      else header = {"x", "y", "u_theta", "u_exact", "abs_error"};
      CsvWriter scsv(dir / sname, header);
      outputs.push_back(sname);
      double sup = 0.0, sup_ref = 0.0;
      for (long i = 0; i < X.cols(); ++i) {
        const double exact = sol.u(X.col(i));
        const double err = std::abs(u_theta[i] - exact);
        sup = std::max(sup, err);
        sup_ref = std::max(sup_ref, std::abs(exact));
        for (int k = 0; k < d; ++k) scsv.field(X(k, i));
        scsv.field(u_theta[i]).field(exact).field(err);
        scsv.end_row();
      }
      const double rel = sup_ref > 0 ? sup / sup_ref : sup;
      ssum.field(name).field(sup).field(sup_ref).field(rel);
      ssum.end_row();
      res.solutions.push_back({name, rel});
    }
  }

  write_manifest(dir, cfg, seconds_since(t0), std::move(outputs));
  return res;
}

std::filesystem::path run(const config::ExperimentConfig& cfg) {
  fs::path dir;
  if (cfg.kind == "mollifier_study") dir = run_mollifier_study(cfg).out_dir;
  else if (cfg.kind == "fixed_y") dir = run_fixed_y(cfg).out_dir;
  else if (cfg.kind == "param_hist") dir = run_param_hist(cfg).out_dir;
  else if (cfg.kind == "full_solve") dir = run_full_solve(cfg).out_dir;
  else throw ConfigError("config: kind: unknown experiment kind '" + cfg.kind + "'");
  return dir / "manifest.json";
}

}  // namespace msgreen::experiment
