#pragma once

// Loss assembly over collocation batches, Adam with step-decayed learning
// rate, the staged (large-scale first, then joint) training schedule, grid
// search, and the per-subdomain parallel training map.

#include "msgreen/common.hpp"
#include "msgreen/geom.hpp"
#include "msgreen/msnn.hpp"
#include "msgreen/net.hpp"
#include "msgreen/pde.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <vector>

namespace msgreen::train {

struct LossWeights {
  double w_res = 1.0;
  double w_bdry = 1.0;
  double w_sym = 1.0;

  // w_res = 1, w_bdry = w_sym = eps^{-d}
  static LossWeights defaults(double epsilon, int d);
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  double lr0 = 1e-2;
  double decay = 1.0;     // multiplicative, applied every decay_every steps
  int decay_every = 500;
  AdamConfig adam;
  long stage1_steps = 0;  // large component alone
  long stage2_steps = 0;  // joint
  std::uint64_t seed = 0; // recorded; model init seeds are derived by callers
  long minibatch = 0;     // 0 = full batch (interior pairs per step otherwise)
  double divergence_factor = 1e6;
  int divergence_patience = 100;
  long record_every = 1;  // StepRecord stride (stage-final steps always kept)
};

// lr(t) = lr0 * decay^floor(t / decay_every), t counted across both stages.
double lr_at(const TrainConfig& cfg, long step);

struct LossBreakdown {
  double total = 0.0;
  double bdry = 0.0;
  double res = 0.0;
  double sym = 0.0;
};

struct StepRecord {
  long step = 0;
  double lr = 0.0;
  LossBreakdown loss;
  double stat_large = 0.0;
  double stat_small = 0.0;  // zero when training a single network
};

struct TrainReport {
  std::vector<StepRecord> steps;
  long steps_run = 0;
  double wall_seconds = 0.0;
};

struct AdamState {
  Vec m, v;
  long t = 0;
  AdamConfig cfg;
  explicit AdamState(int n, AdamConfig c = {})
      : m(Vec::Zero(n)), v(Vec::Zero(n)), cfg(c) {}
};

// Standard bias-corrected update: theta -= lr * mhat / (sqrt(vhat) + eps).
void adam_step(Vec& params, const Vec& grad, AdamState& state, double lr);

// --- losses -------------------------------------------------------------------
//
// L_bdry = mean over boundary pairs of phi(x,y)^2
// L_res  = mean over interior pairs (near then far) of (L phi - N_eps)^2
// L_sym  = mean over interior pairs of (phi(x,y) - phi(y,x))^2
// total  = w_bdry*L_bdry + w_res*L_res + w_sym*L_sym

LossBreakdown loss(const msnn::MsNet& ms, const geom::SampleBatch& batch,
                   const pde::OperatorSpec& op, const pde::Mollifier& m,
                   const LossWeights& w);
LossBreakdown loss(const net::Network& phi, int dim, const geom::SampleBatch& batch,
                   const pde::OperatorSpec& op, const pde::Mollifier& m,
                   const LossWeights& w);

// Loss plus the exact parameter gradient of the weighted total, as consumed
// by the optimizer (one gradient per component). Exposed so the training
// gradient itself can be verified against finite differences.
LossBreakdown loss_with_grad(const msnn::MsNet& ms, const geom::SampleBatch& batch,
                             const pde::OperatorSpec& op, const pde::Mollifier& m,
                             const LossWeights& w, Vec& grad_large, Vec& grad_small);
LossBreakdown loss_with_grad(const net::Network& phi, int dim,
                             const geom::SampleBatch& batch, const pde::OperatorSpec& op,
                             const pde::Mollifier& m, const LossWeights& w, Vec& grad);

using StepObserver = std::function<void(const StepRecord&)>;

// Checked after every step (before the next update); returning true ends the
// run early with the optimizer state intact up to that point.
using StopFn = std::function<bool(const StepRecord&)>;

// Stage 1 trains the large component alone (the small component's parameters
// and its loss contribution are excluded); stage 2 trains both jointly.
// Fresh optimizer state per stage; the decay schedule runs over the global
// step index. Deterministic for fixed inputs and worker counts >= 1.
TrainReport train_staged(msnn::MsNet& ms, const geom::SampleBatch& batch,
                         const pde::OperatorSpec& op, const pde::Mollifier& m,
                         const TrainConfig& cfg, const LossWeights& w,
                         const StepObserver& observer = {}, const StopFn& stop = {});

// Single-network training for stage1_steps + stage2_steps total steps (kept
// as a sum so budgets match the staged schedule).
TrainReport train_single(net::Network& phi, int dim, const geom::SampleBatch& batch,
                         const pde::OperatorSpec& op, const pde::Mollifier& m,
                         const TrainConfig& cfg, const LossWeights& w,
                         const StepObserver& observer = {}, const StopFn& stop = {});

// --- grid search ----------------------------------------------------------------

struct GridEntry {
  TrainConfig cfg;
  double error = 0.0;
};

struct GridResult {
  TrainConfig best;
  double best_error = 0.0;
  std::vector<GridEntry> entries;
};

// Calls train_and_measure for every config (each must train a fresh model)
// and returns the config with the smallest error; ties break toward smaller
// lr0, then first occurrence. Grid bounds are validated:
// lr0 in [1e-4, 1e-1], decay in [0.9, 1.0].
GridResult grid_search(const std::vector<TrainConfig>& grid,
                       const std::function<double(const TrainConfig&)>& train_and_measure);

// Cartesian helper: one config per (lr0, decay) with the remaining fields
// copied from `base`.
std::vector<TrainConfig> make_grid(const TrainConfig& base, const std::vector<double>& lr0s,
                                   const std::vector<double>& decays);

// --- subdomain map ----------------------------------------------------------------

struct SubdomainResult {
  msnn::MsNet model;
  TrainReport report;
};

// Trains one model per part in a worker pool; results are independent of
// execution order and worker count. Per-part failures are aggregated into a
// single TrainError naming every failed part.
std::map<int, SubdomainResult> train_subdomains(
    const std::vector<int>& part_ids,
    const std::function<msnn::MsNet(int)>& make_model,
    const std::function<const geom::SampleBatch&(int)>& batch_of,
    const pde::OperatorSpec& op, const pde::Mollifier& m,
    const std::function<TrainConfig(int)>& config_of, const LossWeights& w);

// Training log CSV: step, lr, total, bdry, res, sym, param_stat_large,
// param_stat_small.
void write_training_log(const TrainReport& report, const std::filesystem::path& path);

}  // namespace msgreen::train
