#include "msgreen/train.hpp"

#include "msgreen/csv.hpp"
#include "msgreen/parallel.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <mutex>

namespace msgreen::train {

LossWeights LossWeights::defaults(double epsilon, int d) {
  LossWeights w;
  w.w_res = 1.0;
  w.w_bdry = std::pow(epsilon, -d);
  w.w_sym = w.w_bdry;
  return w;
}

double lr_at(const TrainConfig& cfg, long step) {
  return cfg.lr0 * std::pow(cfg.decay, static_cast<double>(step / cfg.decay_every));
}

void adam_step(Vec& params, const Vec& grad, AdamState& st, double lr) {
  require(params.size() == grad.size() && params.size() == st.m.size(),
          "adam_step: shape mismatch");
  st.t += 1;
  const double b1 = st.cfg.beta1, b2 = st.cfg.beta2;
  st.m.array() = b1 * st.m.array() + (1.0 - b1) * grad.array();
  st.v.array() = b2 * st.v.array() + (1.0 - b2) * grad.array().square();
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(st.t));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(st.t));
  params.array() -=
      lr * (st.m.array() / bc1) / ((st.v.array() / bc2).sqrt() + st.cfg.eps);
}

namespace {

constexpr int kChunk = 64;

// Shared engine for loss and loss-gradient over one collocation batch and a
// fixed set of additive network components. Features and the per-pair
// operator/source coefficients are cached once; per-step work is pure
// forward/backward sweeps. All reductions run over fixed-size chunks and are
// combined in chunk order, so results do not depend on the worker count.
class BatchEngine {
 public:
  BatchEngine(std::vector<net::Network*> comps, int dim, const geom::SampleBatch& batch,
              const pde::OperatorSpec& op, const pde::Mollifier& mol, const LossWeights& w)
      : comps_(std::move(comps)), d_(dim), m3_(3 * dim), op_(&op), w_(w) {
    require(!comps_.empty(), "BatchEngine: no components");
    for (auto* c : comps_)
      require(c->input_dim() == m3_, "BatchEngine: component input dim is not 3d");
    require(op.dim == d_, "BatchEngine: operator dimension mismatch");

    n_int_ = static_cast<long>(batch.near_pairs.size() + batch.far_pairs.size());
    n_bdry_ = static_cast<long>(batch.boundary_pairs.size());
    require(n_int_ >= 1, "loss: empty interior pair set");

    Zf_.resize(m3_, n_int_);
    Zs_.resize(m3_, n_int_);
    neps_.resize(static_cast<size_t>(n_int_));
    cx_.resize(static_cast<size_t>(n_int_));
    const bool div_form = op.kind == pde::OperatorSpec::Kind::divergence_form;
    if (div_form) {
      Ax_.resize(static_cast<size_t>(n_int_));
      divAx_.resize(static_cast<size_t>(n_int_));
    }
    long k = 0;
    auto add_pair = [&](const std::pair<Vec, Vec>& p) {
      Zf_.col(k) = pde::feature_map(p.first, p.second);
      Zs_.col(k) = pde::feature_map(p.second, p.first);
      neps_[static_cast<size_t>(k)] = pde::mollifier_value(mol, p.first, p.second);
      if (div_form) {
        Ax_[static_cast<size_t>(k)] = op.A(p.first);
        divAx_[static_cast<size_t>(k)] = op.div_A(p.first);
      } else {
        cx_[static_cast<size_t>(k)] = op.c(p.first);
      }
      ++k;
    };
    for (const auto& p : batch.near_pairs) add_pair(p);
    for (const auto& p : batch.far_pairs) add_pair(p);

    Zb_.resize(m3_, std::max<long>(n_bdry_, 1));
    for (long i = 0; i < n_bdry_; ++i) {
      const auto& p = batch.boundary_pairs[static_cast<size_t>(i)];
      Zb_.col(i) = pde::feature_map(p.first, p.second);
    }

    max_int_chunks_ = (n_int_ + kChunk - 1) / kChunk;
    bdry_chunks_ = (n_bdry_ + kChunk - 1) / kChunk;
    const long total = max_int_chunks_ + bdry_chunks_;
    for (auto* c : comps_)
      grad_slots_.emplace_back(Mat::Zero(c->param_count(), total));
    res_slots_ = Vec::Zero(max_int_chunks_);
    sym_slots_ = Vec::Zero(max_int_chunks_);
    bdry_slots_ = Vec::Zero(std::max<long>(bdry_chunks_, 1));
  }

  long interior_count() const { return n_int_; }

  LossBreakdown compute(std::vector<Vec>* grads, long window_begin = 0,
                        long window_count = -1) {
    const bool full = window_count < 0 || window_count >= n_int_;
    const long wc = full ? n_int_ : window_count;
    const long wb = full ? 0 : ((window_begin % n_int_) + n_int_) % n_int_;
    const long nchunks_int = (wc + kChunk - 1) / kChunk;
    const bool want_grad = grads != nullptr;

    res_slots_.head(nchunks_int).setZero();
    sym_slots_.head(nchunks_int).setZero();
    if (bdry_chunks_ > 0) bdry_slots_.head(bdry_chunks_).setZero();
    if (want_grad)
      for (auto& g : grad_slots_) {
        g.leftCols(nchunks_int).setZero();
        g.middleCols(max_int_chunks_, bdry_chunks_).setZero();
      }

    parallel_chunks(wc, kChunk, [&](long chunk, long b, long e) {
      auto space = acquire();
      interior_chunk(*space, chunk, b, e, wb, wc, full, want_grad);
      release(std::move(space));
    });
    if (n_bdry_ > 0)
      parallel_chunks(n_bdry_, kChunk, [&](long chunk, long b, long e) {
        auto space = acquire();
        boundary_chunk(*space, chunk, b, e, want_grad);
        release(std::move(space));
      });

    LossBreakdown L;
    double res_sum = 0.0, sym_sum = 0.0, bdry_sum = 0.0;
    for (long c = 0; c < nchunks_int; ++c) {
      res_sum += res_slots_[c];
      sym_sum += sym_slots_[c];
    }
    for (long c = 0; c < bdry_chunks_; ++c) bdry_sum += bdry_slots_[c];
    L.res = res_sum / static_cast<double>(wc);
    L.sym = sym_sum / static_cast<double>(wc);
    L.bdry = n_bdry_ > 0 ? bdry_sum / static_cast<double>(n_bdry_) : 0.0;
    L.total = w_.w_bdry * L.bdry + w_.w_res * L.res + w_.w_sym * L.sym;

    if (want_grad) {
      grads->resize(comps_.size());
      for (size_t c = 0; c < comps_.size(); ++c) {
        Vec& g = (*grads)[c];
        g = Vec::Zero(comps_[c]->param_count());
        for (long col = 0; col < nchunks_int; ++col) g += grad_slots_[c].col(col);
        for (long col = 0; col < bdry_chunks_; ++col)
          g += grad_slots_[c].col(max_int_chunks_ + col);
      }
    }
    return L;
  }

 private:
  struct Space {
    std::vector<net::JetEvaluator> evj;  // jets at (x,y), one per component
    std::vector<net::JetEvaluator> evv;  // values at (y,x) / boundary
    std::vector<net::Jet> adj;
    Vec vbar;
    Mat Zwin_f, Zwin_s;  // gather buffers for wrapped minibatch windows
  };

  std::unique_ptr<Space> acquire() {
    std::lock_guard<std::mutex> lock(pool_mu_);
    if (!pool_.empty()) {
      auto s = std::move(pool_.back());
      pool_.pop_back();
      return s;
    }
    auto s = std::make_unique<Space>();
    for (auto* c : comps_) {
      s->evj.emplace_back(*c, kChunk);
      s->evv.emplace_back(*c, kChunk);
    }
    s->adj.assign(kChunk, net::Jet::zero(m3_));
    s->vbar = Vec::Zero(kChunk);
    s->Zwin_f.resize(m3_, kChunk);
    s->Zwin_s.resize(m3_, kChunk);
    return s;
  }
  void release(std::unique_ptr<Space> s) {
    std::lock_guard<std::mutex> lock(pool_mu_);
    pool_.push_back(std::move(s));
  }

  // global interior index of window position i
  long gidx(long i, long wb, bool full) const { return full ? i : (wb + i) % n_int_; }

  void interior_chunk(Space& sp, long chunk, long b, long e, long wb, long wc, bool full,
                      bool want_grad) {
    const int nb = static_cast<int>(e - b);
    const bool contiguous = full || (wb + e) <= n_int_;
    const long g0 = gidx(b, wb, full);
    if (!contiguous) {
      for (int i = 0; i < nb; ++i) {
        sp.Zwin_f.col(i) = Zf_.col(gidx(b + i, wb, full));
        sp.Zwin_s.col(i) = Zs_.col(gidx(b + i, wb, full));
      }
    }
    const auto blk_f =
        contiguous ? Zf_.middleCols(g0, nb) : sp.Zwin_f.middleCols(0, nb);
    const auto blk_s =
        contiguous ? Zs_.middleCols(g0, nb) : sp.Zwin_s.middleCols(0, nb);
    const size_t nc = comps_.size();
    for (size_t c = 0; c < nc; ++c) {
      sp.evj[c].forward_jets(blk_f);
      sp.evv[c].forward_values(blk_s);
    }

    const bool div_form = op_->kind == pde::OperatorSpec::Kind::divergence_form;
    double res_acc = 0.0, sym_acc = 0.0;
    for (int k = 0; k < nb; ++k) {
      const long g = gidx(b + k, wb, full);
      double vf = 0.0, vs = 0.0, Lphi = 0.0;
      for (size_t c = 0; c < nc; ++c) {
        vf += sp.evj[c].value(k);
        vs += sp.evv[c].value(k);
      }
      if (!div_form) {
        double trace = 0.0;
        for (size_t c = 0; c < nc; ++c) {
          const auto& ev = sp.evj[c];
          for (int i = 0; i < d_; ++i)
            trace += ev.jet_hess(k, i, i) + 2.0 * ev.jet_hess(k, i, 2 * d_ + i) +
                     ev.jet_hess(k, 2 * d_ + i, 2 * d_ + i);
        }
        Lphi = -trace - cx_[static_cast<size_t>(g)] * vf;
      } else {
        const Mat& A = Ax_[static_cast<size_t>(g)];
        const Vec& dA = divAx_[static_cast<size_t>(g)];
        for (size_t c = 0; c < nc; ++c) {
          const auto& ev = sp.evj[c];
          for (int i = 0; i < d_; ++i) {
            for (int j = 0; j < d_; ++j) {
              const double hx = ev.jet_hess(k, i, j) + ev.jet_hess(k, i, 2 * d_ + j) +
                                ev.jet_hess(k, 2 * d_ + i, j) +
                                ev.jet_hess(k, 2 * d_ + i, 2 * d_ + j);
              Lphi += A(i, j) * hx;
            }
            Lphi += dA[i] * (ev.jet_grad(k, i) + ev.jet_grad(k, 2 * d_ + i));
          }
        }
      }
      const double r = Lphi - neps_[static_cast<size_t>(g)];
      const double s = vf - vs;
      res_acc += r * r;
      sym_acc += s * s;

      if (want_grad) {
        const double rbar = 2.0 * w_.w_res * r / static_cast<double>(wc);
        const double sbar = 2.0 * w_.w_sym * s / static_cast<double>(wc);
        net::Jet& a = sp.adj[static_cast<size_t>(k)];
        a.value = sbar;
        a.grad.setZero();
        a.hess.setZero();
        if (!div_form) {
          a.value += -rbar * cx_[static_cast<size_t>(g)];
          for (int i = 0; i < d_; ++i) {
            a.hess(i, i) += -rbar;
            a.hess(i, 2 * d_ + i) += -rbar;
            a.hess(2 * d_ + i, i) += -rbar;
            a.hess(2 * d_ + i, 2 * d_ + i) += -rbar;
          }
        } else {
          const Mat& A = Ax_[static_cast<size_t>(g)];
          const Vec& dA = divAx_[static_cast<size_t>(g)];
          for (int i = 0; i < d_; ++i) {
            for (int j = 0; j < d_; ++j) {
              const double wij = rbar * A(i, j);
              a.hess(i, j) += wij;
              a.hess(i, 2 * d_ + j) += wij;
              a.hess(2 * d_ + i, j) += wij;
              a.hess(2 * d_ + i, 2 * d_ + j) += wij;
            }
            a.grad[i] += rbar * dA[i];
            a.grad[2 * d_ + i] += rbar * dA[i];
          }
        }
        sp.vbar[k] = -sbar;
      }
    }
    res_slots_[chunk] = res_acc;
    sym_slots_[chunk] = sym_acc;

    if (want_grad) {
      if (static_cast<int>(sp.adj.size()) != nb) sp.adj.resize(static_cast<size_t>(nb), net::Jet::zero(m3_));
      for (size_t c = 0; c < nc; ++c) {
        auto col = grad_slots_[c].col(chunk);
        Vec g = Vec::Zero(comps_[c]->param_count());
        sp.evj[c].backward_jets(sp.adj, g);
        sp.evv[c].backward_values(sp.vbar.head(nb), g);
        col = g;
      }
      if (static_cast<int>(sp.adj.size()) != kChunk)
        sp.adj.resize(static_cast<size_t>(kChunk), net::Jet::zero(m3_));
    }
  }

  void boundary_chunk(Space& sp, long chunk, long b, long e, bool want_grad) {
    const int nb = static_cast<int>(e - b);
    const size_t nc = comps_.size();
    // each component keeps its own forward trace, so sum values first and
    // run the backward sweeps afterwards
    for (int k = 0; k < nb; ++k) sp.vbar[k] = 0.0;
    for (size_t c = 0; c < nc; ++c) {
      sp.evv[c].forward_values(Zb_.middleCols(b, nb));
      for (int k = 0; k < nb; ++k) sp.vbar[k] += sp.evv[c].value(k);
    }
    double acc = 0.0;
    for (int k = 0; k < nb; ++k) acc += sp.vbar[k] * sp.vbar[k];
    bdry_slots_[chunk] = acc;
    if (want_grad) {
      Vec vb(nb);
      for (int k = 0; k < nb; ++k)
        vb[k] = 2.0 * w_.w_bdry * sp.vbar[k] / static_cast<double>(n_bdry_);
      for (size_t c = 0; c < nc; ++c) {
        Vec g = Vec::Zero(comps_[c]->param_count());
        sp.evv[c].backward_values(vb, g);
        grad_slots_[c].col(max_int_chunks_ + chunk) += g;
      }
    }
  }

  std::vector<net::Network*> comps_;
  int d_, m3_;
  const pde::OperatorSpec* op_;
  LossWeights w_;
  long n_int_ = 0, n_bdry_ = 0;
  long max_int_chunks_ = 0, bdry_chunks_ = 0;
  Mat Zf_, Zs_, Zb_;
  std::vector<double> neps_, cx_;
  std::vector<Mat> Ax_;
  std::vector<Vec> divAx_;
  std::vector<Mat> grad_slots_;
  Vec res_slots_, sym_slots_, bdry_slots_;
  std::mutex pool_mu_;
  std::vector<std::unique_ptr<Space>> pool_;
};

struct RunGuard {
  double initial = std::numeric_limits<double>::quiet_NaN();
  int bad = 0;
};

// Returns true if `stop` ended the run early.
bool run_stage(BatchEngine& eng, std::vector<net::Network*> comps,
               const net::Network* stat_large, const net::Network* stat_small,
               const TrainConfig& cfg, long nsteps, long& global, long record_every,
               TrainReport& rep, RunGuard& guard, const StepObserver& obs,
               const StopFn& stop) {
  std::vector<AdamState> states;
  for (auto* c : comps) states.emplace_back(c->param_count(), cfg.adam);
  std::vector<Vec> grads;
  const long n_int = eng.interior_count();
  const long mb = cfg.minibatch > 0 ? std::min(cfg.minibatch, n_int) : n_int;

  for (long s = 0; s < nsteps; ++s, ++global) {
    const long wb = mb == n_int ? 0 : (global * mb) % n_int;
    const LossBreakdown L = eng.compute(&grads, wb, mb);
    if (!std::isfinite(L.total))
      throw TrainError("training aborted: non-finite loss", global);
    if (std::isnan(guard.initial)) guard.initial = L.total;
    if (L.total > cfg.divergence_factor * guard.initial) {
      if (++guard.bad >= cfg.divergence_patience)
        throw TrainError("training aborted: loss exceeded " +
                             format_double(cfg.divergence_factor) + "x its initial value for " +
                             std::to_string(cfg.divergence_patience) + " consecutive steps",
                         global);
    } else {
      guard.bad = 0;
    }

    const bool recording = global % record_every == 0 || s == nsteps - 1;
    if (recording || stop) {
      StepRecord rec;
      rec.step = global;
      rec.lr = lr_at(cfg, global);
      rec.loss = L;
      rec.stat_large = net::param_magnitude_stat(*stat_large);
      rec.stat_small = stat_small ? net::param_magnitude_stat(*stat_small) : 0.0;
      if (recording) {
        rep.steps.push_back(rec);
        if (obs) obs(rec);
      }
      if (stop && stop(rec)) {
        if (!recording) rep.steps.push_back(rec);  // keep the stopping step
        rep.steps_run = global + 1;
        return true;
      }
    }

    const double lr = lr_at(cfg, global);
    for (size_t c = 0; c < comps.size(); ++c)
      adam_step(comps[c]->params(), grads[c], states[c], lr);
  }
  rep.steps_run = global;
  return false;
}

}  // namespace

LossBreakdown loss(const msnn::MsNet& ms, const geom::SampleBatch& batch,
                   const pde::OperatorSpec& op, const pde::Mollifier& m,
                   const LossWeights& w) {
  auto& mut = const_cast<msnn::MsNet&>(ms);  // engine never writes without grads
  BatchEngine eng({&mut.large, &mut.small}, ms.dim, batch, op, m, w);
  return eng.compute(nullptr);
}

LossBreakdown loss(const net::Network& phi, int dim, const geom::SampleBatch& batch,
                   const pde::OperatorSpec& op, const pde::Mollifier& m,
                   const LossWeights& w) {
  auto& mut = const_cast<net::Network&>(phi);
  BatchEngine eng({&mut}, dim, batch, op, m, w);
  return eng.compute(nullptr);
}

LossBreakdown loss_with_grad(const msnn::MsNet& ms, const geom::SampleBatch& batch,
                             const pde::OperatorSpec& op, const pde::Mollifier& m,
                             const LossWeights& w, Vec& grad_large, Vec& grad_small) {
  auto& mut = const_cast<msnn::MsNet&>(ms);
  BatchEngine eng({&mut.large, &mut.small}, ms.dim, batch, op, m, w);
  std::vector<Vec> grads;
  const LossBreakdown L = eng.compute(&grads);
  grad_large = std::move(grads[0]);
  grad_small = std::move(grads[1]);
  return L;
}

LossBreakdown loss_with_grad(const net::Network& phi, int dim,
                             const geom::SampleBatch& batch, const pde::OperatorSpec& op,
                             const pde::Mollifier& m, const LossWeights& w, Vec& grad) {
  auto& mut = const_cast<net::Network&>(phi);
  BatchEngine eng({&mut}, dim, batch, op, m, w);
  std::vector<Vec> grads;
  const LossBreakdown L = eng.compute(&grads);
  grad = std::move(grads[0]);
  return L;
}

TrainReport train_staged(msnn::MsNet& ms, const geom::SampleBatch& batch,
                         const pde::OperatorSpec& op, const pde::Mollifier& m,
                         const TrainConfig& cfg, const LossWeights& w,
                         const StepObserver& observer, const StopFn& stop) {
  require(ms.large.scale().epsilon == m.epsilon,
          "train_staged: large-component scale epsilon must equal the mollifier epsilon");
  const auto t0 = std::chrono::steady_clock::now();
  TrainReport rep;
  RunGuard guard;
  long global = 0;
  const long rec = std::max<long>(1, cfg.record_every);
  bool stopped = false;
  if (cfg.stage1_steps > 0) {
    BatchEngine eng({&ms.large}, ms.dim, batch, op, m, w);
    stopped = run_stage(eng, {&ms.large}, &ms.large, &ms.small, cfg, cfg.stage1_steps,
                        global, rec, rep, guard, observer, stop);
  }
  if (!stopped && cfg.stage2_steps > 0) {
    BatchEngine eng({&ms.large, &ms.small}, ms.dim, batch, op, m, w);
    run_stage(eng, {&ms.large, &ms.small}, &ms.large, &ms.small, cfg, cfg.stage2_steps,
              global, rec, rep, guard, observer, stop);
  }
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

TrainReport train_single(net::Network& phi, int dim, const geom::SampleBatch& batch,
                         const pde::OperatorSpec& op, const pde::Mollifier& m,
                         const TrainConfig& cfg, const LossWeights& w,
                         const StepObserver& observer, const StopFn& stop) {
  const auto t0 = std::chrono::steady_clock::now();
  TrainReport rep;
  RunGuard guard;
  long global = 0;
  const long rec = std::max<long>(1, cfg.record_every);
  const long total = cfg.stage1_steps + cfg.stage2_steps;
  if (total > 0) {
    BatchEngine eng({&phi}, dim, batch, op, m, w);
    run_stage(eng, {&phi}, &phi, nullptr, cfg, total, global, rec, rep, guard, observer,
              stop);
  }
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

GridResult grid_search(const std::vector<TrainConfig>& grid,
                       const std::function<double(const TrainConfig&)>& train_and_measure) {
  require(!grid.empty(), "grid_search: empty grid");
  for (const auto& cfg : grid) {
    require(cfg.lr0 >= 1e-4 && cfg.lr0 <= 1e-1,
            "grid_search: lr0 must lie in [1e-4, 1e-1]");
    require(cfg.decay >= 0.9 && cfg.decay <= 1.0,
            "grid_search: decay must lie in [0.9, 1.0]");
  }
  GridResult result;
  result.entries.reserve(grid.size());
  size_t best = 0;
  for (size_t i = 0; i < grid.size(); ++i) {
    const double err = train_and_measure(grid[i]);
    result.entries.push_back({grid[i], err});
    const auto& cur = result.entries[i];
    const auto& inc = result.entries[best];
    if (i > 0 && (cur.error < inc.error ||
                  (cur.error == inc.error && cur.cfg.lr0 < inc.cfg.lr0)))
      best = i;
  }
  result.best = result.entries[best].cfg;
  result.best_error = result.entries[best].error;
  return result;
}

std::vector<TrainConfig> make_grid(const TrainConfig& base, const std::vector<double>& lr0s,
                                   const std::vector<double>& decays) {
  std::vector<TrainConfig> grid;
  for (double lr : lr0s)
    for (double dc : decays) {
      TrainConfig c = base;
      c.lr0 = lr;
      c.decay = dc;
      grid.push_back(c);
    }
  return grid;
}

std::map<int, SubdomainResult> train_subdomains(
    const std::vector<int>& part_ids, const std::function<msnn::MsNet(int)>& make_model,
    const std::function<const geom::SampleBatch&(int)>& batch_of,
    const pde::OperatorSpec& op, const pde::Mollifier& m,
    const std::function<TrainConfig(int)>& config_of, const LossWeights& w) {
  const long n = static_cast<long>(part_ids.size());
  std::vector<std::unique_ptr<SubdomainResult>> slots(static_cast<size_t>(n));
  std::vector<std::string> errors(static_cast<size_t>(n));

  parallel_chunks(n, 1, [&](long, long b, long) {
    const int part = part_ids[static_cast<size_t>(b)];
    try {
      auto res = std::make_unique<SubdomainResult>(
          SubdomainResult{make_model(part), TrainReport{}});
      res->report =
          train_staged(res->model, batch_of(part), op, m, config_of(part), w);
      slots[static_cast<size_t>(b)] = std::move(res);
    } catch (const std::exception& ex) {
      errors[static_cast<size_t>(b)] =
          "part " + std::to_string(part) + ": " + ex.what();
    }
  });

  std::string failed;
  for (const auto& e : errors)
    if (!e.empty()) failed += (failed.empty() ? "" : "; ") + e;
  if (!failed.empty()) throw TrainError("train_subdomains: " + failed, -1);

  std::map<int, SubdomainResult> out;
  for (long i = 0; i < n; ++i)
    out.emplace(part_ids[static_cast<size_t>(i)], std::move(*slots[static_cast<size_t>(i)]));
  return out;
}

void write_training_log(const TrainReport& report, const std::filesystem::path& path) {
  CsvWriter csv(path, {"step", "lr", "total", "bdry", "res", "sym", "param_stat_large",
                       "param_stat_small"});
  for (const auto& r : report.steps) {
    csv.field(r.step)
        .field(r.lr)
        .field(r.loss.total)
        .field(r.loss.bdry)
        .field(r.loss.res)
        .field(r.loss.sym)
        .field(r.stat_large)
        .field(r.stat_small);
    csv.end_row();
  }
}

}  // namespace msgreen::train
