#pragma once

// End-to-end experiment runners behind the CLI: mollifier accuracy study,
// fixed-anchor kernel training, parameter-magnitude sweeps, and the full
// decompose-train-solve pipeline. Every runner writes CSV outputs plus a
// manifest and returns the summary numbers the tests assert on.

#include "msgreen/common.hpp"
#include "msgreen/config.hpp"
#include "msgreen/geom.hpp"
#include "msgreen/msnn.hpp"
#include "msgreen/oracle.hpp"
#include "msgreen/pde.hpp"
#include "msgreen/train.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace msgreen::experiment {

// --- manufactured solutions -------------------------------------------------

struct Manufactured {
  std::string name;
  pde::ScalarField u;              // vanishes on the domain boundary
  pde::ScalarField neg_laplacian;  // -Laplace u, analytic
};

// Known names: sin_pi, sin_3pi (intervals); product_sin (rectangles);
// one_minus_r2, bump (unit circle). Throws ConfigError for a name/domain
// mismatch.
Manufactured manufactured_solution(const std::string& name, const geom::Domain& dom);

// Source with L u = f for the manufactured u under the given operator.
pde::ScalarField manufactured_rhs(const Manufactured& sol, const pde::OperatorSpec& op);

// --- partitioned kernel -------------------------------------------------------

// Kernel assembled from per-subdomain models; a query (x, y) is routed to
// the model of the part whose coarse element contains y (first match in
// element order, so the route is unique and deterministic).
class PartitionedKernel {
 public:
  PartitionedKernel(std::shared_ptr<const geom::Mesh> coarse, geom::Partition part,
                    std::map<int, msnn::MsNet> models);

  double value(const Vec& x, const Vec& y) const;
  Vec grad_y(const Vec& x, const Vec& y) const;
  int route(const Vec& y) const;  // part id
  const msnn::MsNet& model(int part) const;
  const geom::Partition& partition() const { return part_; }

 private:
  std::shared_ptr<const geom::Mesh> coarse_;
  geom::Partition part_;
  std::map<int, msnn::MsNet> models_;
};

// --- grid evaluation helpers ---------------------------------------------------

// Batched phi(psi(x_i, y)) over the columns of X.
Vec eval_kernel_on_grid(const net::Network& phi, const Mat& X, const Vec& y);
Vec eval_kernel_on_grid(const msnn::MsNet& ms, const Mat& X, const Vec& y);

// max_i |model(x_i, y) - reference(x_i)| over the reference-mesh vertices.
double sup_error_vs_field(const net::Network& phi, const oracle::DiscreteField& ref,
                          const Vec& y);
double sup_error_vs_field(const msnn::MsNet& ms, const oracle::DiscreteField& ref,
                          const Vec& y);

// --- runners -----------------------------------------------------------------

struct MollifierStudyResult {
  std::vector<double> epsilons;
  std::vector<Vec> ys;
  Mat sup_error;  // epsilons x ys
  std::filesystem::path out_dir;
};

// Discrete G_eps vs the exact closed-form kernel over an epsilon sweep.
// Requires the 1D reaction problem with c = zero.
MollifierStudyResult run_mollifier_study(const config::ExperimentConfig& cfg);

struct FixedYEntry {
  std::string model;  // multi | large | small
  int y_index = 0;
  std::uint64_t seed = 0;
  double final_sup_error = 0.0;
  long steps = 0;
};

struct FixedYResult {
  std::vector<FixedYEntry> entries;
  train::TrainConfig chosen;  // after grid search, when configured
  std::filesystem::path out_dir;
};

// Trains the requested models at fixed anchors over the configured seeds,
// logging a sup-error trace every eval_every steps.
FixedYResult run_fixed_y(const config::ExperimentConfig& cfg);

struct ParamHistEntry {
  std::string model;
  double epsilon = 0.0;
  bool converged = false;
  long steps = 0;
  double sup_error = 0.0;
  double param_stat = 0.0;    // Barron-magnitude statistic
  double max_abs_param = 0.0;
};

struct ParamHistResult {
  std::vector<ParamHistEntry> entries;
  std::filesystem::path out_dir;
};

// Trains each requested model per epsilon until the sup error drops below
// the threshold (checked every check_every steps) or the budget runs out;
// non-convergence is reported in the summary, not raised.
ParamHistResult run_param_hist(const config::ExperimentConfig& cfg);

struct FullSolveResult {
  struct SolutionError {
    std::string name;
    double rel_sup_error = 0.0;
  };
  std::vector<SolutionError> solutions;
  double initial_loss_mean = 0.0;  // mean over parts, first recorded step
  double final_loss_mean = 0.0;
  std::filesystem::path out_dir;
};

// Coarse mesh -> spectral partition -> per-part sampling and training ->
// partitioned kernel -> quadrature solves for the configured manufactured
// solutions.
FullSolveResult run_full_solve(const config::ExperimentConfig& cfg);

// Dispatch on cfg.kind. Returns the manifest path.
std::filesystem::path run(const config::ExperimentConfig& cfg);

}  // namespace msgreen::experiment
