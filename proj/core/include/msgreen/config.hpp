#pragma once

// Experiment configuration: a JSON file with nested sections, parsed
// strictly (unknown keys are errors) into plain structs with defaults, and
// validated against module preconditions before any work starts.

#include "msgreen/common.hpp"
#include "msgreen/geom.hpp"
#include "msgreen/pde.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace msgreen::config {

struct ProblemConfig {
  std::string domain = "interval";  // interval | rectangle | unit_circle
  double a = 0.0, b = 1.0;          // interval bounds
  double ax = 0.0, bx = 1.0, ay = 0.0, by = 1.0;
  std::string operator_kind = "reaction";  // reaction | divergence
  std::string coefficient = "zero";        // zero|one|one_plus_x2|one_plus_r2|identity
  double epsilon = 0.1;

  geom::Domain make_domain() const;
  pde::OperatorSpec make_operator() const;
  int dim() const;
};

struct ArchConfig {
  std::vector<int> large_hidden{20};
  std::vector<int> small_hidden{20};
  std::vector<int> single_hidden{40};  // the single-scale comparison network
  std::string activation = "tanh";     // tanh | arctan
  double alpha = std::numeric_limits<double>::quiet_NaN();  // NaN -> 2 - d
  double beta = 1.0;
};

struct SamplingConfig {
  int y_count = 1;
  int boundary_per_y = 2;
  int near_per_y = 500;
  int far_per_y = 500;

  geom::SampleCounts counts() const;
};

struct TrainingConfig {
  double lr0 = 1e-2;
  double decay = 0.95;
  int decay_every = 500;
  long stage1_steps = 1000;
  long stage2_steps = 4000;
  long minibatch = 0;
  long record_every = 1;
  long eval_every = 500;           // error-trace cadence in fixed-y runs
  std::vector<double> grid_lr0;    // empty -> no grid search
  std::vector<double> grid_decay;  // defaults to {decay} when grid_lr0 is set
  long grid_proxy_steps = 0;       // 0 -> search with the full schedule
};

struct DecompConfig {
  int parts = 1;
  int coarse_elements = 64;
};

struct SolveConfig {
  int fine_elements = 512;  // 1D default; 2D presets raise this
  int gl_points = 4;
  int dunavant_degree = 3;
  int boundary_panels = 64;
  int eval_points = 201;               // per axis in 2D
  std::vector<std::string> solutions;  // manufactured-solution names
};

struct ReferenceConfig {
  int grid_1d = 8192;       // elements of the 1D reference grid
  int fem_elements = 8000;  // target triangle count of the 2D reference mesh
  std::string cache_dir;    // empty -> no disk cache
};

struct ParamHistConfig {
  long check_every = 20000;
  long max_steps = 1000000;
  double threshold = 0.01;  // sup-error convergence target
};

struct ExperimentConfig {
  std::string kind;  // mollifier_study | fixed_y | param_hist | full_solve
  ProblemConfig problem;
  ArchConfig arch;
  SamplingConfig sampling;
  TrainingConfig training;
  DecompConfig decomp;
  SolveConfig solve;
  ReferenceConfig reference;
  ParamHistConfig param_hist;
  std::vector<double> epsilons;      // sweep for mollifier_study / param_hist
  std::vector<Vec> y_points;         // anchors for study/fixed-y/param-hist
  std::vector<std::string> models;   // subset of {multi, large, small}; empty -> all
  std::vector<std::uint64_t> seeds;  // multi-seed runs; falls back to {seed}
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  int workers = 0;  // 0 -> library default

  std::vector<std::uint64_t> seed_list() const;
};

// Parse + validate. ConfigError carries the offending key path.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
void validate(const ExperimentConfig& cfg);

// Canonical JSON echo (sorted keys, round-trip doubles) for run manifests.
std::string config_echo(const ExperimentConfig& cfg);

}  // namespace msgreen::config
