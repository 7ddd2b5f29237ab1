#include "msgreen/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace msgreen::config {

using nlohmann::json;

geom::Domain ProblemConfig::make_domain() const {
  if (domain == "interval") return geom::Domain::interval(a, b);
  if (domain == "rectangle") return geom::Domain::rectangle(ax, bx, ay, by);
  if (domain == "unit_circle") return geom::Domain::unit_circle();
  throw ConfigError("config: problem.domain: unknown domain '" + domain + "'");
}

int ProblemConfig::dim() const { return domain == "interval" ? 1 : 2; }

pde::OperatorSpec ProblemConfig::make_operator() const {
  if (operator_kind == "reaction")
    return pde::OperatorSpec::reaction(dim(), coefficient);
  if (operator_kind == "divergence") return pde::OperatorSpec::divergence(dim(), coefficient);
  throw ConfigError("config: problem.operator: unknown kind '" + operator_kind + "'");
}

geom::SampleCounts SamplingConfig::counts() const {
  geom::SampleCounts c;
  c.y_count = y_count;
  c.boundary_per_y = boundary_per_y;
  c.near_per_y = near_per_y;
  c.far_per_y = far_per_y;
  return c;
}

std::vector<std::uint64_t> ExperimentConfig::seed_list() const {
  return seeds.empty() ? std::vector<std::uint64_t>{seed} : seeds;
}

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& msg) {
  throw ConfigError("config: " + path + ": " + msg);
}

double as_num(const json& v, const std::string& path) {
  if (!v.is_number()) bad(path, "expected a number");
  return v.get<double>();
}

long as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) bad(path, "expected an integer");
  return v.get<long>();
}

std::uint64_t as_u64(const json& v, const std::string& path) {
  if (!v.is_number_unsigned() && !v.is_number_integer()) bad(path, "expected an integer");
  if (v.is_number_integer() && v.get<long long>() < 0) bad(path, "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

std::string as_str(const json& v, const std::string& path) {
  if (!v.is_string()) bad(path, "expected a string");
  return v.get<std::string>();
}

std::vector<int> as_int_list(const json& v, const std::string& path) {
  if (!v.is_array()) bad(path, "expected an array of integers");
  std::vector<int> out;
  for (const auto& e : v) out.push_back(static_cast<int>(as_int(e, path)));
  return out;
}

std::vector<double> as_num_list(const json& v, const std::string& path) {
  if (!v.is_array()) bad(path, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(as_num(e, path));
  return out;
}

std::vector<std::string> as_str_list(const json& v, const std::string& path) {
  if (!v.is_array()) bad(path, "expected an array of strings");
  std::vector<std::string> out;
  for (const auto& e : v) out.push_back(as_str(e, path));
  return out;
}

void parse_problem(const json& j, ProblemConfig& p) {
  for (const auto& [key, v] : j.items()) {
    const std::string path = "problem." + key;
    if (key == "domain") p.domain = as_str(v, path);
    else if (key == "a") p.a = as_num(v, path);
    else if (key == "b") p.b = as_num(v, path);
    else if (key == "ax") p.ax = as_num(v, path);
    else if (key == "bx") p.bx = as_num(v, path);
    else if (key == "ay") p.ay = as_num(v, path);
    else if (key == "by") p.by = as_num(v, path);
    else if (key == "operator") p.operator_kind = as_str(v, path);
    else if (key == "coefficient") p.coefficient = as_str(v, path);
    else if (key == "epsilon") p.epsilon = as_num(v, path);
    else bad(path, "unknown key");
  }
}

void parse_arch(const json& j, ArchConfig& a) {
  for (const auto& [key, v] : j.items()) {
    const std::string path = "arch." + key;
    if (key == "large_hidden") a.large_hidden = as_int_list(v, path);
    else if (key == "small_hidden") a.small_hidden = as_int_list(v, path);
    else if (key == "single_hidden") a.single_hidden = as_int_list(v, path);
    else if (key == "activation") a.activation = as_str(v, path);
    else if (key == "alpha") a.alpha = as_num(v, path);
    else if (key == "beta") a.beta = as_num(v, path);
    else bad(path, "unknown key");
  }
}

void parse_sampling(const json& j, SamplingConfig& s) {
  for (const auto& [key, v] : j.items()) {
    const std::string path = "sampling." + key;
    if (key == "y_count") s.y_count = static_cast<int>(as_int(v, path));
    else if (key == "boundary_per_y") s.boundary_per_y = static_cast<int>(as_int(v, path));
    else if (key == "near_per_y") s.near_per_y = static_cast<int>(as_int(v, path));
    else if (key == "far_per_y") s.far_per_y = static_cast<int>(as_int(v, path));
    else bad(path, "unknown key");
  }
}

void parse_training(const json& j, TrainingConfig& t) {
  for (const auto& [key, v] : j.items()) {
    const std::string path = "training." + key;
    if (key == "lr0") t.lr0 = as_num(v, path);
    else if (key == "decay") t.decay = as_num(v, path);
    else if (key == "decay_every") t.decay_every = static_cast<int>(as_int(v, path));
    else if (key == "stage1_steps") t.stage1_steps = as_int(v, path);
    else if (key == "stage2_steps") t.stage2_steps = as_int(v, path);
    else if (key == "minibatch") t.minibatch = as_int(v, path);
    else if (key == "record_every") t.record_every = as_int(v, path);
    else if (key == "eval_every") t.eval_every = as_int(v, path);
    else if (key == "grid_lr0") t.grid_lr0 = as_num_list(v, path);
    else if (key == "grid_decay") t.grid_decay = as_num_list(v, path);
    else if (key == "grid_proxy_steps") t.grid_proxy_steps = as_int(v, path);
    else bad(path, "unknown key");
  }
}

void parse_decomp(const json& j, DecompConfig& d) {
  for (const auto& [key, v] : j.items()) {
    const std::string path = "decomp." + key;
    if (key == "parts") d.parts = static_cast<int>(as_int(v, path));
    else if (key == "coarse_elements") d.coarse_elements = static_cast<int>(as_int(v, path));
    else bad(path, "unknown key");
  }
}

void parse_solve(const json& j, SolveConfig& s) {
  for (const auto& [key, v] : j.items()) {
    const std::string path = "solve." + key;
    if (key == "fine_elements") s.fine_elements = static_cast<int>(as_int(v, path));
    else if (key == "gl_points") s.gl_points = static_cast<int>(as_int(v, path));
    else if (key == "dunavant_degree") s.dunavant_degree = static_cast<int>(as_int(v, path));
    else if (key == "boundary_panels") s.boundary_panels = static_cast<int>(as_int(v, path));
    else if (key == "eval_points") s.eval_points = static_cast<int>(as_int(v, path));
    else if (key == "solutions") s.solutions = as_str_list(v, path);
    else bad(path, "unknown key");
  }
}

void parse_reference(const json& j, ReferenceConfig& r) {
  for (const auto& [key, v] : j.items()) {
    const std::string path = "reference." + key;
    if (key == "grid_1d") r.grid_1d = static_cast<int>(as_int(v, path));
    else if (key == "fem_elements") r.fem_elements = static_cast<int>(as_int(v, path));
    else if (key == "cache_dir") r.cache_dir = as_str(v, path);
    else bad(path, "unknown key");
  }
}

void parse_param_hist(const json& j, ParamHistConfig& p) {
  for (const auto& [key, v] : j.items()) {
    const std::string path = "param_hist." + key;
    if (key == "check_every") p.check_every = as_int(v, path);
    else if (key == "max_steps") p.max_steps = as_int(v, path);
    else if (key == "threshold") p.threshold = as_num(v, path);
    else bad(path, "unknown key");
  }
}

std::vector<Vec> parse_y_points(const json& v) {
  if (!v.is_array()) bad("y_points", "expected an array");
  std::vector<Vec> out;
  for (const auto& e : v) {
    if (e.is_number()) {
      Vec p(1);
      p[0] = e.get<double>();
      out.push_back(p);
    } else if (e.is_array()) {
      Vec p(static_cast<long>(e.size()));
      long i = 0;
      for (const auto& c : e) p[i++] = as_num(c, "y_points");
      out.push_back(p);
    } else {
      bad("y_points", "entries must be numbers (1D) or coordinate arrays");
    }
  }
  return out;
}

const std::set<std::string> kKinds = {"mollifier_study", "fixed_y", "param_hist",
                                      "full_solve"};
const std::set<std::string> kReactionCoeffs = {"zero", "one", "one_plus_x2", "one_plus_r2"};
const std::set<std::string> kSolutions1d = {"sin_pi", "sin_3pi"};
const std::set<std::string> kSolutions2d = {"product_sin", "one_minus_r2", "bump"};

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("config: invalid JSON: ") + ex.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");

  ExperimentConfig cfg;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "kind") cfg.kind = as_str(v, key);
      else if (key == "problem") parse_problem(v, cfg.problem);
      else if (key == "arch") parse_arch(v, cfg.arch);
      else if (key == "sampling") parse_sampling(v, cfg.sampling);
      else if (key == "training") parse_training(v, cfg.training);
      else if (key == "decomp") parse_decomp(v, cfg.decomp);
      else if (key == "solve") parse_solve(v, cfg.solve);
      else if (key == "reference") parse_reference(v, cfg.reference);
      else if (key == "param_hist") parse_param_hist(v, cfg.param_hist);
      else if (key == "epsilons") cfg.epsilons = as_num_list(v, key);
      else if (key == "y_points") cfg.y_points = parse_y_points(v);
      else if (key == "models") cfg.models = as_str_list(v, key);
      else if (key == "seeds") {
        if (!v.is_array()) bad("seeds", "expected an array of integers");
        for (const auto& e : v) cfg.seeds.push_back(as_u64(e, "seeds"));
      } else if (key == "seed") cfg.seed = as_u64(v, key);
      else if (key == "out_dir") cfg.out_dir = as_str(v, key);
      else if (key == "workers") cfg.workers = static_cast<int>(as_int(v, key));
      else bad(key, "unknown key");
    }
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("config: malformed value: ") + ex.what());
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void validate(const ExperimentConfig& cfg) {
  if (!kKinds.count(cfg.kind))
    bad("kind", "must be one of mollifier_study, fixed_y, param_hist, full_solve");

  const auto& p = cfg.problem;
  if (p.domain != "interval" && p.domain != "rectangle" && p.domain != "unit_circle")
    bad("problem.domain", "unknown domain '" + p.domain + "'");
  if (p.domain == "interval" && !(p.b > p.a)) bad("problem.b", "interval is empty");
  if (p.domain == "rectangle" && !(p.bx > p.ax && p.by > p.ay))
    bad("problem.bx", "rectangle is empty");
  if (p.operator_kind == "reaction") {
    if (!kReactionCoeffs.count(p.coefficient))
      bad("problem.coefficient",
          "reaction-form coefficient must be one of zero, one, one_plus_x2, one_plus_r2");
  } else if (p.operator_kind == "divergence") {
    if (p.coefficient != "identity")
      bad("problem.coefficient", "divergence-form builds ship the identity coefficient only");
  } else {
    bad("problem.operator", "must be 'reaction' or 'divergence'");
  }
  if (!(p.epsilon > 0.0 && p.epsilon <= 1.0)) bad("problem.epsilon", "must lie in (0, 1]");
  for (double e : cfg.epsilons)
    if (!(e > 0.0 && e <= 1.0)) bad("epsilons", "entries must lie in (0, 1]");

  const auto& a = cfg.arch;
  auto check_widths = [](const std::vector<int>& w, const char* where) {
    if (w.empty()) bad(where, "needs at least one hidden layer");
    for (int x : w)
      if (x < 1) bad(where, "widths must be >= 1");
  };
  check_widths(a.large_hidden, "arch.large_hidden");
  check_widths(a.small_hidden, "arch.small_hidden");
  check_widths(a.single_hidden, "arch.single_hidden");
  if (a.activation != "tanh" && a.activation != "arctan")
    bad("arch.activation", "must be 'tanh' or 'arctan'");

  const auto& s = cfg.sampling;
  if (s.y_count < 1) bad("sampling.y_count", "must be >= 1");
  if (s.boundary_per_y < 1) bad("sampling.boundary_per_y", "must be >= 1");
  if (s.near_per_y < 1) bad("sampling.near_per_y", "must be >= 1");
  if (s.far_per_y < 1) bad("sampling.far_per_y", "must be >= 1");

  const auto& t = cfg.training;
  if (!(t.lr0 > 0.0)) bad("training.lr0", "must be positive");
  if (!(t.decay > 0.0 && t.decay <= 1.0)) bad("training.decay", "must lie in (0, 1]");
  if (t.decay_every < 1) bad("training.decay_every", "must be >= 1");
  if (t.stage1_steps < 0 || t.stage2_steps < 0) bad("training.stage1_steps", "must be >= 0");
  if (t.minibatch < 0) bad("training.minibatch", "must be >= 0");
  if (t.record_every < 1) bad("training.record_every", "must be >= 1");
  if (t.eval_every < 1) bad("training.eval_every", "must be >= 1");
  for (double lr : t.grid_lr0)
    if (!(lr >= 1e-4 && lr <= 1e-1)) bad("training.grid_lr0", "entries must lie in [1e-4, 1e-1]");
  for (double dc : t.grid_decay)
    if (!(dc >= 0.9 && dc <= 1.0)) bad("training.grid_decay", "entries must lie in [0.9, 1.0]");
  if (t.grid_proxy_steps < 0) bad("training.grid_proxy_steps", "must be >= 0");

  if (cfg.decomp.parts < 1) bad("decomp.parts", "must be >= 1");
  if (cfg.decomp.coarse_elements < cfg.decomp.parts)
    bad("decomp.coarse_elements", "needs at least one element per part");

  const auto& so = cfg.solve;
  if (so.fine_elements < 1) bad("solve.fine_elements", "must be >= 1");
  if (so.gl_points < 1 || so.gl_points > 20) bad("solve.gl_points", "must lie in [1, 20]");
  if (so.dunavant_degree < 1 || so.dunavant_degree > 5)
    bad("solve.dunavant_degree", "must lie in [1, 5]");
  if (so.boundary_panels < 1) bad("solve.boundary_panels", "must be >= 1");
  if (so.eval_points < 2) bad("solve.eval_points", "must be >= 2");
  const auto& known = p.domain == "interval" ? kSolutions1d : kSolutions2d;
  for (const auto& name : so.solutions)
    if (!known.count(name))
      bad("solve.solutions", "unknown manufactured solution '" + name + "' for this domain");

  if (cfg.reference.grid_1d < 8) bad("reference.grid_1d", "must be >= 8");
  if (cfg.reference.fem_elements < 4) bad("reference.fem_elements", "must be >= 4");

  const auto& ph = cfg.param_hist;
  if (ph.check_every < 1) bad("param_hist.check_every", "must be >= 1");
  if (ph.max_steps < 1) bad("param_hist.max_steps", "must be >= 1");
  if (!(ph.threshold > 0.0)) bad("param_hist.threshold", "must be positive");

  for (const auto& mdl : cfg.models)
    if (mdl != "multi" && mdl != "large" && mdl != "small")
      bad("models", "entries must be 'multi', 'large' or 'small'");

  if (cfg.workers < 0) bad("workers", "must be >= 0");
  if (cfg.out_dir.empty()) bad("out_dir", "must not be empty");

  const int d = p.dim();
  for (const auto& y : cfg.y_points) {
    if (y.size() != d) bad("y_points", "anchor dimension does not match the domain");
    const geom::Domain dom = p.make_domain();
    if (!dom.contains(y) || dom.on_boundary(y))
      bad("y_points", "anchors must lie strictly inside the domain");
  }
}

std::string config_echo(const ExperimentConfig& cfg) {
  json j;
  j["kind"] = cfg.kind;
  json& p = j["problem"];
  p["domain"] = cfg.problem.domain;
  if (cfg.problem.domain == "interval") {
    p["a"] = cfg.problem.a;
    p["b"] = cfg.problem.b;
  } else if (cfg.problem.domain == "rectangle") {
    p["ax"] = cfg.problem.ax;
    p["bx"] = cfg.problem.bx;
    p["ay"] = cfg.problem.ay;
    p["by"] = cfg.problem.by;
  }
  p["operator"] = cfg.problem.operator_kind;
  p["coefficient"] = cfg.problem.coefficient;
  p["epsilon"] = cfg.problem.epsilon;
  json& a = j["arch"];
  a["large_hidden"] = cfg.arch.large_hidden;
  a["small_hidden"] = cfg.arch.small_hidden;
  a["single_hidden"] = cfg.arch.single_hidden;
  a["activation"] = cfg.arch.activation;
  if (!std::isnan(cfg.arch.alpha)) a["alpha"] = cfg.arch.alpha;
  a["beta"] = cfg.arch.beta;
  json& s = j["sampling"];
  s["y_count"] = cfg.sampling.y_count;
  s["boundary_per_y"] = cfg.sampling.boundary_per_y;
  s["near_per_y"] = cfg.sampling.near_per_y;
  s["far_per_y"] = cfg.sampling.far_per_y;
  json& t = j["training"];
  t["lr0"] = cfg.training.lr0;
  t["decay"] = cfg.training.decay;
  t["decay_every"] = cfg.training.decay_every;
  t["stage1_steps"] = cfg.training.stage1_steps;
  t["stage2_steps"] = cfg.training.stage2_steps;
  t["minibatch"] = cfg.training.minibatch;
  t["record_every"] = cfg.training.record_every;
  t["eval_every"] = cfg.training.eval_every;
  t["grid_lr0"] = cfg.training.grid_lr0;
  t["grid_decay"] = cfg.training.grid_decay;
  t["grid_proxy_steps"] = cfg.training.grid_proxy_steps;
  json& dd = j["decomp"];
  dd["parts"] = cfg.decomp.parts;
  dd["coarse_elements"] = cfg.decomp.coarse_elements;
  json& so = j["solve"];
  so["fine_elements"] = cfg.solve.fine_elements;
  so["gl_points"] = cfg.solve.gl_points;
  so["dunavant_degree"] = cfg.solve.dunavant_degree;
  so["boundary_panels"] = cfg.solve.boundary_panels;
  so["eval_points"] = cfg.solve.eval_points;
  so["solutions"] = cfg.solve.solutions;
  json& r = j["reference"];
  r["grid_1d"] = cfg.reference.grid_1d;
  r["fem_elements"] = cfg.reference.fem_elements;
  r["cache_dir"] = cfg.reference.cache_dir;
  json& ph = j["param_hist"];
  ph["check_every"] = cfg.param_hist.check_every;
  ph["max_steps"] = cfg.param_hist.max_steps;
  ph["threshold"] = cfg.param_hist.threshold;
  j["epsilons"] = cfg.epsilons;
  json ys = json::array();
  for (const auto& y : cfg.y_points) {
    json row = json::array();
    for (long i = 0; i < y.size(); ++i) row.push_back(y[i]);
    ys.push_back(row);
  }
  j["y_points"] = ys;
  j["models"] = cfg.models;
  j["seeds"] = cfg.seeds;
  j["seed"] = cfg.seed;
  j["out_dir"] = cfg.out_dir;
  j["workers"] = cfg.workers;
  return j.dump(2);
}

}  // namespace msgreen::config
