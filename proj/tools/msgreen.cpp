// msgreen: experiment runner. Subcommands load a JSON config, apply the
// command line overrides, validate, run, and print the manifest path. All
// failures emit one machine-readable JSON line on stderr and a nonzero exit.

#include "msgreen/config.hpp"
#include "msgreen/experiment.hpp"
#include "msgreen/parallel.hpp"

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

namespace {

using msgreen::config::ExperimentConfig;

struct CommonOpts {
  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  bool has_seed = false;
  int workers = -1;  // -1: keep the config value
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "output directory (overrides the config)");
  cmd->add_option("--seed", o.seed, "base seed (overrides the config)");
  cmd->add_option("--workers", o.workers, "worker threads, 0 = one per core")
      ->check(CLI::NonNegativeNumber);
}

ExperimentConfig load_with_overrides(const CommonOpts& o) {
  ExperimentConfig cfg = msgreen::config::load_config(o.config_path);
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (o.has_seed) cfg.seed = o.seed;
  if (o.workers >= 0) cfg.workers = o.workers;
  return cfg;
}

void run_kind(const std::string& expected_kind, const CommonOpts& o) {
  ExperimentConfig cfg = load_with_overrides(o);
  if (cfg.kind != expected_kind)
    throw msgreen::ConfigError("config: " + o.config_path + ": kind is '" + cfg.kind +
                               "' but this command runs '" + expected_kind + "'");
  msgreen::config::validate(cfg);
  msgreen::set_workers(cfg.workers);
  const auto manifest = msgreen::experiment::run(cfg);
  std::cout << manifest.string() << "\n";
}

void validate_only(const CommonOpts& o) {
  ExperimentConfig cfg = load_with_overrides(o);
  msgreen::config::validate(cfg);
  std::cout << msgreen::config::config_echo(cfg) << "\n";
}

int fail(const std::string& type, const std::string& message, int code) {
  nlohmann::json j;
  j["error"] = {{"type", type}, {"message", message}};
  std::cerr << j.dump() << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multiscale Green's function learner"};
  app.set_version_flag("--version", msgreen::version_string());
  app.require_subcommand(1);

  CommonOpts o;
  const std::pair<const char*, const char*> kinds[] = {
      {"mollifier-study", "mollifier_study"},
      {"fixed-y", "fixed_y"},
      {"param-hist", "param_hist"},
      {"full-solve", "full_solve"},
  };
  for (const auto& [name, kind] : kinds) {
    CLI::App* cmd = app.add_subcommand(
        name, std::string("run a '") + kind + "' experiment config");
    add_common(cmd, o);
    cmd->parse_complete_callback([kind = std::string(kind), &o, cmd] {
      o.has_seed = cmd->count("--seed") > 0;
      run_kind(kind, o);
    });
  }
  CLI::App* val = app.add_subcommand("validate-config",
                                     "validate a config and print its canonical echo");
  add_common(val, o);
  val->parse_complete_callback([&o, val] {
    o.has_seed = val->count("--seed") > 0;
    validate_only(o);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  } catch (const msgreen::ConfigError& e) {
    return fail("config", e.what(), 2);
  } catch (const msgreen::IoError& e) {
    return fail("io", e.what(), 3);
  } catch (const msgreen::TrainError& e) {
    return fail("train", e.what(), 4);
  } catch (const msgreen::SolverError& e) {
    return fail("solver", e.what(), 4);
  } catch (const msgreen::SamplingError& e) {
    return fail("sampling", e.what(), 4);
  } catch (const msgreen::NumericError& e) {
    return fail("numeric", e.what(), 4);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return 0;
}
