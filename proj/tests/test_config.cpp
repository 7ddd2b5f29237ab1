#include "msgreen/config.hpp"

#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <string>

using namespace msgreen;
using config::ExperimentConfig;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << body;
  return path;
}

ExperimentConfig parse(const std::string& body) { return config::parse_config(body); }

const std::string kMinimal = R"({
  "kind": "fixed_y",
  "problem": {"domain": "interval", "a": 0.0, "b": 1.0,
              "operator": "reaction", "coefficient": "zero", "epsilon": 0.1}
})";

}  // namespace

TEST_SUITE_BEGIN("config");

TEST_CASE("minimal config parses with documented defaults") {
  const ExperimentConfig cfg = parse(kMinimal);
  CHECK(cfg.kind == "fixed_y");
  CHECK(cfg.problem.epsilon == 0.1);
  CHECK(cfg.problem.dim() == 1);
  CHECK(cfg.arch.large_hidden == std::vector<int>{20});
  CHECK(cfg.arch.single_hidden == std::vector<int>{40});
  CHECK(cfg.arch.activation == "tanh");
  CHECK(cfg.training.lr0 == 1e-2);
  CHECK(cfg.out_dir == "out");
  CHECK(cfg.workers == 0);
  CHECK_NOTHROW(config::validate(cfg));
}

TEST_CASE("unknown keys are rejected with their name") {
  CHECK_THROWS_WITH_AS(parse(R"({"kind": "fixed_y", "bogus": 1})"),
                       doctest::Contains("bogus"), ConfigError);
  const std::string nested = R"({
    "kind": "fixed_y",
    "problem": {"domain": "interval", "operator": "reaction",
                "coefficient": "zero", "typo_here": 3}
  })";
  CHECK_THROWS_WITH_AS(parse(nested), doctest::Contains("typo_here"), ConfigError);
}

TEST_CASE("malformed JSON is a ConfigError, not a crash") {
  CHECK_THROWS_AS(parse("{ not json"), ConfigError);
  CHECK_THROWS_AS(parse(""), ConfigError);
  CHECK_THROWS_AS(parse("[1,2,3]"), ConfigError);
}

TEST_CASE("validation rejects out-of-range values") {
  auto mutate = [&](const std::string& patch_key, const std::string& json_value) {
    // splice a top-level or section override into the minimal config
    std::string body = R"({
      "kind": "fixed_y",
      "problem": {"domain": "interval", "a": 0.0, "b": 1.0,
                  "operator": "reaction", "coefficient": "zero", "epsilon": 0.1},
      )" + patch_key + ": " + json_value + "}";
    return parse(body);
  };
  CHECK_THROWS_AS(config::validate(mutate("\"training\"", R"({"lr0": -1.0})")), ConfigError);
  CHECK_THROWS_AS(config::validate(mutate("\"training\"", R"({"decay": 1.5})")), ConfigError);
  CHECK_THROWS_AS(config::validate(mutate("\"training\"", R"({"grid_lr0": [0.5]})")),
                  ConfigError);
  CHECK_THROWS_AS(config::validate(mutate("\"sampling\"", R"({"near_per_y": 0})")),
                  ConfigError);
  CHECK_THROWS_AS(config::validate(mutate("\"decomp\"", R"({"parts": 0})")), ConfigError);
  CHECK_THROWS_AS(config::validate(mutate("\"decomp\"", R"({"parts": 9, "coarse_elements": 4})")),
                  ConfigError);
  CHECK_THROWS_AS(config::validate(mutate("\"solve\"", R"({"solutions": ["nope"]})")),
                  ConfigError);
  CHECK_THROWS_AS(config::validate(mutate("\"models\"", R"(["giant"])")), ConfigError);
  CHECK_THROWS_AS(config::validate(mutate("\"workers\"", "-1")), ConfigError);
  CHECK_THROWS_AS(config::validate(mutate("\"y_points\"", "[1.5]")), ConfigError);
  CHECK_THROWS_AS(config::validate(mutate("\"y_points\"", "[[0.1, 0.2]]")), ConfigError);
}

TEST_CASE("epsilon bounds") {
  std::string body = R"({
    "kind": "fixed_y",
    "problem": {"domain": "interval", "operator": "reaction",
                "coefficient": "zero", "epsilon": 0.0}
  })";
  CHECK_THROWS_AS(config::validate(parse(body)), ConfigError);
}

TEST_CASE("operator and coefficient combinations") {
  const std::string div_bad = R"({
    "kind": "fixed_y",
    "problem": {"domain": "interval", "operator": "divergence",
                "coefficient": "one_plus_x2", "epsilon": 0.1}
  })";
  CHECK_THROWS_AS(config::validate(parse(div_bad)), ConfigError);
  const std::string div_ok = R"({
    "kind": "fixed_y",
    "problem": {"domain": "interval", "operator": "divergence",
                "coefficient": "identity", "epsilon": 0.1}
  })";
  CHECK_NOTHROW(config::validate(parse(div_ok)));
}

TEST_CASE("2D anchors must match the domain dimension") {
  const std::string body = R"({
    "kind": "fixed_y",
    "problem": {"domain": "unit_circle", "operator": "reaction",
                "coefficient": "one_plus_r2", "epsilon": 0.5},
    "y_points": [[0.3, 0.3], [0.0, 0.0]]
  })";
  const ExperimentConfig cfg = parse(body);
  CHECK_NOTHROW(config::validate(cfg));
  REQUIRE(cfg.y_points.size() == 2);
  CHECK(cfg.y_points[0].size() == 2);
  CHECK(cfg.y_points[0][0] == 0.3);

  const std::string wrong = R"({
    "kind": "fixed_y",
    "problem": {"domain": "unit_circle", "operator": "reaction",
                "coefficient": "one_plus_r2", "epsilon": 0.5},
    "y_points": [0.3]
  })";
  CHECK_THROWS_AS(config::validate(parse(wrong)), ConfigError);
}

TEST_CASE("seed_list prefers the explicit list") {
  ExperimentConfig cfg = parse(kMinimal);
  cfg.seed = 9;
  CHECK(cfg.seed_list() == std::vector<std::uint64_t>{9});
  cfg.seeds = {1, 2, 3};
  CHECK(cfg.seed_list() == std::vector<std::uint64_t>{1, 2, 3});
}

TEST_CASE("config echo is canonical and reparses to the same echo") {
  const ExperimentConfig cfg = parse(kMinimal);
  const std::string echo = config::config_echo(cfg);
  const ExperimentConfig back = config::parse_config(echo);
  CHECK(config::config_echo(back) == echo);
  CHECK(echo.find("fixed_y") != std::string::npos);
}

TEST_CASE("load_config reads files and reports missing ones") {
  const auto path = write_temp("msgreen_cfg_test.json", kMinimal);
  const ExperimentConfig cfg = config::load_config(path);
  CHECK(cfg.kind == "fixed_y");
  std::filesystem::remove(path);
  CHECK_THROWS_AS(config::load_config(path), ConfigError);
}

TEST_SUITE_END();
