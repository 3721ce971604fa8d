#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "dpeigen/commands.hpp"
#include "dpeigen/run_config.hpp"

using namespace dpeigen;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

const char* kSolveConfig =
    "domain = interval\n"
    "a = 0\n"
    "b = 1\n"
    "elements = 40\n"
    "p1 = 2.8\n"
    "p2 = 1.5\n"
    "q = 2\n"
    "seed = 9\n"
    "threads = 1\n"
    "restarts = 2\n";

}  // namespace

TEST_SUITE("config_cli") {

TEST_CASE("parser covers every recognized key") {
  RunConfig c = parse_run_config(
      "# full configuration\n"
      "domain = rectangle\n"
      "x0 = -1\n"
      "x1 = 2\n"
      "y0 = 0.5\n"
      "y1 = 1.5\n"
      "elements_x = 12\n"
      "elements_y = 10\n"
      "a = 3\n"
      "b = 4\n"
      "elements = 33\n"
      "p1 = 2.8 + 0.1*x\n"
      "p2 = 1.5\n"
      "q = 2 + 0.05*y\n"
      "epsilon = 1e-9\n"
      "seed = 123\n"
      "threads = 2\n"
      "out = results/run1\n"
      "max_iterations = 900\n"
      "gradient_tolerance = 1e-7\n"
      "initial_step = 0.5\n"
      "step_shrink = 0.4\n"
      "armijo_constant = 1e-3\n"
      "restarts = 5\n"
      "allow_degenerate = true\n"
      "triviality_threshold = 1e-5\n"
      "lambda_grid = 1, 2.5, 10\n"
      "validate_trials = 77\n");

  CHECK(c.domain.kind == DomainSpec::Kind::rectangle);
  CHECK(c.domain.x0 == -1.0);
  CHECK(c.domain.x1 == 2.0);
  CHECK(c.domain.y0 == 0.5);
  CHECK(c.domain.y1 == 1.5);
  CHECK(c.domain.elements_x == 12);
  CHECK(c.domain.elements_y == 10);
  CHECK(c.domain.a == 3.0);
  CHECK(c.domain.elements == 33);
  CHECK(c.p1_expression == "2.8 + 0.1*x");
  CHECK(c.p2_expression == "1.5");
  CHECK(c.q_expression == "2 + 0.05*y");
  CHECK(c.epsilon == 1e-9);
  CHECK(c.solver.rng_seed == 123);
  CHECK(c.solver.threads == 2);
  CHECK(c.output_directory == "results/run1");
  CHECK(c.solver.max_iterations == 900);
  CHECK(c.solver.gradient_tolerance == 1e-7);
  CHECK(c.solver.initial_step == 0.5);
  CHECK(c.solver.step_shrink == 0.4);
  CHECK(c.solver.armijo_constant == 1e-3);
  CHECK(c.solver.restarts == 5);
  CHECK(c.solver.allow_degenerate);
  CHECK(c.solver.triviality_threshold == 1e-5);
  CHECK(c.lambda_grid == std::vector<double>({1.0, 2.5, 10.0}));
  CHECK(c.validate_trials == 77);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("parser reports precise errors") {
  try {
    parse_run_config("elements = 10\n\nelements = 20\n");
    FAIL("expected a duplicate-key error");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("duplicate key 'elements'") !=
          std::string::npos);
    CHECK(std::string(e.what()).find("first on line 1") != std::string::npos);
  }

  try {
    parse_run_config("p1 = 2.8\nwidgets = 4\n");
    FAIL("expected an unknown-key error");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("unknown key 'widgets'") !=
          std::string::npos);
  }

  CHECK_THROWS_AS(parse_run_config("elements = ten\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("just words\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("= 5\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("domain = disk\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("allow_degenerate = maybe\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("lambda_grid = \n"), ConfigError);

  // comments and blank lines never trip the parser
  RunConfig ok = parse_run_config("\n# note\n  \nelements = 8  # inline\n");
  CHECK(ok.domain.elements == 8);
}

TEST_CASE("structural validation rejects incomplete configurations") {
  auto invalid = [](const std::string& text) {
    RunConfig c = parse_run_config(text);
    CHECK_THROWS_AS(c.validate(), ConfigError);
  };
  invalid("p2 = 1.5\nq = 2\n");                       // missing p1
  invalid("p1 = 2.8\nq = 2\n");                       // missing p2
  invalid("p1 = 2.8\np2 = 1.5\n");                    // missing q
  invalid("p1 = 2.8\np2 = 1.5\nq = 2\nepsilon = 0\n");
  invalid("p1 = 2.8\np2 = 1.5\nq = 2\na = 2\nb = 1\n");
  invalid("p1 = 2.8\np2 = 1.5\nq = 2\nelements = 1\n");
  invalid("p1 = 2.8\np2 = 1.5\nq = 2\nvalidate_trials = 0\n");
  invalid("p1 = 2.8\np2 = 1.5\nq = 2\nlambda_grid = 1, -2\n");
  invalid("p1 = 2.8\np2 = 1.5\nq = 2\nrestarts = 0\n");
  invalid("p1 = 2.8\np2 = 1.5\nq = 2\ndomain = rectangle\nx0 = 2\nx1 = 1\n");
}

TEST_CASE("canonical text and hash are deterministic") {
  RunConfig a = parse_run_config("p1 = 2.8\np2 = 1.5\nq = 2\nseed = 4\n");
  RunConfig b = parse_run_config("seed = 4\nq = 2\np2 = 1.5\np1 = 2.8\n");
  CHECK(canonical_config_text(a) == canonical_config_text(b));
  CHECK(config_hash(a) == config_hash(b));

  const std::string hash = config_hash(a);
  CHECK(hash.size() == 16);
  for (const char ch : hash) {
    const bool hex = (ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'f');
    CHECK(hex);
  }

  RunConfig c = a;
  c.solver.rng_seed = 5;
  CHECK(config_hash(c) != hash);

  // sorted keys: every line's key is lexicographically >= its predecessor's
  std::istringstream lines(canonical_config_text(a));
  std::string line;
  std::string previous;
  while (std::getline(lines, line)) {
    const std::string key = line.substr(0, line.find(' '));
    CHECK(previous <= key);
    previous = key;
  }
}

TEST_CASE("mesh construction follows the domain spec") {
  DomainSpec interval;
  interval.kind = DomainSpec::Kind::interval;
  interval.a = 0.0;
  interval.b = 2.0;
  interval.elements = 10;
  Mesh m1 = build_mesh(interval);
  CHECK(m1.dimension() == 1);
  CHECK(m1.element_count() == 10);
  CHECK(m1.total_measure() == doctest::Approx(2.0));

  DomainSpec rect;
  rect.kind = DomainSpec::Kind::rectangle;
  rect.elements_x = 3;
  rect.elements_y = 4;
  Mesh m2 = build_mesh(rect);
  CHECK(m2.dimension() == 2);
  CHECK(m2.element_count() == 24);
}

TEST_CASE("config errors carry their line number") {
  ConfigError tagged("boom", 7);
  CHECK(tagged.line() == 7);
  CHECK(std::string(tagged.what()) == "line 7: boom");
  ConfigError untagged("quiet");
  CHECK(untagged.line() == 0);
  CHECK(std::string(untagged.what()) == "quiet");
}

TEST_CASE("missing config file is a config error") {
  CHECK_THROWS_AS(load_run_config("/nonexistent/path/config.txt"),
                  ConfigError);
}

TEST_CASE("solve command writes deterministic outputs") {
  TempDir dir("dpeigen_test_solve");
  RunConfig config = parse_run_config(kSolveConfig);
  config.output_directory = dir.path.string();

  REQUIRE(cmd_solve(config) == 0);
  CHECK(fs::exists(dir.path / "estimates.json"));
  CHECK(fs::exists(dir.path / "minimizer_weighted.csv"));
  CHECK(fs::exists(dir.path / "minimizer_raw.csv"));
  CHECK(fs::exists(dir.path / "summary.txt"));
  CHECK(fs::exists(dir.path / "run_meta.json"));
  const std::string first = read_file(dir.path / "estimates.json");

  REQUIRE(cmd_solve(config) == 0);
  const std::string second = read_file(dir.path / "estimates.json");
  CHECK(first == second);

  const nlohmann::json doc = nlohmann::json::parse(first);
  CHECK(doc.at("config_hash").get<std::string>() == config_hash(config));
  CHECK(doc.at("weighted_quotient").at("converged").get<bool>());
  CHECK(doc.at("raw_quotient").at("converged").get<bool>());
  CHECK(doc.at("lambda0_le_lambda1").get<bool>());
  const double lambda0 = doc.at("raw_quotient").at("lambda_hat").get<double>();
  const double lambda1 =
      doc.at("weighted_quotient").at("lambda_hat").get<double>();
  CHECK(lambda0 > 0.0);
  CHECK(lambda0 <= lambda1 + 1e-6 * lambda0);

  const nlohmann::json meta =
      nlohmann::json::parse(read_file(dir.path / "run_meta.json"));
  CHECK(meta.at("command").get<std::string>() == "solve");
  CHECK(meta.at("config_hash").get<std::string>() == config_hash(config));
}

TEST_CASE("solve command fails cleanly on bad input") {
  RunConfig config = parse_run_config(kSolveConfig);
  config.output_directory = "/nonexistent/dpeigen/output";
  CHECK(cmd_solve(config) == 1);

  TempDir dir("dpeigen_test_solve_bad");
  RunConfig incomplete = parse_run_config("p2 = 1.5\nq = 2\n");
  incomplete.output_directory = dir.path.string();
  CHECK(cmd_solve(incomplete) == 1);
}

TEST_CASE("validate command reports a passing battery") {
  TempDir dir("dpeigen_test_validate");
  RunConfig config = parse_run_config(
      "domain = interval\n"
      "a = 0\n"
      "b = 1\n"
      "elements = 30\n"
      "p1 = 2.8 + 0.05*x\n"
      "p2 = 1.5\n"
      "q = 2 + 0.02*x\n"
      "seed = 13\n"
      "restarts = 2\n"
      "validate_trials = 25\n");
  config.output_directory = dir.path.string();

  REQUIRE(cmd_validate(config) == 0);
  const nlohmann::json doc =
      nlohmann::json::parse(read_file(dir.path / "diagnostics.json"));
  CHECK(doc.at("all_ok").get<bool>());
  CHECK(doc.at("config_hash").get<std::string>() == config_hash(config));
  REQUIRE(doc.at("checks").is_array());
  CHECK(doc.at("checks").size() >= 5);
  for (const auto& check : doc.at("checks")) {
    CHECK(check.at("failures").get<int>() == 0);
    CHECK(check.at("trials").get<int>() > 0);
  }
}

TEST_CASE("scan command writes the row table") {
  TempDir dir("dpeigen_test_scan");
  RunConfig config = parse_run_config(
      "domain = interval\n"
      "a = 0\n"
      "b = 1\n"
      "elements = 60\n"
      "p1 = 2.8\n"
      "p2 = 1.5\n"
      "q = 2\n"
      "seed = 9\n"
      "restarts = 2\n"
      "lambda_grid = 8, 30\n");
  config.output_directory = dir.path.string();

  REQUIRE(cmd_scan(config) == 0);
  const std::string csv = read_file(dir.path / "scan.csv");
  CHECK(csv.rfind("lambda,min_T,norm,residual,classification\n", 0) == 0);

  const nlohmann::json doc =
      nlohmann::json::parse(read_file(dir.path / "scan.json"));
  REQUIRE(doc.at("rows").size() == 2);
  CHECK(doc.at("rows")[0].at("classification").get<std::string>() ==
        "trivial_only");
  CHECK(doc.at("rows")[1].at("classification").get<std::string>() ==
        "eigenvalue_certified");
  CHECK(doc.at("summary").at("bracket_lower").get<double>() > 0.0);

  // scan without a grid is rejected up front
  RunConfig no_grid = parse_run_config(kSolveConfig);
  no_grid.output_directory = dir.path.string();
  CHECK(cmd_scan(no_grid) == 1);
}

}  // TEST_SUITE
