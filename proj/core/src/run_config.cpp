#include "dpeigen/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace dpeigen {

namespace {

std::string trim(const std::string& s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) {
    ++begin;
  }
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) {
    --end;
  }
  return s.substr(begin, end - begin);
}

double parse_double(const std::string& value, const std::string& key,
                    int line) {
  const std::string t = trim(value);
  char* tail = nullptr;
  const double parsed = std::strtod(t.c_str(), &tail);
  if (t.empty() || tail != t.c_str() + t.size()) {
    throw ConfigError("key '" + key + "' expects a number, got '" + t + "'",
                      line);
  }
  return parsed;
}

int parse_int(const std::string& value, const std::string& key, int line) {
  const std::string t = trim(value);
  char* tail = nullptr;
  const long parsed = std::strtol(t.c_str(), &tail, 10);
  if (t.empty() || tail != t.c_str() + t.size()) {
    throw ConfigError("key '" + key + "' expects an integer, got '" + t + "'",
                      line);
  }
  return static_cast<int>(parsed);
}

std::uint64_t parse_seed(const std::string& value, const std::string& key,
                         int line) {
  const std::string t = trim(value);
  char* tail = nullptr;
  const unsigned long long parsed = std::strtoull(t.c_str(), &tail, 10);
  if (t.empty() || tail != t.c_str() + t.size()) {
    throw ConfigError("key '" + key + "' expects a nonnegative integer, got '" +
                          t + "'",
                      line);
  }
  return parsed;
}

bool parse_bool(const std::string& value, const std::string& key, int line) {
  const std::string t = trim(value);
  if (t == "true") return true;
  if (t == "false") return false;
  throw ConfigError("key '" + key + "' expects true or false, got '" + t + "'",
                    line);
}

std::vector<double> parse_grid(const std::string& value,
                               const std::string& key, int line) {
  std::vector<double> grid;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    grid.push_back(parse_double(item, key, line));
  }
  if (grid.empty()) {
    throw ConfigError("key '" + key + "' expects a comma-separated list",
                      line);
  }
  return grid;
}

std::string format_double(double v) {
  char buffer[48];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

}  // namespace

ConfigError::ConfigError(const std::string& message, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " +
                                        message
                                  : message),
      line_(line) {}

RunConfig parse_run_config(const std::string& text) {
  RunConfig config;
  std::map<std::string, int> seen;
  std::istringstream stream(text);
  std::string raw_line;
  int line_number = 0;
  while (std::getline(stream, raw_line)) {
    ++line_number;
    const std::size_t comment = raw_line.find('#');
    if (comment != std::string::npos) {
      raw_line.erase(comment);
    }
    const std::string line = trim(raw_line);
    if (line.empty()) continue;
    const std::size_t equals = line.find('=');
    if (equals == std::string::npos) {
      throw ConfigError("expected 'key = value', got '" + line + "'",
                        line_number);
    }
    const std::string key = trim(line.substr(0, equals));
    const std::string value = trim(line.substr(equals + 1));
    if (key.empty()) {
      throw ConfigError("empty key", line_number);
    }
    const auto [it, inserted] = seen.emplace(key, line_number);
    if (!inserted) {
      throw ConfigError("duplicate key '" + key + "' (first on line " +
                            std::to_string(it->second) + ")",
                        line_number);
    }

    if (key == "domain") {
      if (value == "interval") {
        config.domain.kind = DomainSpec::Kind::interval;
      } else if (value == "rectangle") {
        config.domain.kind = DomainSpec::Kind::rectangle;
      } else {
        throw ConfigError(
            "key 'domain' expects interval or rectangle, got '" + value + "'",
            line_number);
      }
    } else if (key == "a") {
      config.domain.a = parse_double(value, key, line_number);
    } else if (key == "b") {
      config.domain.b = parse_double(value, key, line_number);
    } else if (key == "x0") {
      config.domain.x0 = parse_double(value, key, line_number);
    } else if (key == "x1") {
      config.domain.x1 = parse_double(value, key, line_number);
    } else if (key == "y0") {
      config.domain.y0 = parse_double(value, key, line_number);
    } else if (key == "y1") {
      config.domain.y1 = parse_double(value, key, line_number);
    } else if (key == "elements") {
      config.domain.elements = parse_int(value, key, line_number);
    } else if (key == "elements_x") {
      config.domain.elements_x = parse_int(value, key, line_number);
    } else if (key == "elements_y") {
      config.domain.elements_y = parse_int(value, key, line_number);
    } else if (key == "p1") {
      config.p1_expression = value;
    } else if (key == "p2") {
      config.p2_expression = value;
    } else if (key == "q") {
      config.q_expression = value;
    } else if (key == "epsilon") {
      config.epsilon = parse_double(value, key, line_number);
    } else if (key == "seed") {
      config.solver.rng_seed = parse_seed(value, key, line_number);
    } else if (key == "threads") {
      config.solver.threads = parse_int(value, key, line_number);
    } else if (key == "out") {
      config.output_directory = value;
    } else if (key == "max_iterations") {
      config.solver.max_iterations = parse_int(value, key, line_number);
    } else if (key == "gradient_tolerance") {
      config.solver.gradient_tolerance =
          parse_double(value, key, line_number);
    } else if (key == "initial_step") {
      config.solver.initial_step = parse_double(value, key, line_number);
    } else if (key == "step_shrink") {
      config.solver.step_shrink = parse_double(value, key, line_number);
    } else if (key == "armijo_constant") {
      config.solver.armijo_constant = parse_double(value, key, line_number);
    } else if (key == "restarts") {
      config.solver.restarts = parse_int(value, key, line_number);
    } else if (key == "allow_degenerate") {
      config.solver.allow_degenerate = parse_bool(value, key, line_number);
    } else if (key == "triviality_threshold") {
      config.solver.triviality_threshold =
          parse_double(value, key, line_number);
    } else if (key == "lambda_grid") {
      config.lambda_grid = parse_grid(value, key, line_number);
    } else if (key == "validate_trials") {
      config.validate_trials = parse_int(value, key, line_number);
    } else {
      throw ConfigError("unknown key '" + key + "'", line_number);
    }
  }
  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

void RunConfig::validate() const {
  if (p1_expression.empty()) {
    throw ConfigError("missing exponent expression 'p1'");
  }
  if (p2_expression.empty()) {
    throw ConfigError("missing exponent expression 'p2'");
  }
  if (q_expression.empty()) {
    throw ConfigError("missing exponent expression 'q'");
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("epsilon must be positive and finite");
  }
  if (domain.kind == DomainSpec::Kind::interval) {
    if (!std::isfinite(domain.a) || !std::isfinite(domain.b) ||
        !(domain.a < domain.b)) {
      throw ConfigError("interval bounds must satisfy a < b");
    }
    if (domain.elements < 2) {
      throw ConfigError("elements must be at least 2");
    }
  } else {
    if (!std::isfinite(domain.x0) || !std::isfinite(domain.x1) ||
        !(domain.x0 < domain.x1) || !std::isfinite(domain.y0) ||
        !std::isfinite(domain.y1) || !(domain.y0 < domain.y1)) {
      throw ConfigError("rectangle bounds must satisfy x0 < x1 and y0 < y1");
    }
    if (domain.elements_x < 2 || domain.elements_y < 2) {
      throw ConfigError("elements_x and elements_y must be at least 2");
    }
  }
  if (validate_trials < 1) {
    throw ConfigError("validate_trials must be at least 1");
  }
  for (const double lambda : lambda_grid) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw ConfigError("lambda_grid entries must be positive");
    }
  }
  try {
    solver.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::string canonical_config_text(const RunConfig& config) {
  std::map<std::string, std::string> entries;
  entries["domain"] = config.domain.kind == DomainSpec::Kind::interval
                          ? "interval"
                          : "rectangle";
  entries["a"] = format_double(config.domain.a);
  entries["b"] = format_double(config.domain.b);
  entries["x0"] = format_double(config.domain.x0);
  entries["x1"] = format_double(config.domain.x1);
  entries["y0"] = format_double(config.domain.y0);
  entries["y1"] = format_double(config.domain.y1);
  entries["elements"] = std::to_string(config.domain.elements);
  entries["elements_x"] = std::to_string(config.domain.elements_x);
  entries["elements_y"] = std::to_string(config.domain.elements_y);
  entries["p1"] = config.p1_expression;
  entries["p2"] = config.p2_expression;
  entries["q"] = config.q_expression;
  entries["epsilon"] = format_double(config.epsilon);
  entries["seed"] = std::to_string(config.solver.rng_seed);
  entries["threads"] = std::to_string(config.solver.threads);
  entries["out"] = config.output_directory;
  entries["max_iterations"] = std::to_string(config.solver.max_iterations);
  entries["gradient_tolerance"] =
      format_double(config.solver.gradient_tolerance);
  entries["initial_step"] = format_double(config.solver.initial_step);
  entries["step_shrink"] = format_double(config.solver.step_shrink);
  entries["armijo_constant"] = format_double(config.solver.armijo_constant);
  entries["restarts"] = std::to_string(config.solver.restarts);
  entries["allow_degenerate"] =
      config.solver.allow_degenerate ? "true" : "false";
  entries["triviality_threshold"] =
      format_double(config.solver.triviality_threshold);
  std::string grid;
  for (std::size_t i = 0; i < config.lambda_grid.size(); ++i) {
    if (i > 0) grid += ",";
    grid += format_double(config.lambda_grid[i]);
  }
  entries["lambda_grid"] = grid;
  entries["validate_trials"] = std::to_string(config.validate_trials);

  std::string text;
  for (const auto& [key, value] : entries) {
    text += key;
    text += " = ";
    text += value;
    text += "\n";
  }
  return text;
}

std::string config_hash(const RunConfig& config) {
  const std::string text = canonical_config_text(config);
  std::uint64_t hash = 14695981039346656037ULL;
  for (const char c : text) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 1099511628211ULL;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(hash));
  return buffer;
}

Mesh build_mesh(const DomainSpec& domain) {
  if (domain.kind == DomainSpec::Kind::interval) {
    return build_interval_mesh(domain.a, domain.b, domain.elements);
  }
  return build_rectangle_mesh(domain.x0, domain.x1, domain.y0, domain.y1,
                              domain.elements_x, domain.elements_y);
}

}  // namespace dpeigen
