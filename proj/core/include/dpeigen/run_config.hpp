#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "dpeigen/energy.hpp"
#include "dpeigen/mesh.hpp"
#include "dpeigen/solver.hpp"

namespace dpeigen {

// Configuration problem with the offending line number (0 when the problem
// is not tied to a specific line).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& message, int line = 0);
  int line() const noexcept { return line_; }

private:
  int line_;
};

struct DomainSpec {
  enum class Kind { interval, rectangle };
  Kind kind = Kind::interval;
  // Interval bounds.
  double a = 0.0;
  double b = 1.0;
  // Rectangle bounds.
  double x0 = 0.0;
  double x1 = 1.0;
  double y0 = 0.0;
  double y1 = 1.0;
  int elements = 64;  // interval resolution
  int elements_x = 16;
  int elements_y = 16;
};

// A complete run description, parsed from a flat key = value file.
// Unknown and duplicate keys are rejected. Recognized keys:
//   domain (interval|rectangle), a, b, x0, x1, y0, y1,
//   elements, elements_x, elements_y,
//   p1, p2, q (exponent expressions),
//   epsilon, seed, threads, out,
//   max_iterations, gradient_tolerance, initial_step, step_shrink,
//   armijo_constant, restarts, allow_degenerate, triviality_threshold,
//   lambda_grid (comma separated), validate_trials.
// '#' starts a comment; blank lines are ignored.
struct RunConfig {
  DomainSpec domain;
  std::string p1_expression;
  std::string p2_expression;
  std::string q_expression;
  SolverOptions solver;
  double epsilon = kDefaultRegularization;
  std::vector<double> lambda_grid;
  int validate_trials = 200;
  std::string output_directory = ".";

  // Structural validation (domain geometry, exponent presence, solver
  // option ranges, epsilon). Throws ConfigError.
  void validate() const;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

// Normalized flat rendering with sorted keys and full floating-point
// precision; the effective configuration after any command-line overrides.
std::string canonical_config_text(const RunConfig& config);

// FNV-1a 64-bit hash of the canonical text, rendered as 16 hex digits.
// Every output document carries this value.
std::string config_hash(const RunConfig& config);

Mesh build_mesh(const DomainSpec& domain);

}  // namespace dpeigen
