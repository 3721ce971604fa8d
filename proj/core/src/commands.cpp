#include "dpeigen/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "dpeigen/diagnostics.hpp"
#include "dpeigen/exponent_field.hpp"
#include "dpeigen/mesh.hpp"
#include "dpeigen/serialize.hpp"
#include "dpeigen/solver.hpp"
#include "deterministic_rng.hpp"

namespace dpeigen {

namespace {

std::string format_number(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.12g", v);
  return buffer;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot write file: " + path.string());
  }
  out << content;
  out.flush();
  if (!out) {
    throw ConfigError("cannot write file: " + path.string());
  }
}

std::filesystem::path require_output_directory(const RunConfig& config) {
  std::filesystem::path dir(config.output_directory);
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError("output directory does not exist: " + dir.string());
  }
  return dir;
}

template <typename Body>
int run_command(Body&& body) {
  try {
    return body();
  } catch (const ConfigError& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 2;
  }
}

struct FieldTriple {
  ExponentField p1;
  ExponentField p2;
  ExponentField q;
};

FieldTriple parse_fields(const RunConfig& config, const Mesh& mesh) {
  return FieldTriple{parse_exponent_expression(config.p1_expression, mesh),
                     parse_exponent_expression(config.p2_expression, mesh),
                     parse_exponent_expression(config.q_expression, mesh)};
}

std::string converged_word(bool converged) {
  return converged ? "yes" : "no";
}

std::string solve_summary(const EigenEstimate& weighted,
                          const EigenEstimate& raw) {
  const double slack = 1e-6 * std::abs(raw.lambda_hat);
  const bool ordered = raw.lambda_hat <= weighted.lambda_hat + slack;
  std::string text;
  text += "spectral bound estimates\n";
  text += "  lambda1_hat (weighted quotient): " +
          format_number(weighted.lambda_hat) + "\n";
  text += "    residual " + format_number(weighted.residual) + ", iterations " +
          std::to_string(weighted.iterations_used) + ", converged " +
          converged_word(weighted.converged) + "\n";
  text += "  lambda0_hat (raw quotient): " + format_number(raw.lambda_hat) +
          "\n";
  text += "    residual " + format_number(raw.residual) + ", iterations " +
          std::to_string(raw.iterations_used) + ", converged " +
          converged_word(raw.converged) + "\n";
  text += std::string("  ordering lambda0_hat <= lambda1_hat: ") +
          (ordered ? "holds" : "VIOLATED") + " (1e-6 relative slack)\n";
  return text;
}

}  // namespace

int cmd_solve(const RunConfig& config) {
  return run_command([&]() -> int {
    config.validate();
    const std::filesystem::path dir = require_output_directory(config);
    const std::string started = current_utc_timestamp();
    const std::string hash = config_hash(config);

    const Mesh mesh = build_mesh(config.domain);
    const FieldTriple fields = parse_fields(config, mesh);

    const EigenEstimate weighted =
        minimize_rayleigh(QuotientKind::weighted, fields.p1, fields.p2,
                          fields.q, mesh, config.solver, config.epsilon);
    const EigenEstimate raw =
        minimize_rayleigh(QuotientKind::raw, fields.p1, fields.p2, fields.q,
                          mesh, config.solver, config.epsilon);

    write_text_file(dir / "estimates.json",
                    estimates_to_json(weighted, raw, hash));
    write_function_csv(weighted.minimizer,
                       (dir / "minimizer_weighted.csv").string());
    write_function_csv(raw.minimizer, (dir / "minimizer_raw.csv").string());

    const std::string summary = solve_summary(weighted, raw);
    write_text_file(dir / "summary.txt", summary);
    std::cout << summary;

    const std::string finished = current_utc_timestamp();
    write_text_file(dir / "run_meta.json",
                    run_meta_to_json(hash, "solve", started, finished,
                                     kToolVersion));

    return (weighted.converged && raw.converged) ? 0 : 2;
  });
}

int cmd_scan(const RunConfig& config) {
  return run_command([&]() -> int {
    config.validate();
    if (config.lambda_grid.empty()) {
      throw ConfigError("scan requires a non-empty lambda_grid");
    }
    const std::filesystem::path dir = require_output_directory(config);
    const std::string started = current_utc_timestamp();
    const std::string hash = config_hash(config);

    const Mesh mesh = build_mesh(config.domain);
    const FieldTriple fields = parse_fields(config, mesh);

    const ScanReport report =
        scan_lambda(config.lambda_grid, fields.p1, fields.p2, fields.q, mesh,
                    config.solver, config.epsilon);

    write_text_file(dir / "scan.json", scan_to_json(report, hash));
    write_text_file(dir / "scan.csv", scan_to_csv(report));

    double largest_trivial = -1.0;
    double smallest_certified = -1.0;
    int inconclusive = 0;
    for (const auto& row : report.rows) {
      switch (row.classification) {
        case ScanClass::trivial_only:
          largest_trivial = std::max(largest_trivial, row.lambda);
          break;
        case ScanClass::eigenvalue_certified:
          if (smallest_certified < 0.0 || row.lambda < smallest_certified) {
            smallest_certified = row.lambda;
          }
          break;
        case ScanClass::inconclusive:
          ++inconclusive;
          break;
      }
    }

    std::cout << "scanned " << report.rows.size() << " spectral parameters\n";
    std::cout << "  largest trivial-only lambda: "
              << (largest_trivial < 0.0 ? std::string("none")
                                        : format_number(largest_trivial))
              << "\n";
    std::cout << "  smallest certified lambda: "
              << (smallest_certified < 0.0 ? std::string("none")
                                           : format_number(smallest_certified))
              << "\n";
    std::cout << "  quotient bracket: [" << format_number(report.lambda0_estimate)
              << ", " << format_number(report.lambda1_estimate) << "]\n";
    for (const auto& warning : report.warnings) {
      std::cout << "  warning: " << warning << "\n";
    }

    const std::string finished = current_utc_timestamp();
    write_text_file(dir / "run_meta.json",
                    run_meta_to_json(hash, "scan", started, finished,
                                     kToolVersion));

    return inconclusive == 0 ? 0 : 2;
  });
}

int cmd_validate(const RunConfig& config) {
  return run_command([&]() -> int {
    config.validate();
    const std::filesystem::path dir = require_output_directory(config);
    const std::string started = current_utc_timestamp();
    const std::string hash = config_hash(config);

    const Mesh mesh = build_mesh(config.domain);
    const FieldTriple fields = parse_fields(config, mesh);

    const ValidationReport triple =
        validate_triple(fields.p1, fields.p2, fields.q, mesh.dimension());
    if (!triple.ok() && !config.solver.allow_degenerate) {
      throw ConfigError(describe_failure(triple));
    }
    for (const auto& warning : triple.dimension_warnings) {
      std::cout << "note: " << warning << "\n";
    }
    if (!triple.ok()) {
      std::cout << "note: exponent chain invalid (degenerate mode); "
                   "chain battery skipped\n";
    }

    const std::uint64_t seed = config.solver.rng_seed;
    const int n = config.validate_trials;
    const int gradient_trials = std::min(n, 100);

    std::vector<CheckReport> reports;
    auto add = [&reports](CheckReport report, const char* suffix) {
      if (suffix != nullptr) {
        report.check_name += suffix;
      }
      reports.push_back(std::move(report));
    };

    using detail::mix_seed;
    add(check_modular_norm_relations(n, mesh, fields.p1, mix_seed(seed, 1)),
        " (p1)");
    add(check_modular_norm_relations(n, mesh, fields.p2, mix_seed(seed, 2)),
        " (p2)");
    add(check_modular_norm_relations(n, mesh, fields.q, mix_seed(seed, 3)),
        " (q)");
    add(check_holder_inequality(n, mesh, fields.p1, mix_seed(seed, 4)),
        " (p1)");
    add(check_holder_inequality(n, mesh, fields.p2, mix_seed(seed, 5)),
        " (p2)");
    add(check_pairing_identities(n, mesh, fields.p1, fields.p2, fields.q,
                                 mix_seed(seed, 6), config.epsilon),
        nullptr);
    add(check_gradients(gradient_trials, mesh, fields.p1, fields.p2, fields.q,
                        mix_seed(seed, 7)),
        nullptr);

    if (triple.ok()) {
      const double mu_low =
          estimate_embedding_eigenvalue(fields.q.min_value(), mesh,
                                        config.solver);
      const double mu_high =
          estimate_embedding_eigenvalue(fields.q.max_value(), mesh,
                                        config.solver);
      const double mu_hat = std::min(mu_low, mu_high);
      add(check_inequality_chain_battery(n, mesh, fields.p1, fields.p2,
                                         fields.q, mu_hat, mix_seed(seed, 8)),
          nullptr);
    }

    write_text_file(dir / "diagnostics.json",
                    diagnostics_to_json(reports, hash));

    bool all_ok = true;
    for (const auto& report : reports) {
      all_ok = all_ok && report.ok();
      std::printf("%-36s trials %6d  failures %4d  worst %+.3e  %s\n",
                  report.check_name.c_str(), report.trials, report.failures,
                  report.worst_violation, report.ok() ? "ok" : "FAIL");
    }
    std::cout << (all_ok ? "all batteries passed\n"
                         : "some batteries FAILED\n");

    const std::string finished = current_utc_timestamp();
    write_text_file(dir / "run_meta.json",
                    run_meta_to_json(hash, "validate", started, finished,
                                     kToolVersion));

    return all_ok ? 0 : 2;
  });
}

}  // namespace dpeigen
