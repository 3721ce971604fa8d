#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "dpeigen/commands.hpp"
#include "dpeigen/run_config.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out;
  CLI::Option* seed_option = nullptr;
  CLI::Option* threads_option = nullptr;
  CLI::Option* out_option = nullptr;
};

void attach_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--config", args.config_path, "path to a key=value config file")
      ->required();
  args.seed_option =
      sub->add_option("--seed", args.seed, "override the config RNG seed");
  args.threads_option = sub->add_option("--threads", args.threads,
                                        "override the config thread count");
  args.out_option =
      sub->add_option("--out", args.out, "override the output directory");
}

int load_and_run(const CommonArgs& args,
                 int (*command)(const dpeigen::RunConfig&)) {
  dpeigen::RunConfig config;
  try {
    config = dpeigen::load_run_config(args.config_path);
  } catch (const dpeigen::ConfigError& error) {
    std::cerr << "error: " << args.config_path << ": " << error.what() << "\n";
    return 1;
  }
  if (args.seed_option->count() > 0) {
    config.solver.rng_seed = args.seed;
  }
  if (args.threads_option->count() > 0) {
    config.solver.threads = args.threads;
  }
  if (args.out_option->count() > 0) {
    config.output_directory = args.out;
  }
  return command(config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "spectral bounds and eigenvalue certification for the double-phase "
      "variable-exponent operator"};
  app.set_version_flag("--version",
                       std::string("dpeigen ") + dpeigen::kToolVersion);
  app.require_subcommand(1);

  CommonArgs solve_args;
  CLI::App* solve = app.add_subcommand(
      "solve", "estimate both spectral bounds and write estimates.json");
  attach_common(solve, solve_args);

  CommonArgs scan_args;
  CLI::App* scan = app.add_subcommand(
      "scan", "classify a grid of spectral parameters and write scan.csv");
  attach_common(scan, scan_args);

  CommonArgs validate_args;
  CLI::App* validate = app.add_subcommand(
      "validate", "run the diagnostic batteries and write diagnostics.json");
  attach_common(validate, validate_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    const int code = app.exit(error);
    return code == 0 ? 0 : 1;
  }

  if (solve->parsed()) {
    return load_and_run(solve_args, dpeigen::cmd_solve);
  }
  if (scan->parsed()) {
    return load_and_run(scan_args, dpeigen::cmd_scan);
  }
  return load_and_run(validate_args, dpeigen::cmd_validate);
}
