#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "qsd/config.hpp"
#include "qsd/runner.hpp"

namespace {

// Exit codes: 0 success, 1 config/filesystem problems, 2 numerical failures.
int exit_code_for(const qsd::Error& error) {
  switch (error.kind()) {
    case qsd::ErrorKind::validation:
    case qsd::ErrorKind::io:
      return 1;
    default:
      return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diffusive pure-state trajectory laboratory"};
  app.require_subcommand(1);

  std::string run_config_path;
  std::uint64_t seed_override = 0;
  bool has_seed_override = false;
  int threads = 0;

  CLI::App* run_cmd = app.add_subcommand("run", "Execute one experiment");
  run_cmd->add_option("config", run_config_path, "JSON config file")
      ->required();
  run_cmd
      ->add_option("--seed-override", seed_override,
                   "Replace the config's master_seed for this run")
      ->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--threads", threads,
                      "Worker count for trajectory fan-out (0 = default)");

  std::string validate_config_path;
  CLI::App* validate_cmd =
      app.add_subcommand("validate", "Check a config file and print its hash");
  validate_cmd->add_option("config", validate_config_path, "JSON config file")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  has_seed_override = run_cmd->count("--seed-override") > 0;

  try {
    if (*validate_cmd) {
      const qsd::RunConfig config = qsd::parse_config(validate_config_path);
      std::printf("ok %s %s\n", qsd::to_string(config.experiment),
                  qsd::hash_hex(config.config_hash).c_str());
      return 0;
    }
    const qsd::RunConfig config = qsd::parse_config(run_config_path);
    qsd::RunOptions options;
    if (has_seed_override) {
      options.seed_override = seed_override;
    }
    options.worker_count = threads;
    qsd::run_experiment(config, options);
    return 0;
  } catch (const qsd::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
