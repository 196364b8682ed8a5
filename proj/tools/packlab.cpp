// packlab: build corner Cantor models, verify measure-density and
// cover-mass inequalities, certify packing-premeasure lower bounds and
// construct the piecewise gauges. One subcommand per experiment; all
// inputs come from a flat key-value config plus a few override flags.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "packlab/error.hpp"
#include "packlab/runner.hpp"
#include "packlab/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"packing premeasure laboratory"};
  app.set_version_flag("--version", packlab::kVersion);
  app.require_subcommand(1);

  std::string config_path, out_dir, precision, seed, threads;
  bool print_config = false;

  for (const auto& name : packlab::kCommands) {
    auto* sub = app.add_subcommand(name, "");
    sub->add_option("--config", config_path, "key-value config file");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--precision", precision, "significand bits");
    sub->add_option("--seed", seed, "random seed (u64)");
    sub->add_option("--threads", threads, "worker threads");
    sub->add_flag("--print-config", print_config, "print the effective config and exit");
  }

  CLI11_PARSE(app, argc, argv);
  std::string command = app.get_subcommands().front()->get_name();

  try {
    packlab::Config cfg = packlab::default_config(command);
    if (!config_path.empty()) {
      packlab::Config file = packlab::Config::parse_file(config_path);
      for (const auto& [k, v] : file.entries()) cfg.set(k, v);
    }
    if (!out_dir.empty()) cfg.set("out", out_dir);
    if (!precision.empty()) cfg.set("precision", precision);
    if (!seed.empty()) cfg.set("seed", seed);
    if (!threads.empty()) cfg.set("threads", threads);
    cfg.set("command", command);

    if (print_config) {
      std::cout << cfg.serialize();
      return 0;
    }

    packlab::RunOutcome outcome = packlab::run_command(command, cfg);
    if (!outcome.error_code.empty())
      std::cerr << "error: " << outcome.error_code << ": " << outcome.error_message << "\n";
    else
      std::cout << (outcome.all_pass ? "pass" : "FAIL") << " (" << outcome.outputs.size()
                << " outputs in " << cfg.get_str("out", "out") << ")\n";
    return outcome.exit_code;
  } catch (const packlab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == packlab::ErrorCode::CONFIG_INVALID ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
