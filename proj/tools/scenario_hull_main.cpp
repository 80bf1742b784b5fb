// Copyright 2026 The scenario-hull Authors
// SPDX-License-Identifier: Apache-2.0

#include "scenario_hull/cli.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw scenario_hull::ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified scenario hulls: sample sizes, hull construction, validation and MPC experiments."};
  std::string command;
  std::string config_path;
  std::string out_dir = ".";
  std::string format = "both";
  std::uint64_t seed = 0;
  std::size_t threads = 0;

  app.add_option("command", command, "certify | run | validate | counterexample | mpc | discard")
      ->required()
      ->check(CLI::IsMember({"certify", "run", "validate", "counterexample", "mpc", "discard"}));
  app.add_option("--config", config_path, "JSON configuration document")->required();
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides the config's master_seed)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads (default: SCENARIO_HULL_THREADS, then all cores)");
  app.add_option("--format", format, "csv | json | both")->check(CLI::IsMember({"csv", "json", "both"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    scenario_hull::cli::RunOptions opts;
    if (*seed_opt) opts.seed = seed;
    opts.threads = threads;
    opts.command = command;
    const auto fmt = scenario_hull::cli::format_from_string(format);
    const auto report = scenario_hull::cli::run_command(read_file(config_path), opts);
    scenario_hull::cli::write_report(report, out_dir, fmt);
    for (const auto& t : report.tables) {
      if (t.name != "summary" && t.name != "bounds" && t.name != "optimum") continue;
      std::cout << scenario_hull::cli::to_csv(report, t);
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "scenario-hull: " << e.what() << "\n";
    return scenario_hull::cli::exit_code(e);
  }
}
