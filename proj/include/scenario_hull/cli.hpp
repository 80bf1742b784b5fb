// Copyright 2026 The scenario-hull Authors
// SPDX-License-Identifier: Apache-2.0

// Configuration parsing, command dispatch and report rendering for the
// scenario_hull command-line tool.  Everything here is pure except
// write_report; the tool's main() is a thin shell around run_command.

#pragma once

#include "scenario_hull/common.hpp"

#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace scenario_hull::cli {

enum class Format { kCsv, kJson, kBoth };

Format format_from_string(const std::string& name);

struct RunOptions {
  /// Overrides the config's master_seed.
  std::optional<std::uint64_t> seed;
  /// 0 defers to SCENARIO_HULL_THREADS, then hardware concurrency.
  std::size_t threads = 0;
  /// When set, the config's command must match it.
  std::optional<std::string> command;
};

using Cell = std::variant<std::int64_t, double, std::string>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

struct Report {
  std::string command;
  std::string config_hash;  // FNV-1a 64 of the canonical config, hex
  std::uint64_t master_seed = 0;
  std::vector<Table> tables;

  const Table& table(const std::string& name) const;
};

/// Parses and schema-checks `config_text`, then runs its command.
/// Throws ConfigError (bad JSON, unknown keys, wrong types), DomainError,
/// InfeasibleError or NumericalError.
Report run_command(const std::string& config_text, const RunOptions& options = {});

/// %.17g with '.' decimal regardless of locale.
std::string format_real(double value);

/// One CSV document; the first line is a `#` comment carrying the command,
/// config hash and master seed.
std::string to_csv(const Report& report, const Table& table);

/// All tables in one JSON document.
std::string to_json(const Report& report);

/// (file name, contents) pairs for the requested format.
std::vector<std::pair<std::string, std::string>> render(const Report& report, Format format);

/// Renders everything first, then writes the files into `out_dir`.
void write_report(const Report& report, const std::string& out_dir, Format format);

/// 0 ok, 2 configuration or domain error, 3 infeasible construction,
/// 4 numerical failure (and anything unexpected).
int exit_code(const std::exception& error);

std::string fnv1a64_hex(const std::string& bytes);

}  // namespace scenario_hull::cli
