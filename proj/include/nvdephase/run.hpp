#pragma once

// Scenario execution, output files, run records and reproduction checks.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nvdephase/scenario.hpp"

namespace nvd {

inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int { kExitOk = 0, kExitToleranceFailure = 1, kExitInputError = 2 };

struct RunOptions {
  /// Output directory; empty writes no files.
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  /// Print JSON records instead of text on stdout.
  bool records = false;
};

struct OutputFile {
  std::string name;
  std::string contents;
};

struct TaskResult {
  std::map<std::string, double> metrics;
  std::vector<OutputFile> files;
  std::string text;
  std::vector<std::string> warnings;
};

/// Runs the scenario's task. Throws std::invalid_argument / std::runtime_error
/// on bad inputs (missing data files, invalid values).
TaskResult execute_task(const Scenario& scenario, const RunOptions& options);

struct CheckOutcome {
  Check check;
  std::optional<double> value;
  bool pass = false;
  std::string line;
};

std::vector<CheckOutcome> evaluate_checks(const std::vector<Check>& checks,
                                          const std::map<std::string, double>& metrics);

/// Writes each file plus run_record.json (scenario hash, version, timestamp,
/// outputs manifest) into options.out_dir.
void write_outputs(const Scenario& scenario, const std::string& command, const RunOptions& options,
                   const TaskResult& result);

/// Manifest of name → FNV-1a hash of contents, in file order.
std::string outputs_manifest(const TaskResult& result);

/// Full subcommand flow for `subcommand` on a scenario file. Returns an exit code.
int run_command(const std::string& subcommand, const std::string& scenario_path, const RunOptions& options,
                std::ostream& out, std::ostream& err);

/// Parses and checks a scenario without computing. Returns an exit code.
int validate_command(const std::string& scenario_path, std::ostream& out, std::ostream& err);

std::vector<std::string> reproduce_targets();

/// Runs the bundled scenario(s) for `target` ("all" for every target) from
/// `data_dir` and prints one PASS/FAIL line per check.
int reproduce_command(const std::string& target, const std::string& data_dir, const RunOptions& options,
                      std::ostream& out, std::ostream& err);

/// Default bundled data directory.
std::string default_data_dir();

}  // namespace nvd
