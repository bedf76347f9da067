#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace naclab {

// Exit-code contract of every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitIoError = 2;

struct CliOptions {
  std::optional<std::string> out_dir;
  bool plot = false;
  std::optional<std::uint64_t> seed;
  bool force = false;
};

/// Each PATH is a scenario file or a built-in scenario name. Reports go to
/// `out`, diagnostics to `err`. With several paths the worst exit code wins.
int cmd_validate(const std::vector<std::string>& paths, const CliOptions& opts,
                 std::ostream& out, std::ostream& err);
int cmd_analyze(const std::vector<std::string>& paths, const CliOptions& opts,
                std::ostream& out, std::ostream& err);
/// Writes trajectory.csv, metrics.txt, scenario.txt and (when the analysis
/// ran) certificate.txt / certificate.json into the output directory
/// (default `nac-lab-out/<scenario name>`; with several paths, one
/// subdirectory per scenario). --plot adds output.svg and input.svg.
int cmd_simulate(const std::vector<std::string>& paths, const CliOptions& opts,
                 std::ostream& out, std::ostream& err);
/// path_a is the extended run, path_b the baseline. Writes comparison.txt,
/// comparison.csv and overlay.svg.
int cmd_compare(const std::string& path_a, const std::string& path_b, const CliOptions& opts,
                std::ostream& out, std::ostream& err);

/// Applies NAC_LAB_THREADS (a positive integer) to the OpenMP runtime.
/// Returns false with a message in `error` when the value is malformed.
bool apply_thread_env(std::string* error);

/// Full command line entry point.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace naclab
