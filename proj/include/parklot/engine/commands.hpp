#pragma once

// Operator entry points. `cli_main` is the whole `parklot` executable;
// the command functions are exposed so tests can drive them in-process.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "parklot/engine/config.hpp"

namespace parklot::engine {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2 };

struct Io {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

struct RunArgs {
  std::filesystem::path config;
  std::vector<Override> overrides;
  /// "-" reads standard input.
  std::string input = "-";
};

struct AnalyzeArgs {
  std::filesystem::path log;
  std::filesystem::path out_dir;
  std::string formats = "csv,json";
  std::optional<std::filesystem::path> slots;
  std::optional<double> overstay_seconds;
};

struct ServeArgs {
  RunArgs run;
  std::optional<std::filesystem::path> replay;
  /// Replay pacing in frames per second; 0 replays as fast as possible.
  std::optional<double> replay_rate;
  /// Written with the bound port once the server listens.
  std::optional<std::filesystem::path> port_file;
  /// Return once the stream is exhausted instead of serving until signalled.
  bool exit_when_done = false;
};

int run_command(const RunArgs& args, Io io);
int analyze_command(const AnalyzeArgs& args, Io io);
int serve_command(const ServeArgs& args, Io io);
int validate_slots_command(const std::filesystem::path& map, Io io);
int synth_command(const std::filesystem::path& spec, const std::filesystem::path& out_dir, Io io);

/// Applies PARKLOT_LOG_LEVEL (error, warn, info, debug; default info) to the
/// stderr logger. Returns false for an unrecognised value.
bool configure_logging();

int cli_main(const std::vector<std::string>& args, Io io);
int cli_main(int argc, char** argv, Io io);

/// Asks running `run` / `serve` commands to stop (signal-safe).
void request_stop() noexcept;

}  // namespace parklot::engine
