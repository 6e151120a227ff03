#pragma once

// Engine configuration: one JSON document whose every leaf can be overridden
// on the command line by its dotted name, e.g. `--tracker.max_age 45`.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "parklot/analytics/export.hpp"
#include "parklot/tracking/track.hpp"

namespace parklot::engine {

struct ServeConfig {
  bool enabled = false;
  std::string address = "127.0.0.1";
  int port = 8080;
  /// Messages buffered per stream consumer before it is dropped.
  std::size_t queue_capacity = 4096;
};

struct EngineConfig {
  std::filesystem::path slot_map;
  std::filesystem::path log;
  double fps = 30.0;
  /// Copied into the log header.
  std::optional<std::int64_t> start_timestamp_ms;
  /// fsync the log every N records; 0 leaves flushing to the OS.
  std::size_t log_sync_every = 0;
  tracking::TrackerParams tracker;
  int min_dwell_frames = 0;
  bool accept_unknown_class = false;
  ServeConfig serve;
  std::vector<analytics::ExportFormat> export_formats{analytics::ExportFormat::Csv, analytics::ExportFormat::Json};

  /// Throws ValidationError naming every bad field, including referenced
  /// paths that cannot be resolved.
  void validate() const;
};

/// Every recognised key with its default value.
std::string default_config_document();

/// Dotted names of every overridable leaf, in document order.
std::vector<std::string> config_keys();

using Override = std::pair<std::string, std::string>;

/// Merges `document` over the defaults, resolves relative paths in it against
/// `base_dir`, then applies command-line overrides (paths relative to the
/// working directory). Throws ParseError / ValidationError.
EngineConfig parse_config(std::string_view document, const std::filesystem::path& base_dir,
                          const std::vector<Override>& overrides = {});
EngineConfig load_config(const std::filesystem::path& path, const std::vector<Override>& overrides = {});

/// Canonical JSON of a config (paths as stored).
std::string config_document(const EngineConfig& config);

}  // namespace parklot::engine
