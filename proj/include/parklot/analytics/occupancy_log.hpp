#pragma once

// Append-only occupancy log.
//
// Newline-delimited JSON: one header object on line 1, then one frame record
// per line. A record is visible to readers only once its terminating newline
// is on disk, so a reader never sees a torn record even while a writer is
// appending or after the writer was killed mid-write.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "parklot/occupancy/occupancy.hpp"

namespace parklot::analytics {

struct LogHeader {
  int version = 1;
  double fps = 30.0;
  std::size_t slot_count = 0;
  std::string slot_map_sha256;
  std::optional<std::int64_t> start_timestamp_ms;

  /// Throws ValidationError for fps <= 0 or an unsupported version.
  void validate() const;

  friend bool operator==(const LogHeader&, const LogHeader&) = default;
};

struct OccupancyLog {
  LogHeader header;
  std::vector<occupancy::OccupancyFrame> frames;

  friend bool operator==(const OccupancyLog&, const OccupancyLog&) = default;
};

/// In-memory append with the same ordering and slot-count checks as LogWriter.
/// Throws Error on violation; the log is left unchanged.
void append_frame(OccupancyLog& log, occupancy::OccupancyFrame frame);

std::string serialize_header(const LogHeader& header);
/// Canonical record line without the trailing newline.
std::string serialize_frame(const occupancy::OccupancyFrame& frame);

/// Whole log as it would appear on disk.
std::string serialize_log(const OccupancyLog& log);

LogHeader parse_header(std::string_view line);
/// `record_index` is only used for error messages (1-based line number).
occupancy::OccupancyFrame parse_frame(std::string_view line, std::size_t record_index);

/// Reads every complete record. A trailing line without its newline is an
/// in-flight append and is ignored. Throws ParseError naming the line of the
/// first corrupt record and Error for ordering or slot-count violations.
OccupancyLog read_log(std::string_view contents);
OccupancyLog read_log(std::istream& in);
OccupancyLog read_log_file(const std::filesystem::path& path);

/// Single-writer durable appender. Every record is emitted with one write
/// call that includes its newline.
class LogWriter {
public:
  struct Options {
    /// fsync after this many appends; 0 disables explicit syncing.
    std::size_t sync_every = 0;
  };

  /// Creates (truncating) the log and writes the header.
  LogWriter(const std::filesystem::path& path, LogHeader header, Options options);
  LogWriter(const std::filesystem::path& path, LogHeader header) : LogWriter(path, std::move(header), Options{}) {}
  ~LogWriter();

  LogWriter(const LogWriter&) = delete;
  LogWriter& operator=(const LogWriter&) = delete;
  LogWriter(LogWriter&& other) noexcept;
  LogWriter& operator=(LogWriter&& other) noexcept;

  /// Throws Error on ordering or slot-count violations, StorageError on I/O failure.
  void append(const occupancy::OccupancyFrame& frame);
  /// fsync the file.
  void sync();

  const LogHeader& header() const noexcept { return header_; }
  std::size_t records() const noexcept { return records_; }
  const std::filesystem::path& path() const noexcept { return path_; }

private:
  void write_all(std::string_view bytes);
  void close() noexcept;

  std::filesystem::path path_;
  LogHeader header_;
  Options options_;
  int fd_ = -1;
  std::size_t records_ = 0;
  std::optional<std::uint64_t> last_frame_;
  std::string buffer_;
};

}  // namespace parklot::analytics
