#pragma once

// Detection stream: newline-delimited JSON, one frame per line,
//   {"f":frame_index,"t":timestamp_ms_or_null,"d":[{"b":[x_min,y_min,x_max,y_max],"c":"Car","p":0.93,"a":[...]}]}
// with corner-form pixel boxes. "a" (appearance) is optional.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "parklot/tracking/detection.hpp"

namespace parklot::ingest {

struct DetectionFrame {
  std::uint64_t frame_index = 0;
  std::optional<std::int64_t> timestamp_ms;
  std::vector<tracking::Detection> detections;
};

struct StreamOptions {
  /// Map unrecognised class labels (and "Unknown") to VehicleClass::Unknown
  /// instead of rejecting the line.
  bool accept_unknown_class = false;
};

/// Parses one line. Appearance vectors are unit-normalised. Throws ParseError
/// naming `line_no` and the offending field.
DetectionFrame parse_detection_line(std::string_view line, std::size_t line_no, const StreamOptions& options = {});

/// Canonical line (no newline); numbers use the shortest round-trip form.
std::string serialize_detection_frame(const DetectionFrame& frame);

/// Incremental pull reader. Blank lines are skipped. Frame indices must be
/// strictly increasing and appearance dimensions uniform across the stream.
/// Works on unbounded sources: each call reads exactly one line.
class DetectionStreamReader {
public:
  explicit DetectionStreamReader(std::istream& in, StreamOptions options = {});

  /// Next frame, or nullopt at end of stream. A final line without a newline
  /// is still parsed. Throws ParseError; the reader is unusable afterwards.
  std::optional<DetectionFrame> next();

  std::size_t line() const noexcept { return line_; }
  std::size_t frames_read() const noexcept { return frames_; }
  std::optional<std::size_t> appearance_dim() const noexcept { return appearance_dim_; }

private:
  std::istream* in_;
  StreamOptions options_;
  std::size_t line_ = 0;
  std::size_t frames_ = 0;
  std::optional<std::uint64_t> last_frame_;
  std::optional<std::size_t> appearance_dim_;
  std::string buffer_;
};

/// Whole-document convenience wrapper around DetectionStreamReader.
std::vector<DetectionFrame> parse_stream(std::string_view document, const StreamOptions& options = {});

}  // namespace parklot::ingest
