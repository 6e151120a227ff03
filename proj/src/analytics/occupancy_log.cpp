#include "parklot/analytics/occupancy_log.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <utility>

#include "parklot/error.hpp"

namespace parklot::analytics {

using nlohmann::json;
using occupancy::OccupancyFrame;
using occupancy::SlotState;

namespace {

template <typename Int>
void append_int(std::string& out, Int value) {
  char buf[24];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  out.append(buf, end);
}

std::uint64_t unsigned_at(const json& j, std::size_t line, const char* field) {
  if (!j.is_number_unsigned()) throw ParseError(line, field, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

void check_next(const LogHeader& header, const std::optional<std::uint64_t>& last, const OccupancyFrame& frame) {
  if (last && frame.frame_index <= *last) {
    throw Error("log: frame index " + std::to_string(frame.frame_index) + " does not follow " + std::to_string(*last));
  }
  if (frame.entries.size() != header.slot_count) {
    throw Error("log: frame " + std::to_string(frame.frame_index) + " has " + std::to_string(frame.entries.size()) +
                " slots, header declares " + std::to_string(header.slot_count));
  }
}

}  // namespace

void LogHeader::validate() const {
  std::vector<std::string> bad;
  if (version != 1) bad.push_back("unsupported log version " + std::to_string(version));
  if (!(fps > 0.0) || !std::isfinite(fps)) bad.push_back("fps must be positive");
  if (!bad.empty()) throw ValidationError(std::move(bad));
}

void append_frame(OccupancyLog& log, OccupancyFrame frame) {
  std::optional<std::uint64_t> last;
  if (!log.frames.empty()) last = log.frames.back().frame_index;
  check_next(log.header, last, frame);
  frame.validate();
  log.frames.push_back(std::move(frame));
}

std::string serialize_header(const LogHeader& header) {
  nlohmann::ordered_json j;
  j["version"] = header.version;
  j["fps"] = header.fps;
  j["slot_count"] = header.slot_count;
  j["slot_map_sha256"] = header.slot_map_sha256;
  j["start_timestamp_ms"] = header.start_timestamp_ms ? nlohmann::ordered_json(*header.start_timestamp_ms) : nullptr;
  return j.dump();
}

std::string serialize_frame(const OccupancyFrame& frame) {
  std::string out;
  out.reserve(32 + frame.entries.size() * 8 + frame.unassigned.size() * 6);
  out += "{\"f\":";
  append_int(out, frame.frame_index);
  out += ",\"t\":";
  if (frame.timestamp_ms) {
    append_int(out, *frame.timestamp_ms);
  } else {
    out += "null";
  }
  out += ",\"s\":[";
  for (std::size_t i = 0; i < frame.entries.size(); ++i) {
    if (i) out += ',';
    out += frame.entries[i].occupied ? "[1," : "[0,";
    append_int(out, frame.entries[i].vehicle_id);
    out += ']';
  }
  out += "],\"u\":[";
  for (std::size_t i = 0; i < frame.unassigned.size(); ++i) {
    if (i) out += ',';
    append_int(out, frame.unassigned[i]);
  }
  out += "]}";
  return out;
}

std::string serialize_log(const OccupancyLog& log) {
  std::string out = serialize_header(log.header);
  out += '\n';
  for (const auto& frame : log.frames) {
    out += serialize_frame(frame);
    out += '\n';
  }
  return out;
}

LogHeader parse_header(std::string_view line) {
  json j;
  try {
    j = json::parse(line.begin(), line.end());
  } catch (const json::parse_error& e) {
    throw ParseError(1, "", std::string("corrupt log header: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(1, "", "log header must be an object");
  LogHeader h;
  auto get = [&](const char* key) -> const json& {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(1, key, "missing");
    return *it;
  };
  if (!get("version").is_number_integer()) throw ParseError(1, "version", "expected an integer");
  h.version = get("version").get<int>();
  if (!get("fps").is_number()) throw ParseError(1, "fps", "expected a number");
  h.fps = get("fps").get<double>();
  h.slot_count = unsigned_at(get("slot_count"), 1, "slot_count");
  if (!get("slot_map_sha256").is_string()) throw ParseError(1, "slot_map_sha256", "expected a string");
  h.slot_map_sha256 = get("slot_map_sha256").get<std::string>();
  if (auto it = j.find("start_timestamp_ms"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw ParseError(1, "start_timestamp_ms", "expected an integer or null");
    h.start_timestamp_ms = it->get<std::int64_t>();
  }
  try {
    h.validate();
  } catch (const ValidationError& e) {
    throw ParseError(1, "", e.what());
  }
  return h;
}

OccupancyFrame parse_frame(std::string_view line, std::size_t record_index) {
  json j;
  try {
    j = json::parse(line.begin(), line.end());
  } catch (const json::parse_error& e) {
    throw ParseError(record_index, "", std::string("corrupt record: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(record_index, "", "record must be an object");
  auto get = [&](const char* key) -> const json& {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(record_index, key, "missing");
    return *it;
  };

  OccupancyFrame f;
  f.frame_index = unsigned_at(get("f"), record_index, "f");
  if (auto it = j.find("t"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw ParseError(record_index, "t", "expected an integer or null");
    f.timestamp_ms = it->get<std::int64_t>();
  }
  const json& s = get("s");
  if (!s.is_array()) throw ParseError(record_index, "s", "expected an array");
  f.entries.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::string field = "s[" + std::to_string(i) + "]";
    if (!s[i].is_array() || s[i].size() != 2) throw ParseError(record_index, field, "expected [occ01, vehicle_id]");
    const std::uint64_t occ = unsigned_at(s[i][0], record_index, field.c_str());
    const std::uint64_t id = unsigned_at(s[i][1], record_index, field.c_str());
    if (occ > 1) throw ParseError(record_index, field, "occupancy flag must be 0 or 1");
    if ((occ == 0) != (id == 0)) throw ParseError(record_index, field, "vehicle id must be 0 exactly when free");
    f.entries.push_back({occ == 1, id});
  }
  const json& u = get("u");
  if (!u.is_array()) throw ParseError(record_index, "u", "expected an array");
  for (const auto& id : u) f.unassigned.push_back(unsigned_at(id, record_index, "u"));
  return f;
}

OccupancyLog read_log(std::string_view contents) {
  OccupancyLog log;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool have_header = false;
  while (pos < contents.size()) {
    const std::size_t nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) break;  // in-flight append
    const std::string_view line = contents.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!have_header) {
      log.header = parse_header(line);
      have_header = true;
      continue;
    }
    OccupancyFrame frame = parse_frame(line, line_no);
    try {
      append_frame(log, std::move(frame));
    } catch (const Error& e) {
      throw ParseError(line_no, "", e.what());
    }
  }
  if (!have_header) throw ParseError(1, "", "log has no complete header line");
  return log;
}

OccupancyLog read_log(std::istream& in) {
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return read_log(buffer.str());
}

OccupancyLog read_log_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StorageError("cannot open log " + path.string());
  return read_log(in);
}

LogWriter::LogWriter(const std::filesystem::path& path, LogHeader header, Options options)
    : path_(path), header_(std::move(header)), options_(options) {
  header_.validate();
  fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) throw StorageError("cannot create log " + path.string() + ": " + std::strerror(errno));
  write_all(serialize_header(header_) + "\n");
}

LogWriter::~LogWriter() { close(); }

LogWriter::LogWriter(LogWriter&& other) noexcept
    : path_(std::move(other.path_)),
      header_(std::move(other.header_)),
      options_(other.options_),
      fd_(std::exchange(other.fd_, -1)),
      records_(other.records_),
      last_frame_(other.last_frame_) {}

LogWriter& LogWriter::operator=(LogWriter&& other) noexcept {
  if (this != &other) {
    close();
    path_ = std::move(other.path_);
    header_ = std::move(other.header_);
    options_ = other.options_;
    fd_ = std::exchange(other.fd_, -1);
    records_ = other.records_;
    last_frame_ = other.last_frame_;
  }
  return *this;
}

void LogWriter::append(const OccupancyFrame& frame) {
  check_next(header_, last_frame_, frame);
  frame.validate();
  buffer_ = serialize_frame(frame);
  buffer_ += '\n';
  write_all(buffer_);
  last_frame_ = frame.frame_index;
  ++records_;
  if (options_.sync_every != 0 && records_ % options_.sync_every == 0) sync();
}

void LogWriter::sync() {
  if (fd_ >= 0 && ::fsync(fd_) != 0) throw StorageError("fsync " + path_.string() + ": " + std::strerror(errno));
}

void LogWriter::write_all(std::string_view bytes) {
  if (fd_ < 0) throw StorageError("log " + path_.string() + " is closed");
  while (!bytes.empty()) {
    const ssize_t n = ::write(fd_, bytes.data(), bytes.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw StorageError("write " + path_.string() + ": " + std::strerror(errno));
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

void LogWriter::close() noexcept {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

}  // namespace parklot::analytics
