#include "parklot/ingest/detection_stream.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <json.hpp>
#include <sstream>

#include "parklot/error.hpp"

namespace parklot::ingest {

using nlohmann::json;

namespace {

double finite_at(const json& j, std::size_t line, const std::string& field) {
  if (!j.is_number()) throw ParseError(line, field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ParseError(line, field, "expected a finite number");
  return v;
}

void append_double(std::string& out, double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
}

template <typename Int>
void append_int(std::string& out, Int v) {
  char buf[24];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
}

bool blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

}  // namespace

DetectionFrame parse_detection_line(std::string_view line, std::size_t line_no, const StreamOptions& options) {
  json j;
  try {
    j = json::parse(line.begin(), line.end());
  } catch (const json::parse_error& e) {
    throw ParseError(line_no, "", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(line_no, "", "expected a JSON object");

  DetectionFrame frame;
  auto f = j.find("f");
  if (f == j.end()) throw ParseError(line_no, "f", "missing");
  if (!f->is_number_unsigned()) throw ParseError(line_no, "f", "expected a non-negative integer");
  frame.frame_index = f->get<std::uint64_t>();

  if (auto t = j.find("t"); t != j.end() && !t->is_null()) {
    if (!t->is_number_integer()) throw ParseError(line_no, "t", "expected an integer or null");
    frame.timestamp_ms = t->get<std::int64_t>();
  }

  auto d = j.find("d");
  if (d == j.end()) throw ParseError(line_no, "d", "missing");
  if (!d->is_array()) throw ParseError(line_no, "d", "expected an array");
  frame.detections.reserve(d->size());
  for (std::size_t i = 0; i < d->size(); ++i) {
    const std::string path = "d[" + std::to_string(i) + "]";
    const json& item = (*d)[i];
    if (!item.is_object()) throw ParseError(line_no, path, "expected an object");
    tracking::Detection det;

    auto b = item.find("b");
    if (b == item.end()) throw ParseError(line_no, path + ".b", "missing");
    if (!b->is_array() || b->size() != 4) throw ParseError(line_no, path + ".b", "expected [x_min,y_min,x_max,y_max]");
    det.bbox = {finite_at((*b)[0], line_no, path + ".b[0]"), finite_at((*b)[1], line_no, path + ".b[1]"),
                finite_at((*b)[2], line_no, path + ".b[2]"), finite_at((*b)[3], line_no, path + ".b[3]")};
    if (!(det.bbox.x_max > det.bbox.x_min)) throw ParseError(line_no, path + ".b[2]", "x_max must exceed x_min");
    if (!(det.bbox.y_max > det.bbox.y_min)) throw ParseError(line_no, path + ".b[3]", "y_max must exceed y_min");

    auto c = item.find("c");
    if (c == item.end()) throw ParseError(line_no, path + ".c", "missing");
    if (!c->is_string()) throw ParseError(line_no, path + ".c", "expected a class label");
    const auto label = c->get<std::string>();
    auto cls = tracking::parse_vehicle_class(label);
    if (!cls) {
      if (!options.accept_unknown_class) throw ParseError(line_no, path + ".c", "unknown class '" + label + "'");
      cls = tracking::VehicleClass::Unknown;
    }
    det.cls = *cls;

    auto p = item.find("p");
    if (p == item.end()) throw ParseError(line_no, path + ".p", "missing");
    det.confidence = finite_at(*p, line_no, path + ".p");
    if (det.confidence < 0.0 || det.confidence > 1.0) throw ParseError(line_no, path + ".p", "must lie in [0, 1]");

    if (auto a = item.find("a"); a != item.end() && !a->is_null()) {
      if (!a->is_array() || a->empty()) throw ParseError(line_no, path + ".a", "expected a non-empty number array");
      det.appearance.reserve(a->size());
      double norm = 0.0;
      for (std::size_t k = 0; k < a->size(); ++k) {
        const double v = finite_at((*a)[k], line_no, path + ".a[" + std::to_string(k) + "]");
        det.appearance.push_back(v);
        norm += v * v;
      }
      norm = std::sqrt(norm);
      if (!(norm > 0.0)) throw ParseError(line_no, path + ".a", "zero-length appearance vector");
      for (double& v : det.appearance) v /= norm;
    }
    frame.detections.push_back(std::move(det));
  }
  return frame;
}

std::string serialize_detection_frame(const DetectionFrame& frame) {
  std::string out = "{\"f\":";
  append_int(out, frame.frame_index);
  out += ",\"t\":";
  if (frame.timestamp_ms) {
    append_int(out, *frame.timestamp_ms);
  } else {
    out += "null";
  }
  out += ",\"d\":[";
  for (std::size_t i = 0; i < frame.detections.size(); ++i) {
    const auto& det = frame.detections[i];
    if (i) out += ',';
    out += "{\"b\":[";
    append_double(out, det.bbox.x_min);
    out += ',';
    append_double(out, det.bbox.y_min);
    out += ',';
    append_double(out, det.bbox.x_max);
    out += ',';
    append_double(out, det.bbox.y_max);
    out += "],\"c\":\"";
    out += to_string(det.cls);
    out += "\",\"p\":";
    append_double(out, det.confidence);
    if (det.has_appearance()) {
      out += ",\"a\":[";
      for (std::size_t k = 0; k < det.appearance.size(); ++k) {
        if (k) out += ',';
        append_double(out, det.appearance[k]);
      }
      out += ']';
    }
    out += '}';
  }
  out += "]}";
  return out;
}

DetectionStreamReader::DetectionStreamReader(std::istream& in, StreamOptions options)
    : in_(&in), options_(options) {}

std::optional<DetectionFrame> DetectionStreamReader::next() {
  while (std::getline(*in_, buffer_)) {
    ++line_;
    if (blank(buffer_)) continue;
    DetectionFrame frame = parse_detection_line(buffer_, line_, options_);
    if (last_frame_ && frame.frame_index <= *last_frame_) {
      throw ParseError(line_, "f",
                       "frame index " + std::to_string(frame.frame_index) + " does not follow " +
                           std::to_string(*last_frame_));
    }
    for (std::size_t i = 0; i < frame.detections.size(); ++i) {
      const auto& a = frame.detections[i].appearance;
      if (a.empty()) continue;
      if (!appearance_dim_) appearance_dim_ = a.size();
      if (a.size() != *appearance_dim_) {
        throw ParseError(line_, "d[" + std::to_string(i) + "].a",
                         "appearance dimension " + std::to_string(a.size()) + " differs from stream dimension " +
                             std::to_string(*appearance_dim_));
      }
    }
    last_frame_ = frame.frame_index;
    ++frames_;
    return frame;
  }
  if (in_->bad()) throw StorageError("detection stream: read failure after line " + std::to_string(line_));
  return std::nullopt;
}

std::vector<DetectionFrame> parse_stream(std::string_view document, const StreamOptions& options) {
  std::istringstream in{std::string(document)};
  DetectionStreamReader reader(in, options);
  std::vector<DetectionFrame> frames;
  while (auto frame = reader.next()) frames.push_back(std::move(*frame));
  return frames;
}

}  // namespace parklot::ingest
