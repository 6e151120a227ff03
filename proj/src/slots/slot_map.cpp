#include "parklot/slots/slot_map.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "parklot/error.hpp"

namespace parklot::slots {

using nlohmann::json;

namespace {

constexpr double kClosureSnap = 1e-6;

std::size_t line_of(std::string_view doc, std::size_t byte) {
  byte = std::min(byte, doc.size());
  return 1 + static_cast<std::size_t>(std::count(doc.begin(), doc.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

double number_at(const json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError(0, path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ParseError(0, path, "expected a finite number");
  return v;
}

const json& member(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(0, path.empty() ? key : path + "." + key, "missing");
  return *it;
}

std::string fmt_id(SlotId id) { return "slot " + std::to_string(id); }

// Frame, version and bounds checks; duplicates are handled by the callers.
std::vector<std::string> frame_violations(double width, double height, int version, const std::vector<Slot>& slots) {
  std::vector<std::string> bad;
  if (version != SlotMap::kFormatVersion) bad.push_back("unsupported version " + std::to_string(version));
  if (!(width > 0.0) || !std::isfinite(width)) bad.push_back("frame_width must be positive");
  if (!(height > 0.0) || !std::isfinite(height)) bad.push_back("frame_height must be positive");
  for (const auto& slot : slots) {
    const auto& v = slot.polygon.vertices();
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (v[k].x < 0.0 || v[k].x > width || v[k].y < 0.0 || v[k].y > height) {
        bad.push_back(fmt_id(slot.slot_id) + ": vertex " + std::to_string(k) + " outside the frame");
      }
    }
  }
  return bad;
}

}  // namespace

SlotMap::SlotMap(double frame_width, double frame_height, std::vector<Slot> slots,
                 std::optional<std::string> reference_image, int version)
    : frame_width_(frame_width),
      frame_height_(frame_height),
      reference_image_(std::move(reference_image)),
      version_(version),
      slots_(std::move(slots)) {
  std::stable_sort(slots_.begin(), slots_.end(), [](const Slot& a, const Slot& b) { return a.slot_id < b.slot_id; });
  std::vector<std::string> bad = frame_violations(frame_width_, frame_height_, version_, slots_);
  for (std::size_t i = 1; i < slots_.size(); ++i) {
    if (slots_[i].slot_id == slots_[i - 1].slot_id && (i < 2 || slots_[i - 2].slot_id != slots_[i].slot_id)) {
      bad.push_back("duplicate slot_id " + std::to_string(slots_[i].slot_id));
    }
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));
}

std::optional<std::size_t> SlotMap::index_of(SlotId id) const noexcept {
  auto it = std::lower_bound(slots_.begin(), slots_.end(), id, [](const Slot& s, SlotId v) { return s.slot_id < v; });
  if (it == slots_.end() || it->slot_id != id) return std::nullopt;
  return static_cast<std::size_t>(it - slots_.begin());
}

LoadedSlotMap load_slot_map(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw ParseError(line_of(document, e.byte), "", e.what());
  }
  if (!doc.is_object()) throw ParseError(1, "", "expected a JSON object");

  const json& version = member(doc, "version", "");
  if (!version.is_number_integer()) throw ParseError(0, "version", "expected an integer");
  const double width = number_at(member(doc, "frame_width", ""), "frame_width");
  const double height = number_at(member(doc, "frame_height", ""), "frame_height");

  std::optional<std::string> reference;
  if (auto it = doc.find("reference_image"); it != doc.end() && !it->is_null()) {
    if (!it->is_string()) throw ParseError(0, "reference_image", "expected a string or null");
    reference = it->get<std::string>();
  }

  const json& slots_json = member(doc, "slots", "");
  if (!slots_json.is_array()) throw ParseError(0, "slots", "expected an array");

  std::vector<std::string> violations;
  std::vector<std::string> warnings;
  std::vector<Slot> slots;
  for (std::size_t i = 0; i < slots_json.size(); ++i) {
    const std::string path = "slots[" + std::to_string(i) + "]";
    const json& s = slots_json[i];
    if (!s.is_object()) throw ParseError(0, path, "expected an object");
    const json& id_json = member(s, "slot_id", path);
    if (!id_json.is_number_unsigned() || id_json.get<std::uint64_t>() > UINT32_MAX) {
      throw ParseError(0, path + ".slot_id", "expected a non-negative integer");
    }
    const auto id = static_cast<SlotId>(id_json.get<std::uint64_t>());

    std::optional<std::string> label;
    if (auto it = s.find("label"); it != s.end() && !it->is_null()) {
      if (!it->is_string()) throw ParseError(0, path + ".label", "expected a string or null");
      label = it->get<std::string>();
    }

    const json& poly = member(s, "polygon", path);
    if (!poly.is_array()) throw ParseError(0, path + ".polygon", "expected an array of [x,y] pairs");
    std::vector<geometry::Point> vertices;
    vertices.reserve(poly.size());
    for (std::size_t k = 0; k < poly.size(); ++k) {
      const std::string vpath = path + ".polygon[" + std::to_string(k) + "]";
      if (!poly[k].is_array() || poly[k].size() != 2) throw ParseError(0, vpath, "expected an [x,y] pair");
      vertices.push_back({number_at(poly[k][0], vpath + "[0]"), number_at(poly[k][1], vpath + "[1]")});
    }

    if (vertices.size() >= 2 && vertices.front() != vertices.back() &&
        std::hypot(vertices.front().x - vertices.back().x, vertices.front().y - vertices.back().y) <= kClosureSnap) {
      vertices.back() = vertices.front();
      warnings.push_back(fmt_id(id) + ": polygon auto-closed (last vertex snapped to the first)");
    }

    auto result = geometry::validate_polygon(vertices);
    if (auto* bad = std::get_if<std::vector<geometry::PolygonViolation>>(&result)) {
      for (const auto& v : *bad) violations.push_back(fmt_id(id) + ": " + v.describe());
      continue;
    }
    slots.push_back({id, std::get<geometry::Polygon>(std::move(result)), std::move(label)});
  }

  std::set<SlotId> seen;
  std::set<SlotId> reported;
  for (std::size_t i = 0; i < slots_json.size(); ++i) {
    const json& id_json = slots_json[i]["slot_id"];
    const auto id = static_cast<SlotId>(id_json.get<std::uint64_t>());
    if (!seen.insert(id).second && reported.insert(id).second) {
      violations.push_back("duplicate slot_id " + std::to_string(id));
    }
  }

  const int format_version = version.get<int>();
  for (auto& v : frame_violations(width, height, format_version, slots)) violations.push_back(std::move(v));
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return {SlotMap(width, height, std::move(slots), std::move(reference), format_version), std::move(warnings)};
}

LoadedSlotMap load_slot_map(std::istream& in) {
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_slot_map(buffer.str());
}

LoadedSlotMap load_slot_map_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StorageError("cannot open slot map " + path.string());
  return load_slot_map(in);
}

std::string save_slot_map(const SlotMap& map) {
  nlohmann::ordered_json doc;
  doc["version"] = map.version();
  doc["frame_width"] = map.frame_width();
  doc["frame_height"] = map.frame_height();
  doc["reference_image"] = map.reference_image() ? nlohmann::ordered_json(*map.reference_image()) : nullptr;
  auto slots = nlohmann::ordered_json::array();
  for (const auto& slot : map.slots()) {
    nlohmann::ordered_json s;
    s["slot_id"] = slot.slot_id;
    if (slot.label) s["label"] = *slot.label;
    auto poly = nlohmann::ordered_json::array();
    for (const auto& p : slot.polygon.vertices()) poly.push_back({p.x, p.y});
    s["polygon"] = std::move(poly);
    slots.push_back(std::move(s));
  }
  doc["slots"] = std::move(slots);
  return doc.dump() + "\n";
}

void save_slot_map_file(const SlotMap& map, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << save_slot_map(map);
  if (!out) throw StorageError("cannot write slot map " + path.string());
}

std::string slot_map_sha256(const SlotMap& map) {
  const std::string bytes = save_slot_map(map);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xF]);
  }
  return hex;
}

std::vector<SlotOverlap> slot_overlap_report(const SlotMap& map) {
  constexpr double kAreaTolerance = 1e-9;
  constexpr double kLengthTolerance = 1e-9;
  std::vector<SlotOverlap> out;
  const auto& slots = map.slots();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    for (std::size_t j = i + 1; j < slots.size(); ++j) {
      const double area = geometry::intersection_area(slots[i].polygon, slots[j].polygon);
      const double shared = geometry::shared_boundary_length(slots[i].polygon, slots[j].polygon);
      if (area > kAreaTolerance || shared > kLengthTolerance) {
        out.push_back({slots[i].slot_id, slots[j].slot_id, area > kAreaTolerance, area, shared});
      }
    }
  }
  return out;
}

}  // namespace parklot::slots
