#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "parklot/geometry/geometry.hpp"

namespace parklot::slots {

using SlotId = std::uint32_t;

struct Slot {
  SlotId slot_id;
  geometry::Polygon polygon;
  std::optional<std::string> label;

  friend bool operator==(const Slot&, const Slot&) = default;
};

/// Immutable, validated set of annotated parking-slot polygons. Slots are
/// kept in ascending slot_id order.
class SlotMap {
public:
  static constexpr int kFormatVersion = 1;

  /// Throws ValidationError listing every problem (duplicate ids, polygons
  /// outside the frame, bad frame size, unsupported version).
  SlotMap(double frame_width, double frame_height, std::vector<Slot> slots,
          std::optional<std::string> reference_image = std::nullopt, int version = kFormatVersion);

  double frame_width() const noexcept { return frame_width_; }
  double frame_height() const noexcept { return frame_height_; }
  const std::optional<std::string>& reference_image() const noexcept { return reference_image_; }
  int version() const noexcept { return version_; }
  const std::vector<Slot>& slots() const noexcept { return slots_; }
  std::size_t size() const noexcept { return slots_.size(); }

  /// Position of `id` in `slots()`, or nullopt.
  std::optional<std::size_t> index_of(SlotId id) const noexcept;

  friend bool operator==(const SlotMap&, const SlotMap&) = default;

private:
  double frame_width_;
  double frame_height_;
  std::optional<std::string> reference_image_;
  int version_;
  std::vector<Slot> slots_;
};

struct LoadedSlotMap {
  SlotMap map;
  /// Non-fatal notices such as auto-closed polygons.
  std::vector<std::string> warnings;
};

/// Parses and fully validates the slot-map JSON document. Throws ParseError
/// (with line and field path) for malformed documents and ValidationError
/// aggregating every per-slot violation otherwise. Polygons whose last vertex
/// is within 1e-6 of the first are closed exactly and reported as a warning.
LoadedSlotMap load_slot_map(std::string_view document);
LoadedSlotMap load_slot_map(std::istream& in);
LoadedSlotMap load_slot_map_file(const std::filesystem::path& path);

/// Canonical single-line JSON document terminated by '\n'.
std::string save_slot_map(const SlotMap& map);
void save_slot_map_file(const SlotMap& map, const std::filesystem::path& path);

/// Hex SHA-256 of `save_slot_map(map)`.
std::string slot_map_sha256(const SlotMap& map);

struct SlotOverlap {
  SlotId first;
  SlotId second;
  /// True when the interiors overlap with positive area; false when the two
  /// polygons only share boundary.
  bool interior_overlap;
  double overlap_area;
  double shared_boundary;
};

/// Every pair of slots whose interiors overlap (area > 1e-9 px^2) or whose
/// boundaries share more than 1e-9 px of collinear edge. Pairs touching in a
/// single point are not reported.
std::vector<SlotOverlap> slot_overlap_report(const SlotMap& map);

}  // namespace parklot::slots
