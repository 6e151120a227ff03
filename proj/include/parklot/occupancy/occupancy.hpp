#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "parklot/geometry/geometry.hpp"
#include "parklot/slots/slot_map.hpp"

namespace parklot::occupancy {

using VehicleId = std::uint64_t;
using slots::SlotId;

/// Occupancy of one slot. A free slot always carries vehicle id 0.
struct SlotState {
  bool occupied = false;
  VehicleId vehicle_id = 0;

  friend bool operator==(const SlotState&, const SlotState&) = default;
};

/// Per-frame occupancy array. `entries[i]` describes the i-th slot of the
/// slot map in ascending slot_id order.
struct OccupancyFrame {
  std::uint64_t frame_index = 0;
  std::optional<std::int64_t> timestamp_ms;
  std::vector<SlotState> entries;
  /// Vehicles whose center lies in no slot, ascending.
  std::vector<VehicleId> unassigned;

  /// Throws ValidationError when an entry breaks the free/occupied id rule.
  void validate() const;

  friend bool operator==(const OccupancyFrame&, const OccupancyFrame&) = default;
};

struct VehicleObservation {
  VehicleId id = 0;
  geometry::Point center;
};

/// Two vehicle centers landed in the same slot; the lower id keeps it.
struct SlotConflict {
  std::uint64_t frame_index;
  SlotId slot_id;
  VehicleId holder;
  VehicleId rejected;
};

struct AssignResult {
  OccupancyFrame frame;
  std::vector<SlotConflict> conflicts;
};

/// Vehicle-to-slot assignment for one frame. Vehicles are processed in
/// ascending id order; each scans slots in ascending slot_id order and stops
/// at the first polygon containing its center. A vehicle whose first
/// containing slot was already claimed this frame is reported as a conflict
/// and listed as unassigned. Throws ValidationError on duplicate or zero ids.
AssignResult assign_frame(std::span<const VehicleObservation> vehicles, const slots::SlotMap& map,
                          std::uint64_t frame_index, std::optional<std::int64_t> timestamp_ms);

enum class EventKind { Occupied, Freed, VehicleChanged };

std::string_view to_string(EventKind kind) noexcept;
std::optional<EventKind> parse_event_kind(std::string_view text) noexcept;

struct OccupancyEvent {
  std::uint64_t frame_index = 0;
  SlotId slot_id = 0;
  EventKind kind = EventKind::Occupied;
  /// New occupant for Occupied / VehicleChanged, previous occupant for Freed.
  VehicleId vehicle_id = 0;

  friend bool operator==(const OccupancyEvent&, const OccupancyEvent&) = default;
};

/// Slot-state changes between consecutive frames. `slot_ids[i]` names entry i;
/// when empty the entry position is used as the id. Throws Error on a slot
/// count mismatch or non-increasing frame index.
std::vector<OccupancyEvent> diff_frames(const OccupancyFrame& prev, const OccupancyFrame& curr,
                                        std::span<const SlotId> slot_ids = {});

/// Events that turn an all-free map into `first`.
std::vector<OccupancyEvent> initial_events(const OccupancyFrame& first, std::span<const SlotId> slot_ids = {});

/// Applies events onto the entries of `base`, producing the entries of the
/// frame the events were diffed into. Unassigned vehicles are not carried.
OccupancyFrame apply_events(const OccupancyFrame& base, std::span<const OccupancyEvent> events,
                            std::uint64_t frame_index, std::span<const SlotId> slot_ids = {});

/// Slot ids of `map` in entry order.
std::vector<SlotId> slot_ids_of(const slots::SlotMap& map);

/// All-free frame for `slot_count` slots.
OccupancyFrame empty_frame(std::size_t slot_count, std::uint64_t frame_index = 0);

struct FrameSummary {
  std::uint64_t frame_index = 0;
  std::size_t occupied_count = 0;
  std::size_t free_count = 0;
  std::size_t total_slots = 0;

  friend bool operator==(const FrameSummary&, const FrameSummary&) = default;
};

FrameSummary summarize(const OccupancyFrame& frame) noexcept;

/// Flicker suppression: a slot's reported state only changes after the raw
/// state has held for `min_dwell_frames` consecutive frames. Values 0 and 1
/// pass frames through unchanged.
class OccupancyDebouncer {
public:
  explicit OccupancyDebouncer(int min_dwell_frames = 0) : min_dwell_(min_dwell_frames) {}

  OccupancyFrame apply(const OccupancyFrame& raw);

private:
  struct Pending {
    SlotState state;
    int count = 0;
  };

  int min_dwell_;
  std::vector<SlotState> reported_;
  std::vector<Pending> pending_;
};

}  // namespace parklot::occupancy
