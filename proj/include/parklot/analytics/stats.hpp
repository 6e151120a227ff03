#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "parklot/analytics/occupancy_log.hpp"

namespace parklot::analytics {

using occupancy::SlotId;
using occupancy::VehicleId;

// Per-slot results are keyed by slot id. `slot_ids[i]` names log position i;
// when empty, the position itself is used as the id.

struct SeriesPoint {
  std::uint64_t frame_index = 0;
  std::optional<std::int64_t> timestamp_ms;
  std::size_t occupied_count = 0;

  friend bool operator==(const SeriesPoint&, const SeriesPoint&) = default;
};

/// Half-open run [start_frame, end_frame) of one vehicle in one slot.
struct OccupancyInterval {
  std::uint64_t start_frame = 0;
  std::uint64_t end_frame = 0;
  VehicleId vehicle_id = 0;

  std::uint64_t length() const noexcept { return end_frame - start_frame; }

  friend bool operator==(const OccupancyInterval&, const OccupancyInterval&) = default;
};

struct SlotStats {
  SlotId slot_id = 0;
  double occupied_seconds = 0.0;
  std::size_t distinct_vehicles = 0;
  /// Number of intervals.
  std::size_t visits = 0;
  std::vector<OccupancyInterval> intervals;

  friend bool operator==(const SlotStats&, const SlotStats&) = default;
};

struct Overstay {
  SlotId slot_id = 0;
  VehicleId vehicle_id = 0;
  double duration_seconds = 0.0;
  std::uint64_t start_frame = 0;
  std::uint64_t end_frame = 0;

  friend bool operator==(const Overstay&, const Overstay&) = default;
};

std::vector<SeriesPoint> occupancy_timeseries(const OccupancyLog& log);

/// Occupied frame count / fps per slot.
std::map<SlotId, double> slot_durations(const OccupancyLog& log, std::span<const SlotId> slot_ids = {});

/// Distinct vehicle ids seen occupying each slot.
std::map<SlotId, std::size_t> slot_vehicle_counts(const OccupancyLog& log, std::span<const SlotId> slot_ids = {});

/// Occupation intervals per slot (a returning vehicle counts again).
std::map<SlotId, std::size_t> slot_visit_counts(const OccupancyLog& log, std::span<const SlotId> slot_ids = {});

/// Interval decomposition. An interval is a maximal run of records with
/// consecutive frame indices and the same occupant, so a gap in the logged
/// frame indices closes the current interval.
std::map<SlotId, SlotStats> slot_stats(const OccupancyLog& log, std::span<const SlotId> slot_ids = {});

/// Intervals strictly longer than `threshold_seconds`, ordered by slot id then
/// start frame.
std::vector<Overstay> overstays(const std::map<SlotId, SlotStats>& stats, double fps, double threshold_seconds);

/// Rebuilds the occupied-count series from interval decompositions, one point
/// per logged frame.
std::vector<std::size_t> series_from_intervals(const std::map<SlotId, SlotStats>& stats,
                                               std::span<const std::uint64_t> frame_indices);

/// Slot ids for the log positions: those of `map` when given (its size must
/// match the header), otherwise 0..slot_count-1.
std::vector<SlotId> log_slot_ids(const LogHeader& header, const slots::SlotMap* map);

}  // namespace parklot::analytics
