#include "parklot/analytics/stats.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "parklot/error.hpp"

namespace parklot::analytics {

namespace {

SlotId id_at(std::span<const SlotId> slot_ids, std::size_t i) {
  return slot_ids.empty() ? static_cast<SlotId>(i) : slot_ids[i];
}

void check_ids(const OccupancyLog& log, std::span<const SlotId> slot_ids) {
  if (!slot_ids.empty() && slot_ids.size() != log.header.slot_count) {
    throw Error("slot id list has " + std::to_string(slot_ids.size()) + " entries, log declares " +
                std::to_string(log.header.slot_count) + " slots");
  }
}

}  // namespace

std::vector<SeriesPoint> occupancy_timeseries(const OccupancyLog& log) {
  std::vector<SeriesPoint> series;
  series.reserve(log.frames.size());
  for (const auto& frame : log.frames) {
    series.push_back({frame.frame_index, frame.timestamp_ms, occupancy::summarize(frame).occupied_count});
  }
  return series;
}

std::map<SlotId, double> slot_durations(const OccupancyLog& log, std::span<const SlotId> slot_ids) {
  check_ids(log, slot_ids);
  std::vector<std::uint64_t> frames(log.header.slot_count, 0);
  for (const auto& frame : log.frames) {
    for (std::size_t i = 0; i < frame.entries.size(); ++i) frames[i] += frame.entries[i].occupied ? 1 : 0;
  }
  std::map<SlotId, double> out;
  for (std::size_t i = 0; i < frames.size(); ++i) out[id_at(slot_ids, i)] = static_cast<double>(frames[i]) / log.header.fps;
  return out;
}

std::map<SlotId, std::size_t> slot_vehicle_counts(const OccupancyLog& log, std::span<const SlotId> slot_ids) {
  check_ids(log, slot_ids);
  std::vector<std::set<VehicleId>> seen(log.header.slot_count);
  for (const auto& frame : log.frames) {
    for (std::size_t i = 0; i < frame.entries.size(); ++i) {
      if (frame.entries[i].occupied) seen[i].insert(frame.entries[i].vehicle_id);
    }
  }
  std::map<SlotId, std::size_t> out;
  for (std::size_t i = 0; i < seen.size(); ++i) out[id_at(slot_ids, i)] = seen[i].size();
  return out;
}

std::map<SlotId, std::size_t> slot_visit_counts(const OccupancyLog& log, std::span<const SlotId> slot_ids) {
  std::map<SlotId, std::size_t> out;
  for (const auto& [id, stats] : slot_stats(log, slot_ids)) out[id] = stats.visits;
  return out;
}

std::map<SlotId, SlotStats> slot_stats(const OccupancyLog& log, std::span<const SlotId> slot_ids) {
  check_ids(log, slot_ids);
  const std::size_t n = log.header.slot_count;
  std::vector<SlotStats> stats(n);
  std::vector<std::optional<OccupancyInterval>> open(n);
  std::optional<std::uint64_t> previous;

  for (const auto& frame : log.frames) {
    const bool contiguous = previous && frame.frame_index == *previous + 1;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& entry = frame.entries[i];
      auto& current = open[i];
      if (current && (!contiguous || !entry.occupied || entry.vehicle_id != current->vehicle_id)) {
        stats[i].intervals.push_back(*current);
        current.reset();
      }
      if (!entry.occupied) continue;
      if (current) {
        current->end_frame = frame.frame_index + 1;
      } else {
        current = OccupancyInterval{frame.frame_index, frame.frame_index + 1, entry.vehicle_id};
      }
    }
    previous = frame.frame_index;
  }

  std::map<SlotId, SlotStats> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (open[i]) stats[i].intervals.push_back(*open[i]);
    SlotStats& s = stats[i];
    s.slot_id = id_at(slot_ids, i);
    std::uint64_t frames = 0;
    std::set<VehicleId> vehicles;
    for (const auto& iv : s.intervals) {
      frames += iv.length();
      vehicles.insert(iv.vehicle_id);
    }
    s.occupied_seconds = static_cast<double>(frames) / log.header.fps;
    s.distinct_vehicles = vehicles.size();
    s.visits = s.intervals.size();
    out.emplace(s.slot_id, std::move(s));
  }
  return out;
}

std::vector<Overstay> overstays(const std::map<SlotId, SlotStats>& stats, double fps, double threshold_seconds) {
  if (!(fps > 0.0)) throw Error("fps must be positive");
  std::vector<Overstay> out;
  for (const auto& [id, s] : stats) {
    for (const auto& iv : s.intervals) {
      const double seconds = static_cast<double>(iv.length()) / fps;
      if (seconds > threshold_seconds) out.push_back({id, iv.vehicle_id, seconds, iv.start_frame, iv.end_frame});
    }
  }
  return out;
}

std::vector<std::size_t> series_from_intervals(const std::map<SlotId, SlotStats>& stats,
                                               std::span<const std::uint64_t> frame_indices) {
  std::vector<std::size_t> counts(frame_indices.size(), 0);
  for (const auto& [id, s] : stats) {
    for (const auto& iv : s.intervals) {
      auto lo = std::lower_bound(frame_indices.begin(), frame_indices.end(), iv.start_frame);
      auto hi = std::lower_bound(frame_indices.begin(), frame_indices.end(), iv.end_frame);
      for (auto it = lo; it != hi; ++it) ++counts[static_cast<std::size_t>(it - frame_indices.begin())];
    }
  }
  return counts;
}

std::vector<SlotId> log_slot_ids(const LogHeader& header, const slots::SlotMap* map) {
  if (map) {
    if (map->size() != header.slot_count) {
      throw Error("slot map has " + std::to_string(map->size()) + " slots, log declares " +
                  std::to_string(header.slot_count));
    }
    return occupancy::slot_ids_of(*map);
  }
  std::vector<SlotId> ids(header.slot_count);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<SlotId>(i);
  return ids;
}

}  // namespace parklot::analytics
