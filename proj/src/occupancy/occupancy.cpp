#include "parklot/occupancy/occupancy.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "parklot/error.hpp"

namespace parklot::occupancy {

void OccupancyFrame::validate() const {
  std::vector<std::string> bad;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (!e.occupied && e.vehicle_id != 0) bad.push_back("entry " + std::to_string(i) + ": free slot with vehicle id");
    if (e.occupied && e.vehicle_id == 0) bad.push_back("entry " + std::to_string(i) + ": occupied slot with id 0");
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));
}

AssignResult assign_frame(std::span<const VehicleObservation> vehicles, const slots::SlotMap& map,
                          std::uint64_t frame_index, std::optional<std::int64_t> timestamp_ms) {
  std::vector<VehicleObservation> ordered(vehicles.begin(), vehicles.end());
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (ordered[i].id == 0) throw ValidationError({"vehicle id 0 is reserved for free slots"});
    if (i > 0 && ordered[i].id == ordered[i - 1].id) {
      throw ValidationError({"duplicate vehicle_id " + std::to_string(ordered[i].id) + " in frame " +
                             std::to_string(frame_index)});
    }
  }

  AssignResult result;
  result.frame.frame_index = frame_index;
  result.frame.timestamp_ms = timestamp_ms;
  result.frame.entries.assign(map.size(), SlotState{});
  const auto& slots = map.slots();
  for (const auto& vehicle : ordered) {
    std::optional<std::size_t> hit;
    for (std::size_t s = 0; s < slots.size(); ++s) {
      if (geometry::point_in_polygon(vehicle.center, slots[s].polygon)) {
        hit = s;
        break;
      }
    }
    if (!hit) {
      result.frame.unassigned.push_back(vehicle.id);
      continue;
    }
    SlotState& entry = result.frame.entries[*hit];
    if (entry.occupied) {
      result.conflicts.push_back({frame_index, slots[*hit].slot_id, entry.vehicle_id, vehicle.id});
      result.frame.unassigned.push_back(vehicle.id);
      continue;
    }
    entry = {true, vehicle.id};
  }
  return result;
}

std::string_view to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::Occupied: return "Occupied";
    case EventKind::Freed: return "Freed";
    case EventKind::VehicleChanged: return "VehicleChanged";
  }
  return "Occupied";
}

std::optional<EventKind> parse_event_kind(std::string_view text) noexcept {
  for (auto k : {EventKind::Occupied, EventKind::Freed, EventKind::VehicleChanged}) {
    if (text == to_string(k)) return k;
  }
  return std::nullopt;
}

namespace {

SlotId id_at(std::span<const SlotId> slot_ids, std::size_t i) {
  return slot_ids.empty() ? static_cast<SlotId>(i) : slot_ids[i];
}

}  // namespace

std::vector<OccupancyEvent> diff_frames(const OccupancyFrame& prev, const OccupancyFrame& curr,
                                        std::span<const SlotId> slot_ids) {
  if (prev.entries.size() != curr.entries.size()) {
    throw Error("diff_frames: slot count changed from " + std::to_string(prev.entries.size()) + " to " +
                std::to_string(curr.entries.size()));
  }
  if (!slot_ids.empty() && slot_ids.size() != curr.entries.size()) throw Error("diff_frames: slot id list size mismatch");
  if (curr.frame_index <= prev.frame_index) throw Error("diff_frames: frame index must increase");

  std::vector<OccupancyEvent> events;
  for (std::size_t i = 0; i < curr.entries.size(); ++i) {
    const SlotState& a = prev.entries[i];
    const SlotState& b = curr.entries[i];
    if (!a.occupied && b.occupied) {
      events.push_back({curr.frame_index, id_at(slot_ids, i), EventKind::Occupied, b.vehicle_id});
    } else if (a.occupied && !b.occupied) {
      events.push_back({curr.frame_index, id_at(slot_ids, i), EventKind::Freed, a.vehicle_id});
    } else if (a.occupied && b.occupied && a.vehicle_id != b.vehicle_id) {
      events.push_back({curr.frame_index, id_at(slot_ids, i), EventKind::VehicleChanged, b.vehicle_id});
    }
  }
  return events;
}

std::vector<OccupancyEvent> initial_events(const OccupancyFrame& first, std::span<const SlotId> slot_ids) {
  if (!slot_ids.empty() && slot_ids.size() != first.entries.size()) throw Error("initial_events: slot id list size mismatch");
  std::vector<OccupancyEvent> events;
  for (std::size_t i = 0; i < first.entries.size(); ++i) {
    if (first.entries[i].occupied) {
      events.push_back({first.frame_index, id_at(slot_ids, i), EventKind::Occupied, first.entries[i].vehicle_id});
    }
  }
  return events;
}

OccupancyFrame apply_events(const OccupancyFrame& base, std::span<const OccupancyEvent> events,
                            std::uint64_t frame_index, std::span<const SlotId> slot_ids) {
  OccupancyFrame out;
  out.frame_index = frame_index;
  out.entries = base.entries;
  std::unordered_map<SlotId, std::size_t> position;
  for (std::size_t i = 0; i < out.entries.size(); ++i) position.emplace(id_at(slot_ids, i), i);
  for (const auto& ev : events) {
    auto it = position.find(ev.slot_id);
    if (it == position.end()) throw Error("apply_events: unknown slot " + std::to_string(ev.slot_id));
    SlotState& s = out.entries[it->second];
    s = ev.kind == EventKind::Freed ? SlotState{} : SlotState{true, ev.vehicle_id};
  }
  return out;
}

std::vector<SlotId> slot_ids_of(const slots::SlotMap& map) {
  std::vector<SlotId> ids;
  ids.reserve(map.size());
  for (const auto& s : map.slots()) ids.push_back(s.slot_id);
  return ids;
}

OccupancyFrame empty_frame(std::size_t slot_count, std::uint64_t frame_index) {
  OccupancyFrame f;
  f.frame_index = frame_index;
  f.entries.assign(slot_count, SlotState{});
  return f;
}

FrameSummary summarize(const OccupancyFrame& frame) noexcept {
  FrameSummary s;
  s.frame_index = frame.frame_index;
  s.total_slots = frame.entries.size();
  s.occupied_count = static_cast<std::size_t>(
      std::count_if(frame.entries.begin(), frame.entries.end(), [](const SlotState& e) { return e.occupied; }));
  s.free_count = s.total_slots - s.occupied_count;
  return s;
}

OccupancyFrame OccupancyDebouncer::apply(const OccupancyFrame& raw) {
  if (min_dwell_ <= 1) return raw;
  if (reported_.size() != raw.entries.size()) {
    reported_.assign(raw.entries.size(), SlotState{});
    pending_.assign(raw.entries.size(), Pending{});
  }

  std::vector<char> committed(raw.entries.size(), 0);
  for (std::size_t i = 0; i < raw.entries.size(); ++i) {
    const SlotState& now = raw.entries[i];
    Pending& p = pending_[i];
    if (now == reported_[i]) {
      p = {};
      continue;
    }
    if (p.count > 0 && p.state == now) {
      ++p.count;
    } else {
      p = {now, 1};
    }
    if (p.count >= min_dwell_) {
      reported_[i] = now;
      committed[i] = 1;
      p = {};
    }
  }

  // A vehicle newly committed elsewhere cannot also be held in a stale slot.
  std::unordered_set<VehicleId> moved;
  for (std::size_t i = 0; i < reported_.size(); ++i) {
    if (committed[i] && reported_[i].occupied) moved.insert(reported_[i].vehicle_id);
  }
  for (std::size_t i = 0; i < reported_.size(); ++i) {
    if (!committed[i] && reported_[i].occupied && moved.count(reported_[i].vehicle_id)) reported_[i] = {};
  }

  OccupancyFrame out = raw;
  out.entries = reported_;
  std::unordered_set<VehicleId> placed;
  for (const auto& e : out.entries) {
    if (e.occupied) placed.insert(e.vehicle_id);
  }
  std::vector<VehicleId> unassigned;
  for (auto id : raw.unassigned) {
    if (!placed.count(id)) unassigned.push_back(id);
  }
  // Vehicles assigned in the raw frame whose slot is still pending.
  for (const auto& e : raw.entries) {
    if (e.occupied && !placed.count(e.vehicle_id)) unassigned.push_back(e.vehicle_id);
  }
  std::sort(unassigned.begin(), unassigned.end());
  unassigned.erase(std::unique(unassigned.begin(), unassigned.end()), unassigned.end());
  out.unassigned = std::move(unassigned);
  return out;
}

}  // namespace parklot::occupancy
