#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "parklot/tracking/track.hpp"

namespace parklot::tracking {

/// One confirmed vehicle reported for a frame. `bbox` is the matched
/// detection when the track was observed this frame, otherwise the
/// predicted box of a coasting track.
struct TrackedVehicle {
  TrackId id = 0;
  geometry::BoundingBox bbox;
  VehicleClass cls = VehicleClass::Car;
  geometry::Point center;
  bool observed = false;

  friend bool operator==(const TrackedVehicle&, const TrackedVehicle&) = default;
};

struct StepStats {
  std::size_t matched = 0;
  std::size_t created = 0;
  std::size_t deleted = 0;
  std::size_t corrupted = 0;
};

/// Tracking-by-detection state. Single writer: one thread calls `step` at a
/// time; the object itself may move between threads between calls.
class Tracker {
public:
  explicit Tracker(TrackerParams params);

  /// Predict, associate, update, age out and spawn; returns Confirmed tracks
  /// in ascending id order.
  std::vector<TrackedVehicle> step(std::span<const Detection> detections);

  const std::vector<Track>& tracks() const noexcept { return tracks_; }
  const TrackerParams& params() const noexcept { return params_; }
  TrackId next_id() const noexcept { return next_id_; }
  const StepStats& last_stats() const noexcept { return stats_; }

private:
  TrackerParams params_;
  std::vector<Track> tracks_;
  TrackId next_id_ = 1;
  StepStats stats_;
};

}  // namespace parklot::tracking
