#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <vector>

#include "parklot/analytics/occupancy_log.hpp"
#include "parklot/ingest/detection_stream.hpp"
#include "parklot/occupancy/occupancy.hpp"
#include "parklot/slots/slot_map.hpp"
#include "parklot/tracking/tracker.hpp"

namespace parklot::engine {

class Broadcaster;

struct FrameResult {
  occupancy::OccupancyFrame frame;
  occupancy::FrameSummary summary;
  std::vector<occupancy::OccupancyEvent> events;
  std::vector<occupancy::SlotConflict> conflicts;
  std::size_t confirmed_tracks = 0;
};

/// Per-frame core: track, assign to slots, debounce, diff. Owns all mutable
/// tracking and occupancy state; drive it from one thread.
class Pipeline {
public:
  Pipeline(slots::SlotMap map, tracking::TrackerParams params, int min_dwell_frames = 0);

  /// Throws Error when frame indices do not increase.
  FrameResult process(const ingest::DetectionFrame& input);

  const slots::SlotMap& map() const noexcept { return map_; }
  const std::vector<occupancy::SlotId>& slot_ids() const noexcept { return slot_ids_; }
  const std::optional<occupancy::OccupancyFrame>& last_frame() const noexcept { return last_; }
  const tracking::Tracker& tracker() const noexcept { return tracker_; }

private:
  slots::SlotMap map_;
  std::vector<occupancy::SlotId> slot_ids_;
  tracking::Tracker tracker_;
  occupancy::OccupancyDebouncer debouncer_;
  std::optional<occupancy::OccupancyFrame> last_;
};

struct RunStats {
  std::uint64_t frames = 0;
  std::size_t conflicts = 0;
  std::optional<occupancy::FrameSummary> last_summary;
  double seconds = 0.0;
};

/// Streams frames from `reader` through `pipeline`, appending each frame to
/// `log` and publishing it to `broadcaster` when given. Stops early when
/// `stop` becomes true. Parse and storage errors propagate.
RunStats run_stream(ingest::DetectionStreamReader& reader, Pipeline& pipeline, analytics::LogWriter* log,
                    Broadcaster* broadcaster, const std::atomic<bool>* stop = nullptr);

}  // namespace parklot::engine
