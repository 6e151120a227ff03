#include "parklot/engine/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <chrono>

#include "parklot/engine/broadcast.hpp"
#include "parklot/error.hpp"

namespace parklot::engine {

Pipeline::Pipeline(slots::SlotMap map, tracking::TrackerParams params, int min_dwell_frames)
    : map_(std::move(map)),
      slot_ids_(occupancy::slot_ids_of(map_)),
      tracker_(std::move(params)),
      debouncer_(min_dwell_frames) {}

FrameResult Pipeline::process(const ingest::DetectionFrame& input) {
  if (last_ && input.frame_index <= last_->frame_index) {
    throw Error("frame index " + std::to_string(input.frame_index) + " does not follow " +
                std::to_string(last_->frame_index));
  }
  const auto vehicles = tracker_.step(input.detections);

  std::vector<occupancy::VehicleObservation> observations;
  observations.reserve(vehicles.size());
  for (const auto& v : vehicles) observations.push_back({v.id, v.center});
  auto assigned = occupancy::assign_frame(observations, map_, input.frame_index, input.timestamp_ms);

  FrameResult out;
  out.frame = debouncer_.apply(assigned.frame);
  out.conflicts = std::move(assigned.conflicts);
  out.confirmed_tracks = vehicles.size();
  out.events = last_ ? occupancy::diff_frames(*last_, out.frame, slot_ids_) : occupancy::initial_events(out.frame, slot_ids_);
  out.summary = occupancy::summarize(out.frame);
  last_ = out.frame;
  return out;
}

RunStats run_stream(ingest::DetectionStreamReader& reader, Pipeline& pipeline, analytics::LogWriter* log,
                    Broadcaster* broadcaster, const std::atomic<bool>* stop) {
  RunStats stats;
  const auto started = std::chrono::steady_clock::now();
  while (!(stop && stop->load(std::memory_order_relaxed))) {
    auto input = reader.next();
    if (!input) break;
    FrameResult result = pipeline.process(*input);
    for (const auto& c : result.conflicts) {
      spdlog::warn("frame {}: slot {} held by vehicle {}, vehicle {} left unassigned", c.frame_index, c.slot_id,
                   c.holder, c.rejected);
    }
    if (log) log->append(result.frame);
    if (broadcaster) broadcaster->publish(result.frame, result.events);
    stats.conflicts += result.conflicts.size();
    stats.last_summary = result.summary;
    ++stats.frames;
    spdlog::debug("frame {}: {} tracks, {} occupied, {} events", result.frame.frame_index, result.confirmed_tracks,
                  result.summary.occupied_count, result.events.size());
  }
  stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return stats;
}

}  // namespace parklot::engine
