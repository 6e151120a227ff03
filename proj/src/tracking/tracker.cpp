#include "parklot/tracking/tracker.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <optional>
#include <unordered_map>

#include "parklot/error.hpp"

namespace parklot::tracking {

Tracker::Tracker(TrackerParams params) : params_(std::move(params)) { params_.validate(); }

std::vector<TrackedVehicle> Tracker::step(std::span<const Detection> detections) {
  stats_ = {};

  std::vector<Track> live;
  live.reserve(tracks_.size() + detections.size());
  for (const auto& track : tracks_) {
    try {
      live.push_back(predict(track, params_.noise));
    } catch (const CorruptedTrackError& e) {
      spdlog::warn("deleting corrupted track {}: {}", track.id, e.what());
      ++stats_.corrupted;
      ++stats_.deleted;
    }
  }

  const Association assoc = associate(live, detections, params_);

  std::unordered_map<TrackId, std::size_t> index;
  for (std::size_t i = 0; i < live.size(); ++i) index.emplace(live[i].id, i);
  std::vector<std::optional<std::size_t>> matched_detection(live.size());

  for (const auto& [id, det] : assoc.matches) {
    const std::size_t i = index.at(id);
    try {
      live[i] = update(live[i], detections[det], params_);
      matched_detection[i] = det;
      ++stats_.matched;
    } catch (const CorruptedTrackError& e) {
      spdlog::warn("deleting corrupted track {}: {}", id, e.what());
      live[i].status = TrackStatus::Deleted;
      ++stats_.corrupted;
    }
  }

  for (auto id : assoc.unmatched_tracks) {
    Track& t = live[index.at(id)];
    if (t.status == TrackStatus::Tentative || t.time_since_update > params_.max_age) t.status = TrackStatus::Deleted;
  }

  for (auto d : assoc.unmatched_detections) {
    try {
      live.push_back(start_track(next_id_, detections[d], params_));
      matched_detection.emplace_back(d);
      ++next_id_;
      ++stats_.created;
    } catch (const CorruptedTrackError& e) {
      spdlog::warn("dropping detection {} that cannot start a track: {}", d, e.what());
    }
  }

  std::vector<TrackedVehicle> out;
  tracks_.clear();
  for (std::size_t i = 0; i < live.size(); ++i) {
    Track& t = live[i];
    if (t.status == TrackStatus::Deleted) {
      ++stats_.deleted;
      continue;
    }
    if (t.status == TrackStatus::Confirmed) {
      TrackedVehicle v;
      v.id = t.id;
      v.cls = t.cls;
      v.observed = matched_detection[i].has_value();
      v.bbox = v.observed ? detections[*matched_detection[i]].bbox : t.predicted_bbox();
      v.center = geometry::bbox_center(v.bbox);
      out.push_back(v);
    }
    tracks_.push_back(std::move(t));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

}  // namespace parklot::tracking
