#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "parklot/tracking/detection.hpp"
#include "parklot/tracking/kalman.hpp"

namespace parklot::tracking {

using TrackId = std::uint64_t;

enum class TrackStatus { Tentative, Confirmed, Deleted };

/// Which gates must pass before a track/detection pair may be matched.
enum class GatingMode { MahalanobisAndIou, MahalanobisOnly };

struct TrackerParams {
  double iou_min = 0.3;
  /// Weight of the motion metric against the appearance metric.
  double lambda = 0.5;
  /// Chi-square 0.95 quantile with 4 degrees of freedom.
  double mahalanobis_gate = 9.4877;
  int max_age = 30;
  int n_init = 3;
  std::size_t gallery_capacity = 100;
  GatingMode gating = GatingMode::MahalanobisAndIou;
  bool class_consistent_matching = false;
  NoiseModel noise;

  /// Throws ValidationError naming every out-of-range field.
  void validate() const;
};

using AppearanceGallery = std::deque<std::vector<double>>;

struct Track {
  TrackId id = 0;
  GaussianState state;
  TrackStatus status = TrackStatus::Tentative;
  int hits = 0;
  int time_since_update = 0;
  VehicleClass cls = VehicleClass::Car;
  AppearanceGallery gallery;

  geometry::BoundingBox predicted_bbox() const noexcept { return to_bbox(state.mean); }
};

/// New Tentative (or Confirmed when n_init <= 1) track for an unmatched detection.
Track start_track(TrackId id, const Detection& det, const TrackerParams& params);

/// Constant-velocity prediction; increments time_since_update.
/// Throws CorruptedTrackError on non-finite results, Error on a Deleted track.
Track predict(const Track& track, const NoiseModel& noise);

/// Kalman measurement update with `det`; resets time_since_update, bumps hits,
/// appends the appearance to the bounded gallery and confirms the track once
/// hits reach n_init.
Track update(const Track& track, const Detection& det, const TrackerParams& params);

/// Squared Mahalanobis distance of the detection's measurement from the
/// track's projected state.
double mahalanobis_sq(const Track& track, const Detection& det, const NoiseModel& noise);

/// Smallest cosine distance between `appearance` and any gallery entry.
/// nullopt (motion-only fallback) when the gallery is empty, the query is
/// empty or the dimensions disagree.
std::optional<double> appearance_distance(const AppearanceGallery& gallery, std::span<const double> appearance);

/// lambda * motion + (1 - lambda) * appearance on gate-normalised metrics.
double combined_cost(double normalized_motion, double normalized_appearance, double lambda) noexcept;

struct Association {
  std::vector<std::pair<TrackId, std::size_t>> matches;
  std::vector<TrackId> unmatched_tracks;
  std::vector<std::size_t> unmatched_detections;
  /// Feasible pairs that had to be scored on motion alone.
  std::size_t motion_only_pairs = 0;
};

/// Gated global minimum-cost matching of predicted tracks to detections.
/// A pair is infeasible when its squared Mahalanobis distance exceeds the gate
/// or (in MahalanobisAndIou mode) its IoU is below iou_min.
Association associate(std::span<const Track> tracks, std::span<const Detection> detections,
                      const TrackerParams& params);

}  // namespace parklot::tracking
