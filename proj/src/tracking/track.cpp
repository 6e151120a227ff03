#include "parklot/tracking/track.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <string>

#include "parklot/error.hpp"
#include "parklot/tracking/assignment.hpp"

namespace parklot::tracking {

std::string_view to_string(VehicleClass cls) noexcept {
  switch (cls) {
    case VehicleClass::Bus: return "Bus";
    case VehicleClass::BicycleMotorcycle: return "Bicycle/Motorcycle";
    case VehicleClass::Truck: return "Truck";
    case VehicleClass::Pedestrian: return "Pedestrian";
    case VehicleClass::Car: return "Car";
    case VehicleClass::Unknown: return "Unknown";
  }
  return "Unknown";
}

std::optional<VehicleClass> parse_vehicle_class(std::string_view label) noexcept {
  for (auto cls : {VehicleClass::Bus, VehicleClass::BicycleMotorcycle, VehicleClass::Truck,
                   VehicleClass::Pedestrian, VehicleClass::Car}) {
    if (label == to_string(cls)) return cls;
  }
  return std::nullopt;
}

void TrackerParams::validate() const {
  std::vector<std::string> bad;
  if (!(iou_min > 0.0 && iou_min < 1.0)) bad.push_back("tracker.iou_min must be in (0,1)");
  if (!(lambda >= 0.0 && lambda <= 1.0)) bad.push_back("tracker.lambda must be in [0,1]");
  if (!(mahalanobis_gate > 0.0) || !std::isfinite(mahalanobis_gate)) {
    bad.push_back("tracker.mahalanobis_gate must be positive");
  }
  if (max_age < 0) bad.push_back("tracker.max_age must be >= 0");
  if (n_init < 1) bad.push_back("tracker.n_init must be >= 1");
  if (gallery_capacity < 1) bad.push_back("tracker.gallery_capacity must be >= 1");
  const auto non_negative = [&](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) bad.push_back(std::string("tracker.noise.") + name + " must be >= 0");
  };
  non_negative(noise.position_weight, "position_weight");
  non_negative(noise.velocity_weight, "velocity_weight");
  non_negative(noise.aspect_std, "aspect_std");
  non_negative(noise.aspect_velocity_std, "aspect_velocity_std");
  non_negative(noise.measurement_position_weight, "measurement_position_weight");
  non_negative(noise.measurement_aspect_std, "measurement_aspect_std");
  if (!bad.empty()) throw ValidationError(std::move(bad));
}

namespace {

void remember(AppearanceGallery& gallery, const Detection& det, std::size_t capacity) {
  if (!det.has_appearance()) return;
  gallery.push_back(det.appearance);
  while (gallery.size() > capacity) gallery.pop_front();
}

}  // namespace

Track start_track(TrackId id, const Detection& det, const TrackerParams& params) {
  Track t;
  t.id = id;
  t.state = initiate(to_measurement(det.bbox), params.noise);
  t.hits = 1;
  t.time_since_update = 0;
  t.cls = det.cls;
  t.status = t.hits >= params.n_init ? TrackStatus::Confirmed : TrackStatus::Tentative;
  remember(t.gallery, det, params.gallery_capacity);
  return t;
}

Track predict(const Track& track, const NoiseModel& noise) {
  if (track.status == TrackStatus::Deleted) throw Error("predict: track " + std::to_string(track.id) + " is deleted");
  Track out = track;
  out.state = predict(track.state, noise);
  out.time_since_update += 1;
  return out;
}

Track update(const Track& track, const Detection& det, const TrackerParams& params) {
  if (track.status == TrackStatus::Deleted) throw Error("update: track " + std::to_string(track.id) + " is deleted");
  Track out = track;
  out.state = correct(track.state, to_measurement(det.bbox), params.noise);
  out.hits += 1;
  out.time_since_update = 0;
  out.cls = det.cls;
  remember(out.gallery, det, params.gallery_capacity);
  if (out.status == TrackStatus::Tentative && out.hits >= params.n_init) out.status = TrackStatus::Confirmed;
  return out;
}

double mahalanobis_sq(const Track& track, const Detection& det, const NoiseModel& noise) {
  const Projection p = project(track.state, noise);
  return mahalanobis_sq(to_measurement(det.bbox) - p.mean, p.covariance);
}

std::optional<double> appearance_distance(const AppearanceGallery& gallery, std::span<const double> appearance) {
  if (gallery.empty() || appearance.empty()) return std::nullopt;
  double best = 2.0;
  for (const auto& g : gallery) {
    if (g.size() != appearance.size()) return std::nullopt;
    double dot = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * appearance[i];
    best = std::min(best, 1.0 - dot);
  }
  return std::clamp(best, 0.0, 2.0);
}

double combined_cost(double normalized_motion, double normalized_appearance, double lambda) noexcept {
  return lambda * normalized_motion + (1.0 - lambda) * normalized_appearance;
}

Association associate(std::span<const Track> tracks, std::span<const Detection> detections,
                      const TrackerParams& params) {
  Association out;
  CostMatrix costs(tracks.size(), detections.size());
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    const Track& track = tracks[t];
    for (std::size_t d = 0; d < detections.size(); ++d) costs.forbid(t, d);
    const Projection proj = project(track.state, params.noise);
    const Eigen::LLT<MeasurementCovariance> innovation(proj.covariance);
    // A track whose innovation covariance cannot be factored matches nothing.
    if (innovation.info() != Eigen::Success) continue;
    const geometry::BoundingBox predicted = track.predicted_bbox();
    for (std::size_t d = 0; d < detections.size(); ++d) {
      const Detection& det = detections[d];
      if (params.class_consistent_matching && det.cls != track.cls) continue;
      if (params.gating == GatingMode::MahalanobisAndIou && geometry::iou(predicted, det.bbox) < params.iou_min) {
        continue;
      }
      const double motion = innovation.matrixL().solve(to_measurement(det.bbox) - proj.mean).squaredNorm();
      if (motion > params.mahalanobis_gate) continue;
      const double normalized_motion = motion / params.mahalanobis_gate;
      // Cosine distance lives in [0, 2]; halve it onto the motion metric's [0, 1].
      const auto appearance = appearance_distance(track.gallery, det.appearance);
      double cost = normalized_motion;
      if (appearance) {
        cost = combined_cost(normalized_motion, *appearance / 2.0, params.lambda);
      } else {
        ++out.motion_only_pairs;
      }
      costs.set(t, d, cost);
    }
  }

  const AssignmentResult solved = solve_assignment(costs);
  for (const auto& [t, d] : solved.matches) out.matches.emplace_back(tracks[t].id, d);
  for (auto t : solved.unmatched_rows) out.unmatched_tracks.push_back(tracks[t].id);
  out.unmatched_detections = solved.unmatched_cols;
  return out;
}

}  // namespace parklot::tracking
