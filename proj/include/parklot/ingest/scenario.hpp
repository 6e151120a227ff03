#pragma once

// Deterministic synthetic parking scenes: scripted vehicle paths over a slot
// map, the detection stream a perfect (or noisy) detector would emit, and the
// occupancy log those paths imply geometrically.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "parklot/analytics/occupancy_log.hpp"
#include "parklot/ingest/detection_stream.hpp"
#include "parklot/slots/slot_map.hpp"

namespace parklot::ingest {

struct Keyframe {
  std::uint64_t frame = 0;
  geometry::Point center;
};

/// A vehicle present on frames [entry, exit). Between keyframes the center
/// eases in and out (smoothstep), so it is at rest on every keyframe; after
/// the last keyframe it holds position.
struct ScriptedVehicle {
  std::uint64_t entry = 0;
  std::uint64_t exit = 0;
  std::vector<Keyframe> path;
  double width = 36.0;
  double height = 64.0;
  tracking::VehicleClass cls = tracking::VehicleClass::Car;
  std::optional<slots::SlotId> target_slot;

  geometry::Point center_at(std::uint64_t frame) const;
  geometry::BoundingBox box_at(std::uint64_t frame) const;
  bool present(std::uint64_t frame) const noexcept { return frame >= entry && frame < exit; }
};

struct ScenarioNoise {
  /// Gaussian shift of every emitted box, pixels.
  double position_jitter_std = 0.0;
  /// Per-frame chance that a gap starts while a vehicle is parked.
  double dropout_probability = 0.0;
  int max_gap_frames = 0;
};

/// Parallel-row layout: rows of slots on either side of one horizontal lane.
/// Row 0 sits above the lane, row 1 below it. Slot ids run row-major.
struct LayoutSpec {
  int rows = 2;
  int slots_per_row = 12;
  double slot_width = 60.0;
  double slot_height = 100.0;
  double lane_height = 120.0;
  double margin = 40.0;

  double frame_width() const noexcept { return 2 * margin + slots_per_row * slot_width; }
  double frame_height() const noexcept { return 2 * margin + rows * slot_height + lane_height; }
  double lane_y() const noexcept { return margin + slot_height + lane_height / 2; }
  void validate() const;
};

slots::SlotMap make_layout(const LayoutSpec& layout);

struct TrafficSpec {
  std::size_t vehicles = 0;
  /// Average speed range along each path segment, pixels per frame. The
  /// smoothstep peak is 1.5 times the average.
  double min_speed = 1.5;
  double max_speed = 2.6;
  double vehicle_width = 36.0;
  double vehicle_height = 64.0;
  std::uint64_t min_dwell = 150;
  std::uint64_t max_dwell = 1200;
  /// Minimum gap between the boxes of any two vehicles on the same frame,
  /// including the extrapolated position of a vanished vehicle for
  /// `ghost_frames` frames after it leaves and one frame beyond.
  double clearance = 12.0;
  int ghost_frames = 30;
  int max_attempts = 400;
};

struct Scenario {
  explicit Scenario(slots::SlotMap slot_map) : map(std::move(slot_map)) {}

  slots::SlotMap map;
  std::uint64_t seed = 0;
  double fps = 30.0;
  std::uint64_t frames = 0;
  /// Timestamp of frame 0; frame k is stamped start + round(k * 1000 / fps).
  /// Absent means every frame carries a null timestamp.
  std::optional<std::int64_t> start_timestamp_ms = 0;
  std::vector<ScriptedVehicle> vehicles;
  ScenarioNoise noise;
  std::size_t appearance_dim = 0;
  double appearance_jitter_std = 0.05;

  /// Throws ValidationError listing every infeasible script.
  void validate() const;
};

/// Shapes the ground truth like the tracker's output: a vehicle is reported
/// from its n_init-th frame on, and keeps being reported for `coast_frames`
/// frames after it vanishes at its constant-velocity extrapolated position.
struct TruthOptions {
  int n_init = 1;
  int coast_frames = 0;
};

struct IdAssignment {
  std::size_t vehicle_index = 0;
  occupancy::VehicleId vehicle_id = 0;
};

struct GeneratedScenario {
  std::vector<DetectionFrame> stream;
  analytics::OccupancyLog truth;
  /// Vehicle ids in order of first appearance, one per scripted vehicle.
  std::vector<IdAssignment> ids;
  /// Frames on which each vehicle's detection was dropped.
  std::vector<std::vector<std::uint64_t>> dropped;
};

/// Pure function of the scenario (including its seed).
GeneratedScenario generate_scenario(const Scenario& scenario, const TruthOptions& truth = {});

/// Adds up to `traffic.vehicles` random vehicles (parkers, vehicles already
/// parked on frame 0, and pass-through traffic) that keep the clearance from
/// every vehicle already in `scenario`. Returns how many were placed.
std::size_t add_random_traffic(Scenario& scenario, const LayoutSpec& layout, const TrafficSpec& traffic,
                               std::mt19937_64& rng);

struct LoadedScenario {
  Scenario scenario;
  TruthOptions truth;
};

/// Scenario spec document (JSON). Relative paths resolve against `base_dir`.
LoadedScenario load_scenario_spec(std::string_view document, const std::filesystem::path& base_dir = {});
LoadedScenario load_scenario_spec_file(const std::filesystem::path& path);

}  // namespace parklot::ingest
