#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "parklot/geometry/geometry.hpp"

namespace parklot::tracking {

/// Detector class vocabulary. `Unknown` is only produced when the stream
/// reader is configured to accept unrecognised labels.
enum class VehicleClass { Bus, BicycleMotorcycle, Truck, Pedestrian, Car, Unknown };

std::string_view to_string(VehicleClass cls) noexcept;

/// Exact wire label ("Bus", "Bicycle/Motorcycle", ...); nullopt if unknown.
std::optional<VehicleClass> parse_vehicle_class(std::string_view label) noexcept;

struct Detection {
  geometry::BoundingBox bbox;
  VehicleClass cls = VehicleClass::Car;
  double confidence = 1.0;
  /// Unit-norm appearance descriptor; empty when the detector provides none.
  std::vector<double> appearance;

  bool has_appearance() const noexcept { return !appearance.empty(); }
};

}  // namespace parklot::tracking
