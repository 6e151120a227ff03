#pragma once

// Constant-velocity Kalman filter over bounding boxes in image space.
//
// State layout: [x, y, h, r, vx, vy, vh, vr] where (x, y) is the box center,
// h the box height, r the aspect ratio w / h and the last four are per-frame
// velocities. The measurement is the first four components.

#include <Eigen/Core>

#include "parklot/geometry/geometry.hpp"

namespace parklot::tracking {

using StateVector = Eigen::Matrix<double, 8, 1>;
using StateCovariance = Eigen::Matrix<double, 8, 8>;
using MeasurementVector = Eigen::Matrix<double, 4, 1>;
using MeasurementCovariance = Eigen::Matrix<double, 4, 4>;

/// Noise scales. Position and velocity standard deviations are proportional
/// to the current box height; the aspect-ratio terms are absolute.
struct NoiseModel {
  double position_weight = 1.0 / 20.0;
  double velocity_weight = 1.0 / 160.0;
  double aspect_std = 1e-2;
  double aspect_velocity_std = 1e-5;
  double measurement_position_weight = 1.0 / 20.0;
  double measurement_aspect_std = 1e-1;
};

struct GaussianState {
  StateVector mean = StateVector::Zero();
  StateCovariance covariance = StateCovariance::Identity();
};

/// State distribution projected into measurement space.
struct Projection {
  MeasurementVector mean = MeasurementVector::Zero();
  MeasurementCovariance covariance = MeasurementCovariance::Identity();
};

MeasurementVector to_measurement(const geometry::BoundingBox& box) noexcept;
geometry::BoundingBox to_bbox(const StateVector& mean) noexcept;

/// New track distribution centered on the measurement with zero velocity.
GaussianState initiate(const MeasurementVector& measurement, const NoiseModel& noise);

/// One-frame constant-velocity propagation plus process noise.
/// Throws CorruptedTrackError when the result is non-finite or h/r <= 0.
GaussianState predict(const GaussianState& state, const NoiseModel& noise);

MeasurementCovariance measurement_noise(const StateVector& mean, const NoiseModel& noise);

/// Projection with the measurement noise of `noise` added.
Projection project(const GaussianState& state, const NoiseModel& noise);

/// Measurement update with an explicit measurement covariance (Joseph form).
/// Throws CorruptedTrackError if the innovation covariance is not positive definite.
GaussianState correct(const GaussianState& state, const MeasurementVector& measurement,
                      const MeasurementCovariance& measurement_cov);

/// Measurement update using the height-scaled measurement noise.
GaussianState correct(const GaussianState& state, const MeasurementVector& measurement, const NoiseModel& noise);

/// residual^T * innovation^-1 * residual. Throws CorruptedTrackError when
/// `innovation` is not positive definite.
double mahalanobis_sq(const MeasurementVector& residual, const MeasurementCovariance& innovation);

}  // namespace parklot::tracking
