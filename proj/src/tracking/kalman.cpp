#include "parklot/tracking/kalman.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "parklot/error.hpp"

namespace parklot::tracking {

namespace {

StateCovariance transition() {
  StateCovariance f = StateCovariance::Identity();
  for (int i = 0; i < 4; ++i) f(i, i + 4) = 1.0;
  return f;
}

const StateCovariance kTransition = transition();

void check_state(const StateVector& mean, const StateCovariance& cov, const char* where) {
  if (!mean.allFinite() || !cov.allFinite()) {
    throw CorruptedTrackError(std::string(where) + ": non-finite track state");
  }
  if (!(mean(2) > 0.0) || !(mean(3) > 0.0)) {
    throw CorruptedTrackError(std::string(where) + ": non-positive box height or aspect ratio");
  }
}

}  // namespace

MeasurementVector to_measurement(const geometry::BoundingBox& box) noexcept {
  const geometry::Point c = geometry::bbox_center(box);
  return {c.x, c.y, box.height(), box.width() / box.height()};
}

geometry::BoundingBox to_bbox(const StateVector& mean) noexcept {
  const double h = mean(2);
  const double w = mean(3) * h;
  return geometry::BoundingBox::from_center_size({mean(0), mean(1)}, w, h);
}

GaussianState initiate(const MeasurementVector& measurement, const NoiseModel& noise) {
  GaussianState s;
  s.mean.head<4>() = measurement;
  s.mean.tail<4>().setZero();
  const double h = measurement(2);
  StateVector std;
  std << 2.0 * noise.position_weight * h, 2.0 * noise.position_weight * h, 2.0 * noise.position_weight * h,
      noise.aspect_std, 10.0 * noise.velocity_weight * h, 10.0 * noise.velocity_weight * h,
      10.0 * noise.velocity_weight * h, noise.aspect_velocity_std;
  s.covariance = std.array().square().matrix().asDiagonal();
  check_state(s.mean, s.covariance, "initiate");
  return s;
}

GaussianState predict(const GaussianState& state, const NoiseModel& noise) {
  const double h = state.mean(2);
  StateVector std;
  std << noise.position_weight * h, noise.position_weight * h, noise.position_weight * h, noise.aspect_std,
      noise.velocity_weight * h, noise.velocity_weight * h, noise.velocity_weight * h, noise.aspect_velocity_std;
  GaussianState out;
  out.mean = kTransition * state.mean;
  out.covariance = kTransition * state.covariance * kTransition.transpose();
  out.covariance.diagonal() += std.array().square().matrix();
  check_state(out.mean, out.covariance, "predict");
  return out;
}

MeasurementCovariance measurement_noise(const StateVector& mean, const NoiseModel& noise) {
  const double h = mean(2);
  const double p = noise.measurement_position_weight * h;
  MeasurementVector var{p * p, p * p, p * p, noise.measurement_aspect_std * noise.measurement_aspect_std};
  return var.asDiagonal();
}

Projection project(const GaussianState& state, const NoiseModel& noise) {
  Projection p;
  p.mean = state.mean.head<4>();
  p.covariance = state.covariance.topLeftCorner<4, 4>() + measurement_noise(state.mean, noise);
  return p;
}

GaussianState correct(const GaussianState& state, const MeasurementVector& measurement,
                      const MeasurementCovariance& measurement_cov) {
  const MeasurementCovariance innovation = state.covariance.topLeftCorner<4, 4>() + measurement_cov;
  const Eigen::LLT<MeasurementCovariance> llt(innovation);
  if (llt.info() != Eigen::Success) {
    throw CorruptedTrackError("update: innovation covariance is not positive definite");
  }
  // K = P H^T S^-1, with H selecting the first four state components.
  const Eigen::Matrix<double, 8, 4> gain = llt.solve(state.covariance.topRows<4>()).transpose();
  Eigen::Matrix<double, 4, 8> h = Eigen::Matrix<double, 4, 8>::Zero();
  h.leftCols<4>().setIdentity();
  const StateCovariance i_kh = StateCovariance::Identity() - gain * h;

  GaussianState out;
  out.mean = state.mean + gain * (measurement - state.mean.head<4>());
  out.covariance = i_kh * state.covariance * i_kh.transpose() + gain * measurement_cov * gain.transpose();
  out.covariance = (0.5 * (out.covariance + out.covariance.transpose())).eval();
  check_state(out.mean, out.covariance, "update");
  return out;
}

GaussianState correct(const GaussianState& state, const MeasurementVector& measurement, const NoiseModel& noise) {
  return correct(state, measurement, measurement_noise(state.mean, noise));
}

double mahalanobis_sq(const MeasurementVector& residual, const MeasurementCovariance& innovation) {
  const Eigen::LLT<MeasurementCovariance> llt(innovation);
  if (llt.info() != Eigen::Success) {
    throw CorruptedTrackError("mahalanobis: innovation covariance is singular or indefinite");
  }
  const MeasurementVector z = llt.matrixL().solve(residual);
  return z.squaredNorm();
}

}  // namespace parklot::tracking
