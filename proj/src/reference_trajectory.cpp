#include "alq/reference_trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "alq/errors.hpp"

namespace alq {

void TrajectoryConfig::validate() const {
  if (!(r_min < r_initial && r_initial < r_max))
    throw InvalidParameter("trajectory requires r_min < r_initial < r_max");
  if (!(tau_f > 0.0 && gain > 0.0 && accel_scale > 0.0))
    throw InvalidParameter("trajectory tau_f, gain and accel_scale must be positive");
  if (!(deadband >= 0.0)) throw InvalidParameter("trajectory deadband must be non-negative");
}

double LowPass::step(double sample, double dt, double tau) {
  value += (dt / tau) * (sample - value);
  return value;
}

double delta_ref(double filtered_accel, double r_i, double r_min, double r_max,
                 double accel_scale) {
  const double headroom = std::min(r_max - r_i, r_i - r_min);
  return std::tanh(-filtered_accel / accel_scale) * headroom;
}

double reference(double y, double r_delta, double r_i, double k, double r_min, double r_max) {
  double r = r_i + k * r_delta;
  if (!(y > r_min && y < r_max)) {
    if (y >= r_max && r_i + r_delta >= r_max) r = r_max;
    else if (y <= r_min && r_i + r_delta <= r_min) r = r_min;
  }
  return std::clamp(r, r_min, r_max);
}

ReferenceTrajectory::ReferenceTrajectory(TrajectoryConfig cfg)
    : cfg_(cfg), last_dispatched_(cfg.r_initial) {
  cfg_.validate();
}

TrajectorySample ReferenceTrajectory::update(double body_accel, double arm_angle, double dt) {
  TrajectorySample s;
  s.filtered_accel = filter_.step(body_accel, dt, cfg_.tau_f);
  s.r_delta = delta_ref(s.filtered_accel, cfg_.r_initial, cfg_.r_min, cfg_.r_max, cfg_.accel_scale);
  s.target = reference(arm_angle, s.r_delta, cfg_.r_initial, cfg_.gain, cfg_.r_min, cfg_.r_max);
  if (std::abs(s.target - last_dispatched_) > cfg_.deadband) {
    last_dispatched_ = s.target;
    s.dispatched = s.target;
  }
  return s;
}

}  // namespace alq
