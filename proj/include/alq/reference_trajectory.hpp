#pragma once

#include <optional>

namespace alq {

struct TrajectoryConfig {
  double tau_f = 0.1;       // low-pass time constant, s
  double gain = 1.0;        // k1 (front) or k2 (mid)
  double r_initial = 0.35;  // rad
  double r_min = 0.15;
  double r_max = 0.55;
  double accel_scale = 1.5;  // m/s^2, tanh saturation scale
  double deadband = 0.005;   // rad between dispatched reference changes

  void validate() const;
};

/// First-order IIR low-pass y <- y + (dt / tau)(x - y).
struct LowPass {
  double value = 0.0;
  double step(double sample, double dt, double tau);
};

/// tanh(-accel / accel_scale) * min(r_max - r_i, r_i - r_min).
double delta_ref(double filtered_accel, double r_i, double r_min, double r_max,
                 double accel_scale = 1.5);

/// Range-protected reference for measured arm angle y; always in [r_min, r_max].
double reference(double y, double r_delta, double r_i, double k, double r_min, double r_max);

struct TrajectorySample {
  double filtered_accel = 0.0;
  double r_delta = 0.0;
  double target = 0.0;
  /// Set when the target moved more than the deadband since the last dispatch.
  std::optional<double> dispatched;
};

class ReferenceTrajectory {
 public:
  explicit ReferenceTrajectory(TrajectoryConfig cfg);

  TrajectorySample update(double body_accel, double arm_angle, double dt);
  double last_dispatched() const { return last_dispatched_; }
  const TrajectoryConfig& config() const { return cfg_; }

 private:
  TrajectoryConfig cfg_;
  LowPass filter_;
  double last_dispatched_;
};

}  // namespace alq
