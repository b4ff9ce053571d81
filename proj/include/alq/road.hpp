#pragma once

#include <string>
#include <utility>
#include <vector>

namespace alq {

/// Raised-cosine bump: h (1 - cos 8 pi t) / 2 on [0, 0.25], zero elsewhere.
double road_bump(double t, double h);
/// 0 before 1 s, 10 h (t - 1) up to 1.1 s, h afterwards.
double road_limited_ramp(double t, double h);
/// (h / 2)(1 + sin(pi t - pi / 2)).
double road_sinusoid(double t, double h = 0.04);

enum class RoadKind { Flat, Bump, LimitedRamp, Sinusoid, Table };

RoadKind parse_road_kind(const std::string& name);
std::string to_string(RoadKind kind);

/// Time-domain road height y0(t) with its rate.
///
/// `time_scale` stretches the profile in time: y0(t) = base(time_scale * t),
/// which is how vehicle speed maps onto a fixed spatial road shape.
class RoadProfile {
 public:
  RoadProfile() = default;
  RoadProfile(RoadKind kind, double h, double time_scale = 1.0);
  /// Two-column (t, y0) sample table, linearly interpolated, held constant outside.
  static RoadProfile from_table(std::vector<std::pair<double, double>> samples);
  static RoadProfile load_table(const std::string& path);

  double height(double t) const;
  double rate(double t) const;
  std::pair<double, double> operator()(double t) const { return {height(t), rate(t)}; }

  RoadKind kind() const { return kind_; }
  double peak() const { return h_; }
  double time_scale() const { return time_scale_; }

 private:
  RoadKind kind_ = RoadKind::Flat;
  double h_ = 0.0;
  double time_scale_ = 1.0;
  std::vector<std::pair<double, double>> table_;
};

}  // namespace alq
