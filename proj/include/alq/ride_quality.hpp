#pragma once

#include <span>
#include <string>
#include <vector>

#include "alq/sos_filter.hpp"

namespace alq {

/// Vertical whole-body weighting as a cascade of second-order sections at a fixed rate.
class WeightingFilter {
 public:
  WeightingFilter(SosCascade cascade, double fs);

  /// Default vertical weighting: band limiting (0.4 Hz high-pass, 100 Hz low-pass),
  /// acceleration-velocity transition (12.5 Hz, Q 0.63) and upward step
  /// (2.37 Hz / 3.35 Hz, Q 0.91), bilinear-transformed at fs.
  static WeightingFilter vertical(double fs);

  /// Rows of "b0 b1 b2 a0 a1 a2", one section per line; '#' starts a comment.
  static WeightingFilter load(const std::string& path, double fs);
  void save(const std::string& path) const;

  /// Causal filtering from rest; throws RateMismatch when fs differs from the design rate.
  std::vector<double> weight(std::span<const double> accel, double fs) const;

  double magnitude(double f_hz) const;
  double sample_rate() const { return fs_; }
  const SosCascade& cascade() const { return cascade_; }

 private:
  SosCascade cascade_;
  double fs_;
};

/// sqrt((1/T) integral a_w^2 dt) with trapezoidal quadrature on a uniform grid, T = (N-1) dt.
double weighted_rms(std::span<const double> a_w, double dt);

struct ComfortBand {
  double lower;  // inclusive
  double upper;  // exclusive
  const char* label;
};

/// Overlapping comfort bands (ISO 2631-1 style), [lower, upper).
std::span<const ComfortBand> comfort_bands();

/// Every band containing a_rms.
std::vector<std::string> classify(double a_rms);

struct RideMetrics {
  double a_rms = 0.0;     // weighted RMS, m/s^2
  double peak = 0.0;      // peak |a_w|, m/s^2
  double peak_raw = 0.0;  // peak |a| before weighting, m/s^2
  std::vector<std::string> comfort;
  double duration = 0.0;
};

RideMetrics ride_metrics(std::span<const double> accel, double dt, const WeightingFilter& w);

struct Reduction {
  double rms_percent = 0.0;
  double peak_percent = 0.0;
  double peak_raw_percent = 0.0;
};

/// 100 (passive - active) / passive for the RMS and peak fields.
Reduction percent_reduction(const RideMetrics& passive, const RideMetrics& active);

}  // namespace alq
