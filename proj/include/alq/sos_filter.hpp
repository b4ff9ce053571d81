#pragma once

#include <array>
#include <complex>
#include <span>
#include <string>
#include <vector>

namespace alq {

/// Digital second-order section, normalized so a0 = 1 (direct form II transposed).
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  /// Bilinear transform of (n0 s^2 + n1 s + n2) / (d0 s^2 + d1 s + d2).
  /// A positive `prewarp_hz` matches the analog response exactly at that frequency.
  static Biquad from_analog(double n0, double n1, double n2, double d0, double d1, double d2,
                            double fs, double prewarp_hz = 0.0);
  static Biquad from_row(double b0, double b1, double b2, double a0, double a1, double a2);

  std::complex<double> response(double f_hz, double fs) const;
  bool stable() const;
};

class SosCascade {
 public:
  SosCascade() = default;
  explicit SosCascade(std::vector<Biquad> sections);

  double filter(double x);
  void reset();
  std::complex<double> response(double f_hz, double fs) const;
  bool stable() const;
  const std::vector<Biquad>& sections() const { return sections_; }

 private:
  std::vector<Biquad> sections_;
  std::vector<std::array<double, 2>> state_;
};

/// Second-order Butterworth sections.
Biquad butterworth_lowpass(double fc_hz, double fs);
Biquad butterworth_highpass(double fc_hz, double fs);

}  // namespace alq
