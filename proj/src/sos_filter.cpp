#include "alq/sos_filter.hpp"

#include <cmath>

#include "alq/errors.hpp"

namespace alq {

Biquad Biquad::from_analog(double n0, double n1, double n2, double d0, double d1, double d2,
                           double fs, double prewarp_hz) {
  double K = 2.0 * fs;
  if (prewarp_hz > 0.0) {
    const double w = 2.0 * M_PI * prewarp_hz;
    K = w / std::tan(w / (2.0 * fs));
  }
  const double K2 = K * K;
  const double B0 = n0 * K2 + n1 * K + n2;
  const double B1 = 2.0 * (n2 - n0 * K2);
  const double B2 = n0 * K2 - n1 * K + n2;
  const double A0 = d0 * K2 + d1 * K + d2;
  const double A1 = 2.0 * (d2 - d0 * K2);
  const double A2 = d0 * K2 - d1 * K + d2;
  return from_row(B0, B1, B2, A0, A1, A2);
}

Biquad Biquad::from_row(double b0, double b1, double b2, double a0, double a1, double a2) {
  if (a0 == 0.0 || !std::isfinite(a0)) throw PreconditionError("biquad a0 must be non-zero");
  return {b0 / a0, b1 / a0, b2 / a0, a1 / a0, a2 / a0};
}

std::complex<double> Biquad::response(double f_hz, double fs) const {
  const std::complex<double> zi = std::polar(1.0, -2.0 * M_PI * f_hz / fs);
  return (b0 + b1 * zi + b2 * zi * zi) / (1.0 + a1 * zi + a2 * zi * zi);
}

bool Biquad::stable() const {
  // Jury conditions for z^2 + a1 z + a2.
  return std::abs(a2) < 1.0 && std::abs(a1) < 1.0 + a2;
}

SosCascade::SosCascade(std::vector<Biquad> sections)
    : sections_(std::move(sections)), state_(sections_.size(), {0.0, 0.0}) {}

double SosCascade::filter(double x) {
  for (std::size_t i = 0; i < sections_.size(); ++i) {
    const Biquad& s = sections_[i];
    auto& w = state_[i];
    const double y = s.b0 * x + w[0];
    w[0] = s.b1 * x - s.a1 * y + w[1];
    w[1] = s.b2 * x - s.a2 * y;
    x = y;
  }
  return x;
}

void SosCascade::reset() {
  for (auto& w : state_) w = {0.0, 0.0};
}

std::complex<double> SosCascade::response(double f_hz, double fs) const {
  std::complex<double> h{1.0, 0.0};
  for (const auto& s : sections_) h *= s.response(f_hz, fs);
  return h;
}

bool SosCascade::stable() const {
  for (const auto& s : sections_)
    if (!s.stable()) return false;
  return true;
}

Biquad butterworth_lowpass(double fc_hz, double fs) {
  const double w = 2.0 * M_PI * fc_hz;
  return Biquad::from_analog(0.0, 0.0, w * w, 1.0, std::sqrt(2.0) * w, w * w, fs, fc_hz);
}

Biquad butterworth_highpass(double fc_hz, double fs) {
  const double w = 2.0 * M_PI * fc_hz;
  return Biquad::from_analog(1.0, 0.0, 0.0, 1.0, std::sqrt(2.0) * w, w * w, fs, fc_hz);
}

}  // namespace alq
