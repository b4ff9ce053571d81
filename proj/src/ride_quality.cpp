#include "alq/ride_quality.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "alq/errors.hpp"

namespace alq {

WeightingFilter::WeightingFilter(SosCascade cascade, double fs)
    : cascade_(std::move(cascade)), fs_(fs) {
  if (!(fs > 0.0)) throw PreconditionError("weighting sample rate must be positive");
  if (!cascade_.stable()) throw PreconditionError("weighting filter is unstable");
}

WeightingFilter WeightingFilter::vertical(double fs) {
  constexpr double f1 = 0.4, f2 = 100.0, f3 = 12.5, f4 = 12.5, q4 = 0.63;
  constexpr double f5 = 2.37, q5 = 0.91, f6 = 3.35, q6 = 0.91;
  const double w3 = 2 * M_PI * f3, w4 = 2 * M_PI * f4, w5 = 2 * M_PI * f5, w6 = 2 * M_PI * f6;

  std::vector<Biquad> s;
  s.push_back(butterworth_highpass(f1, fs));
  s.push_back(butterworth_lowpass(f2, fs));
  // (1 + s/w3) w4^2 / (s^2 + s w4/q4 + w4^2)
  s.push_back(Biquad::from_analog(0.0, w4 * w4 / w3, w4 * w4, 1.0, w4 / q4, w4 * w4, fs));
  // (s^2 + s w5/q5 + w5^2) / (s^2 + s w6/q6 + w6^2): gain (w5/w6)^2 at DC, 1 above
  s.push_back(Biquad::from_analog(1.0, w5 / q5, w5 * w5, 1.0, w6 / q6, w6 * w6, fs));
  return WeightingFilter(SosCascade(std::move(s)), fs);
}

WeightingFilter WeightingFilter::load(const std::string& path, double fs) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open weighting coefficients '" + path + "'");
  std::vector<Biquad> sections;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    std::array<double, 6> c{};
    int got = 0;
    while (got < 6 && row >> c[static_cast<std::size_t>(got)]) ++got;
    if (got == 0) continue;
    double extra = 0.0;
    if (got != 6 || (row >> extra))
      throw ConfigError(fmt::format("{}:{}: expected 6 coefficients", path, lineno));
    sections.push_back(Biquad::from_row(c[0], c[1], c[2], c[3], c[4], c[5]));
  }
  if (sections.empty()) throw ConfigError("no filter sections in '" + path + "'");
  return WeightingFilter(SosCascade(std::move(sections)), fs);
}

void WeightingFilter::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << fmt::format("# vertical weighting, fs = {} Hz; b0 b1 b2 a0 a1 a2\n", fs_);
  for (const auto& s : cascade_.sections())
    out << fmt::format("{:.17g} {:.17g} {:.17g} 1 {:.17g} {:.17g}\n", s.b0, s.b1, s.b2, s.a1, s.a2);
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<double> WeightingFilter::weight(std::span<const double> accel, double fs) const {
  if (std::abs(fs - fs_) > 1e-9 * fs_)
    throw RateMismatch(fmt::format("signal rate {} Hz does not match filter rate {} Hz", fs, fs_));
  SosCascade c = cascade_;
  c.reset();
  std::vector<double> out(accel.size());
  std::transform(accel.begin(), accel.end(), out.begin(), [&c](double a) { return c.filter(a); });
  return out;
}

double WeightingFilter::magnitude(double f_hz) const { return std::abs(cascade_.response(f_hz, fs_)); }

double weighted_rms(std::span<const double> a_w, double dt) {
  if (a_w.size() < 2) throw PreconditionError("weighted_rms needs at least two samples");
  if (!(dt > 0.0)) throw PreconditionError("weighted_rms needs dt > 0");
  double sum = 0.5 * (a_w.front() * a_w.front() + a_w.back() * a_w.back());
  for (std::size_t i = 1; i + 1 < a_w.size(); ++i) sum += a_w[i] * a_w[i];
  const double T = static_cast<double>(a_w.size() - 1) * dt;
  return std::sqrt(sum * dt / T);
}

std::span<const ComfortBand> comfort_bands() {
  static constexpr std::array<ComfortBand, 6> kBands{{
      {0.0, 0.315, "Not uncomfortable"},
      {0.315, 0.63, "A little uncomfortable"},
      {0.5, 1.0, "Fairly uncomfortable"},
      {0.8, 1.6, "Uncomfortable"},
      {1.25, 2.5, "Very uncomfortable"},
      {2.0, INFINITY, "Extremely uncomfortable"},
  }};
  return kBands;
}

std::vector<std::string> classify(double a_rms) {
  if (!(a_rms >= 0.0)) throw PreconditionError("a_rms must be non-negative");
  std::vector<std::string> labels;
  for (const auto& b : comfort_bands())
    if (a_rms >= b.lower && a_rms < b.upper) labels.emplace_back(b.label);
  return labels;
}

RideMetrics ride_metrics(std::span<const double> accel, double dt, const WeightingFilter& w) {
  const auto aw = w.weight(accel, 1.0 / dt);
  RideMetrics m;
  m.a_rms = weighted_rms(aw, dt);
  for (double v : aw) m.peak = std::max(m.peak, std::abs(v));
  for (double v : accel) m.peak_raw = std::max(m.peak_raw, std::abs(v));
  m.comfort = classify(m.a_rms);
  m.duration = static_cast<double>(accel.size() - 1) * dt;
  return m;
}

Reduction percent_reduction(const RideMetrics& passive, const RideMetrics& active) {
  if (!(passive.a_rms > 0.0)) throw UndefinedReduction("passive RMS is zero");
  Reduction r;
  r.rms_percent = 100.0 * (passive.a_rms - active.a_rms) / passive.a_rms;
  r.peak_percent =
      passive.peak > 0.0 ? 100.0 * (passive.peak - active.peak) / passive.peak : 0.0;
  r.peak_raw_percent =
      passive.peak_raw > 0.0 ? 100.0 * (passive.peak_raw - active.peak_raw) / passive.peak_raw
                             : 0.0;
  return r;
}

}  // namespace alq
