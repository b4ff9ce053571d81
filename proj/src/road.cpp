#include "alq/road.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "alq/errors.hpp"

namespace alq {

double road_bump(double t, double h) {
  if (t >= 0.0 && t <= 0.25) return h * (1.0 - std::cos(8.0 * M_PI * t)) / 2.0;
  return 0.0;
}

double road_limited_ramp(double t, double h) {
  if (t < 1.0) return 0.0;
  if (t < 1.1) return 10.0 * h * (t - 1.0);
  return h;
}

double road_sinusoid(double t, double h) {
  return h / 2.0 * (1.0 + std::sin(M_PI * t - M_PI / 2.0));
}

RoadKind parse_road_kind(const std::string& name) {
  if (name == "flat") return RoadKind::Flat;
  if (name == "bump") return RoadKind::Bump;
  if (name == "ramp" || name == "limited_ramp") return RoadKind::LimitedRamp;
  if (name == "sine" || name == "sinusoid") return RoadKind::Sinusoid;
  if (name == "table" || name == "custom") return RoadKind::Table;
  throw ConfigError("unknown road kind '" + name + "'");
}

std::string to_string(RoadKind kind) {
  switch (kind) {
    case RoadKind::Flat: return "flat";
    case RoadKind::Bump: return "bump";
    case RoadKind::LimitedRamp: return "ramp";
    case RoadKind::Sinusoid: return "sine";
    case RoadKind::Table: return "table";
  }
  return "?";
}

RoadProfile::RoadProfile(RoadKind kind, double h, double time_scale)
    : kind_(kind), h_(h), time_scale_(time_scale) {
  if (kind == RoadKind::Table) throw PreconditionError("use RoadProfile::from_table for tables");
  if (!(time_scale > 0.0)) throw PreconditionError("road time scale must be positive");
}

RoadProfile RoadProfile::from_table(std::vector<std::pair<double, double>> samples) {
  if (samples.empty()) throw PreconditionError("road table is empty");
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (!(samples[i].first > samples[i - 1].first))
      throw PreconditionError("road table times must be strictly increasing");
  RoadProfile r;
  r.kind_ = RoadKind::Table;
  for (const auto& s : samples) r.h_ = std::max(r.h_, std::abs(s.second));
  r.table_ = std::move(samples);
  return r;
}

RoadProfile RoadProfile::load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open road table '" + path + "'");
  std::vector<std::pair<double, double>> samples;
  std::string line;
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    double t = 0.0, y = 0.0;
    if (!(row >> t >> y)) {
      if (samples.empty()) continue;  // header row
      throw ConfigError("malformed road table row: " + line);
    }
    samples.emplace_back(t, y);
  }
  return from_table(std::move(samples));
}

double RoadProfile::height(double t) const {
  const double s = time_scale_ * t;
  switch (kind_) {
    case RoadKind::Flat: return 0.0;
    case RoadKind::Bump: return road_bump(s, h_);
    case RoadKind::LimitedRamp: return road_limited_ramp(s, h_);
    case RoadKind::Sinusoid: return road_sinusoid(s, h_);
    case RoadKind::Table: {
      if (t <= table_.front().first) return table_.front().second;
      if (t >= table_.back().first) return table_.back().second;
      const auto hi = std::upper_bound(table_.begin(), table_.end(), t,
                                       [](double v, const auto& e) { return v < e.first; });
      const auto lo = hi - 1;
      const double w = (t - lo->first) / (hi->first - lo->first);
      return lo->second + w * (hi->second - lo->second);
    }
  }
  return 0.0;
}

double RoadProfile::rate(double t) const {
  const double s = time_scale_ * t;
  switch (kind_) {
    case RoadKind::Flat: return 0.0;
    case RoadKind::Bump:
      if (s >= 0.0 && s <= 0.25) return time_scale_ * h_ * 4.0 * M_PI * std::sin(8.0 * M_PI * s);
      return 0.0;
    case RoadKind::LimitedRamp:
      return (s >= 1.0 && s < 1.1) ? time_scale_ * 10.0 * h_ : 0.0;
    case RoadKind::Sinusoid:
      return time_scale_ * h_ / 2.0 * M_PI * std::cos(M_PI * s - M_PI / 2.0);
    case RoadKind::Table: {
      if (t < table_.front().first || t >= table_.back().first || table_.size() < 2) return 0.0;
      const auto hi = std::upper_bound(table_.begin(), table_.end(), t,
                                       [](double v, const auto& e) { return v < e.first; });
      const auto lo = hi - 1;
      return (hi->second - lo->second) / (hi->first - lo->first);
    }
  }
  return 0.0;
}

}  // namespace alq
