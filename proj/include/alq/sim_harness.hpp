#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "alq/errors.hpp"
#include "alq/reference_trajectory.hpp"
#include "alq/ride_quality.hpp"
#include "alq/road.hpp"
#include "alq/vehicle_plant.hpp"

namespace alq {

enum class Mode { Active, Passive, Identification };
enum class Adaptation { Frozen, Continuous };

Mode parse_mode(const std::string& s);
std::string to_string(Mode m);
Adaptation parse_adaptation(const std::string& s);
std::string to_string(Adaptation a);

struct ControllerSettings {
  double q1 = 100.0;
  double r_weight = 1.0;
  double observer_factor = 3.0;
  double observer_pole_limit = 500.0;  // rad/s, keeps the Euler observer step stable
  std::optional<double> torque_limit;  // on the feedback part, N m
  double gamma = 10.0;
  double lambda0 = 20.0;
  double projection_fraction = 3.0;  // +-300 % box around the linearized theta
  double lead_floor_fraction = 0.05; // of |b_m| at the linearization point
  Adaptation adaptation = Adaptation::Continuous;
  double refresh_threshold = 0.01;   // relative change in theta
  int refresh_period = 100;          // ticks
  bool blending = true;
};

struct IdentificationSettings {
  bool enabled = true;
  std::optional<std::uint64_t> seed;  // defaults to the scenario seed
  double duration = 5.0;
  double f_low = 0.5;
  double f_high = 15.0;
  /// Excitation amplitude as a fraction of the static gravity torque M_all g L_a cos(r_i).
  double amplitude_fraction = 0.05;
};

struct ScenarioConfig {
  std::string name = "scenario";
  RoadProfile road{};
  double duration = 10.0;
  double dt = 1e-3;
  PhysicalParams vehicle{};
  std::string vehicle_file;
  ControllerSettings controller{};
  TrajectoryConfig trajectory{};
  Mode mode = Mode::Active;
  IdentificationSettings identification{};
  std::uint64_t seed = 1;
  double sensor_noise_angle = 0.0;  // rad, std
  double sensor_noise_accel = 0.0;  // m/s^2, std
  double abort_margin = 0.2;        // rad beyond the arm-angle envelope
  std::string weighting_file;       // empty: built-in vertical weighting
  std::string out_dir = ".";

  void validate() const;
};

/// Keys accepted in scenario files, vehicle keys included.
const std::vector<std::string>& scenario_keys();

/// Parses a scenario file; relative file paths resolve against its directory.
/// RD_SEED, when set, overrides the `seed` key.
ScenarioConfig load_scenario(const std::string& path);

struct TraceColumn {
  std::string name;
  std::string unit;
  std::vector<double> values;
};

struct GainEvent {
  std::size_t tick = 0;
  double theta_change = 0.0;  // relative
  bool accepted = false;
  std::string message;
};

class SimTrace {
 public:
  SimTrace() = default;
  explicit SimTrace(const std::vector<std::pair<std::string, std::string>>& header);

  std::size_t add_column(std::string name, std::string unit);
  void append_row(const std::vector<double>& row);

  std::size_t rows() const { return columns_.empty() ? 0 : columns_.front().values.size(); }
  std::size_t cols() const { return columns_.size(); }
  bool empty() const { return rows() == 0; }

  bool has(const std::string& name) const;
  std::size_t index(const std::string& name) const;
  const std::vector<double>& column(const std::string& name) const;
  const std::vector<double>& column(std::size_t i) const { return columns_.at(i).values; }
  const std::vector<TraceColumn>& columns() const { return columns_; }

  /// Throws unless time is strictly increasing, columns have equal length and values are finite.
  void validate() const;
  void truncate(std::size_t rows);

  std::vector<GainEvent> gain_events;

  /// Bitwise equality of headers and values.
  friend bool operator==(const SimTrace& a, const SimTrace& b);

 private:
  std::vector<TraceColumn> columns_;
};

/// FNV-1a over the IEEE-754 bytes of theta.
std::uint32_t theta_hash(const Eigen::VectorXd& theta);

/// Raised by run_scenario; carries the rows recorded before the failing tick.
class SimulationError : public Error {
 public:
  SimulationError(const std::string& what, std::size_t tick, SimTrace partial)
      : Error(what), tick_(tick), partial_(std::move(partial)) {}
  std::size_t tick() const { return tick_; }
  const SimTrace& partial() const { return partial_; }

 private:
  std::size_t tick_;
  SimTrace partial_;
};

class EnvelopeViolation : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

struct IdentificationResult {
  SimTrace trace;
  Eigen::VectorXd theta_initial;  // analytic linearization
  Eigen::VectorXd theta;          // estimate after the excitation run
};

/// Open-loop excitation around the equilibrium at r_initial with the estimator adapting.
IdentificationResult identify(const ScenarioConfig& cfg);

/// The full closed loop (or the passive baseline) at a 1 kHz tick.
/// Row i holds the state at t_i and the torque applied over [t_i, t_i + dt),
/// which is computed from measurements at t_(i-1).
SimTrace run_scenario(const ScenarioConfig& cfg);

struct ComparisonReport {
  std::string name;
  SimTrace passive;
  SimTrace active;
  RideMetrics passive_metrics;
  RideMetrics active_metrics;
  Reduction reduction;
  std::size_t passive_envelope_ticks = 0;
  std::size_t active_envelope_ticks = 0;
};

/// Passive and active runs of the same road, then ride metrics and reductions.
ComparisonReport run_comparison(const ScenarioConfig& cfg);
RideMetrics trace_metrics(const SimTrace& trace, const WeightingFilter& w);
WeightingFilter scenario_weighting(const ScenarioConfig& cfg);

std::string format_report(const ComparisonReport& report);
void write_report(const ComparisonReport& report, const std::string& text_path,
                  const std::string& csv_path);

void export_csv(const SimTrace& trace, const std::string& path);
SimTrace import_csv(const std::string& path);

}  // namespace alq
