#include "alq/sim_harness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "alq/adaptive_observer.hpp"
#include "alq/config.hpp"
#include "alq/lq_synthesis.hpp"
#include "alq/param_estimator.hpp"

namespace alq {

Mode parse_mode(const std::string& s) {
  if (s == "active") return Mode::Active;
  if (s == "passive") return Mode::Passive;
  if (s == "identification" || s == "identify") return Mode::Identification;
  throw ConfigError("unknown mode '" + s + "' (expected active, passive or identification)");
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Active: return "active";
    case Mode::Passive: return "passive";
    case Mode::Identification: return "identification";
  }
  return "?";
}

Adaptation parse_adaptation(const std::string& s) {
  if (s == "continuous") return Adaptation::Continuous;
  if (s == "frozen") return Adaptation::Frozen;
  throw ConfigError("unknown adaptation '" + s + "' (expected continuous or frozen)");
}

std::string to_string(Adaptation a) { return a == Adaptation::Continuous ? "continuous" : "frozen"; }

void ScenarioConfig::validate() const {
  if (!(duration > 0.0)) throw InvalidParameter("scenario duration must be positive");
  if (dt != 1e-3) throw InvalidParameter("scenario dt is fixed at 1e-3 s");
  vehicle.validate();
  trajectory.validate();
  if (trajectory.r_min < vehicle.arm_angle_min || trajectory.r_max > vehicle.arm_angle_max)
    throw InvalidParameter("trajectory range must lie inside the arm-angle envelope");
  const auto& c = controller;
  if (!(c.q1 > 0.0 && c.r_weight > 0.0)) throw InvalidParameter("q1 and R must be positive");
  if (!(c.observer_factor > 0.0 && c.observer_pole_limit > 0.0))
    throw InvalidParameter("observer_factor and observer_pole_limit must be positive");
  if (c.torque_limit && !(*c.torque_limit > 0.0))
    throw InvalidParameter("torque_limit must be positive");
  if (!(c.gamma >= 0.0 && c.lambda0 > 0.0)) throw InvalidParameter("gamma >= 0 and lambda0 > 0");
  if (!(c.projection_fraction > 0.0)) throw InvalidParameter("projection_fraction must be positive");
  if (!(c.lead_floor_fraction >= 0.0 && c.lead_floor_fraction < 1.0))
    throw InvalidParameter("lead_floor_fraction must be in [0, 1)");
  if (!(c.refresh_threshold >= 0.0) || c.refresh_period < 1)
    throw InvalidParameter("refresh_threshold >= 0 and refresh_period >= 1");
  const auto& id = identification;
  if (!(id.duration > 0.0 && id.f_low > 0.0 && id.f_low < id.f_high && id.f_high < 0.5 / dt))
    throw InvalidParameter("identification needs duration > 0 and 0 < f_low < f_high < Nyquist");
  if (!(id.amplitude_fraction >= 0.0)) throw InvalidParameter("identification amplitude must be >= 0");
  if (!(sensor_noise_angle >= 0.0 && sensor_noise_accel >= 0.0))
    throw InvalidParameter("sensor noise must be non-negative");
  if (!(abort_margin >= 0.0)) throw InvalidParameter("abort_margin must be non-negative");
}

const std::vector<std::string>& scenario_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k{
        "name",           "road",           "road_h",           "road_time_scale",
        "road_table",     "duration",       "dt",               "vehicle",
        "mode",           "seed",           "q1",               "r_weight",
        "observer_factor", "observer_pole_limit", "torque_limit",  "gamma",            "lambda0",
        "projection_fraction", "lead_floor_fraction", "adaptation", "refresh_threshold",
        "refresh_period", "blending",       "tau_f",            "traj_gain",
        "r_initial",      "r_min",          "r_max",            "accel_scale",
        "deadband",       "id_enabled",     "id_seed",          "id_duration",
        "id_f_low",       "id_f_high",      "id_amplitude",     "sensor_noise_angle",
        "sensor_noise_accel", "abort_margin", "weighting_file", "out_dir"};
    for (const auto& v : vehicle_keys()) k.push_back(v);
    return k;
  }();
  return keys;
}

namespace {

std::string resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return p;
  const std::filesystem::path path(p);
  return path.is_absolute() ? p : (base / path).lexically_normal().string();
}

std::uint64_t parse_seed(const std::string& s, const std::string& origin) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size() || s.front() == '-') throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(origin + ": seed must be a non-negative integer, got '" + s + "'");
  }
}

}  // namespace

ScenarioConfig load_scenario(const std::string& path) {
  const auto kv = KeyValueFile::load(path);
  const auto& keys = scenario_keys();
  kv.reject_unknown(std::set<std::string>(keys.begin(), keys.end()));
  const auto base = std::filesystem::path(path).parent_path();

  ScenarioConfig c;
  c.name = kv.get_string("name").value_or(std::filesystem::path(path).stem().string());

  if (const auto v = kv.get_string("vehicle")) {
    c.vehicle_file = resolve(base, *v);
    c.vehicle = load_physical_params(c.vehicle_file);
  }
  c.vehicle = apply_vehicle_keys(kv, c.vehicle);

  const RoadKind kind = parse_road_kind(kv.get_string("road").value_or("flat"));
  if (kind == RoadKind::Table) {
    const auto table = kv.get_string("road_table");
    if (!table) throw ConfigError(path + ": road = table needs road_table");
    c.road = RoadProfile::load_table(resolve(base, *table));
  } else {
    c.road = RoadProfile(kind, kv.get_double("road_h", 0.04), kv.get_double("road_time_scale", 1.0));
  }

  c.duration = kv.get_double("duration", c.duration);
  c.dt = kv.get_double("dt", c.dt);
  c.mode = parse_mode(kv.get_string("mode").value_or("active"));
  if (const auto s = kv.get_string("seed")) c.seed = parse_seed(*s, path);
  if (const char* env = std::getenv("RD_SEED"); env && *env) c.seed = parse_seed(env, "RD_SEED");

  auto& k = c.controller;
  k.q1 = kv.get_double("q1", k.q1);
  k.r_weight = kv.get_double("r_weight", k.r_weight);
  k.observer_factor = kv.get_double("observer_factor", k.observer_factor);
  k.observer_pole_limit = kv.get_double("observer_pole_limit", k.observer_pole_limit);
  if (const auto lim = kv.get_double("torque_limit")) k.torque_limit = *lim;
  k.gamma = kv.get_double("gamma", k.gamma);
  k.lambda0 = kv.get_double("lambda0", k.lambda0);
  k.projection_fraction = kv.get_double("projection_fraction", k.projection_fraction);
  k.lead_floor_fraction = kv.get_double("lead_floor_fraction", k.lead_floor_fraction);
  if (const auto a = kv.get_string("adaptation")) k.adaptation = parse_adaptation(*a);
  k.refresh_threshold = kv.get_double("refresh_threshold", k.refresh_threshold);
  k.refresh_period = static_cast<int>(kv.get_int("refresh_period", k.refresh_period));
  k.blending = kv.get_bool("blending", k.blending);

  auto& t = c.trajectory;
  t.tau_f = kv.get_double("tau_f", t.tau_f);
  t.gain = kv.get_double("traj_gain", t.gain);
  t.r_initial = kv.get_double("r_initial", t.r_initial);
  t.r_min = kv.get_double("r_min", t.r_min);
  t.r_max = kv.get_double("r_max", t.r_max);
  t.accel_scale = kv.get_double("accel_scale", t.accel_scale);
  t.deadband = kv.get_double("deadband", t.deadband);

  auto& id = c.identification;
  id.enabled = kv.get_bool("id_enabled", id.enabled);
  if (const auto s = kv.get_string("id_seed")) id.seed = parse_seed(*s, path);
  id.duration = kv.get_double("id_duration", id.duration);
  id.f_low = kv.get_double("id_f_low", id.f_low);
  id.f_high = kv.get_double("id_f_high", id.f_high);
  id.amplitude_fraction = kv.get_double("id_amplitude", id.amplitude_fraction);

  c.sensor_noise_angle = kv.get_double("sensor_noise_angle", 0.0);
  c.sensor_noise_accel = kv.get_double("sensor_noise_accel", 0.0);
  c.abort_margin = kv.get_double("abort_margin", c.abort_margin);
  if (const auto w = kv.get_string("weighting_file")) c.weighting_file = resolve(base, *w);
  c.out_dir = kv.get_string("out_dir").value_or(".");
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// SimTrace

SimTrace::SimTrace(const std::vector<std::pair<std::string, std::string>>& header) {
  for (const auto& [name, unit] : header) add_column(name, unit);
}

std::size_t SimTrace::add_column(std::string name, std::string unit) {
  if (!empty()) throw PreconditionError("columns must be added before the first row");
  if (has(name)) throw PreconditionError("duplicate trace column '" + name + "'");
  columns_.push_back({std::move(name), std::move(unit), {}});
  return columns_.size() - 1;
}

void SimTrace::append_row(const std::vector<double>& row) {
  if (row.size() != columns_.size())
    throw PreconditionError(fmt::format("row has {} values, trace has {} columns", row.size(),
                                        columns_.size()));
  for (std::size_t i = 0; i < row.size(); ++i) columns_[i].values.push_back(row[i]);
}

bool SimTrace::has(const std::string& name) const {
  return std::any_of(columns_.begin(), columns_.end(),
                     [&name](const TraceColumn& c) { return c.name == name; });
}

std::size_t SimTrace::index(const std::string& name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i].name == name) return i;
  throw PreconditionError("no trace column '" + name + "'");
}

const std::vector<double>& SimTrace::column(const std::string& name) const {
  return columns_[index(name)].values;
}

void SimTrace::validate() const {
  if (columns_.empty()) throw PreconditionError("trace has no columns");
  const std::size_t n = rows();
  for (const auto& c : columns_) {
    if (c.values.size() != n) throw PreconditionError("trace columns differ in length");
    for (double v : c.values)
      if (!std::isfinite(v)) throw PreconditionError("non-finite value in column '" + c.name + "'");
  }
  const auto& t = columns_.front().values;
  for (std::size_t i = 1; i < n; ++i)
    if (!(t[i] > t[i - 1])) throw PreconditionError("time grid is not strictly increasing");
}

void SimTrace::truncate(std::size_t n) {
  for (auto& c : columns_)
    if (c.values.size() > n) c.values.resize(n);
}

bool operator==(const SimTrace& a, const SimTrace& b) {
  if (a.columns_.size() != b.columns_.size()) return false;
  for (std::size_t i = 0; i < a.columns_.size(); ++i) {
    const auto& x = a.columns_[i];
    const auto& y = b.columns_[i];
    if (x.name != y.name || x.unit != y.unit || x.values.size() != y.values.size()) return false;
    for (std::size_t k = 0; k < x.values.size(); ++k)
      if (std::bit_cast<std::uint64_t>(x.values[k]) != std::bit_cast<std::uint64_t>(y.values[k]))
        return false;
  }
  return true;
}

std::uint32_t theta_hash(const Eigen::VectorXd& theta) {
  std::uint32_t h = 2166136261u;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(theta[i]);
    for (int b = 0; b < 8; ++b) {
      h ^= static_cast<std::uint32_t>((bits >> (8 * b)) & 0xffu);
      h *= 16777619u;
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// Closed loop

namespace {

std::size_t tick_count(double duration, double dt) {
  return static_cast<std::size_t>(std::llround(duration / dt)) + 1;
}

struct Linear {
  double a_lin = 0.0;
  Equilibrium eq;
  PolynomialPlant plant;
  Eigen::VectorXd theta0;
  ProjectionBox box;
};

Linear operating_point(const ScenarioConfig& cfg) {
  Linear L;
  L.a_lin = cfg.trajectory.r_initial;
  L.eq = equilibrium(cfg.vehicle, L.a_lin);
  L.plant = linearize(cfg.vehicle, L.eq.state, L.eq.holding_torque).plant;
  const int n = L.plant.denominator_degree();
  L.theta0 = ParametricModel::theta_of(L.plant, n, L.plant.numerator_degree());
  L.box = ProjectionBox::around(L.theta0, cfg.controller.projection_fraction,
                                cfg.controller.lead_floor_fraction * std::abs(L.theta0[0]));
  return L;
}

// Gains for the current estimate; rejects designs whose Euler observer step would diverge.
Synthesis design(const ScenarioConfig& cfg, const PolynomialPlant& plant) {
  const auto& ctl = cfg.controller;
  Synthesis s = synthesize(plant, ctl.q1, ctl.r_weight, ctl.observer_factor, ctl.observer_pole_limit);
  const auto& m = s.model;
  const Eigen::MatrixXd step = Eigen::MatrixXd::Identity(m.order(), m.order()) +
                               cfg.dt * (m.A + m.B * s.gains.Kc - s.gains.Ko * m.C);
  Eigen::EigenSolver<Eigen::MatrixXd> es(step, false);
  if (!(es.eigenvalues().cwiseAbs().maxCoeff() < 1.0))
    throw IllConditioned("observer update is unstable at this tick length");
  return s;
}

ParametricModel make_estimator(const ScenarioConfig& cfg, const Linear& L,
                               const Eigen::VectorXd& theta) {
  return ParametricModel(L.plant.denominator_degree(), L.plant.numerator_degree(),
                         cfg.controller.lambda0, cfg.dt, theta, L.box);
}

std::function<std::pair<double, double>(double)> road_fn(const RoadProfile& road) {
  return [&road](double t) { return road(t); };
}

void check_envelope(const ScenarioConfig& cfg, const PlantState& x, std::size_t tick,
                    const SimTrace& trace) {
  const auto& p = cfg.vehicle;
  const double a = x.arm_angle;
  const bool finite = std::isfinite(a) && std::isfinite(x.arm_rate) &&
                      std::isfinite(x.body_heave) && std::isfinite(x.body_rate);
  if (!finite)
    throw EnvelopeViolation(fmt::format("tick {}: non-finite plant state", tick), tick, trace);
  if (a < p.arm_angle_min - cfg.abort_margin || a > p.arm_angle_max + cfg.abort_margin)
    throw EnvelopeViolation(
        fmt::format("tick {}: arm angle {:.6g} rad left the envelope [{}, {}] by more than {} rad",
                    tick, a, p.arm_angle_min, p.arm_angle_max, cfg.abort_margin),
        tick, trace);
}

}  // namespace

IdentificationResult identify(const ScenarioConfig& cfg) {
  cfg.validate();
  const Linear L = operating_point(cfg);
  const auto& p = cfg.vehicle;
  const auto& id = cfg.identification;
  ParametricModel est = make_estimator(cfg, L, L.theta0);

  const double static_torque = p.total_mass() * p.gravity * p.arm_length * std::cos(L.a_lin);
  BandLimitedNoise noise(id.seed.value_or(cfg.seed), id.f_low, id.f_high, 1.0 / cfg.dt,
                         id.amplitude_fraction * static_torque);

  const RoadProfile flat;
  const auto road = road_fn(flat);
  const std::size_t n_theta = static_cast<std::size_t>(L.theta0.size());

  std::vector<std::pair<std::string, std::string>> header{
      {"t", "s"}, {"torque", "N m"}, {"arm_angle", "rad"}, {"body_heave", "m"},
      {"est_eps", "-"}, {"est_m2", "-"}, {"theta_hash", "-"}};
  for (std::size_t j = 0; j < n_theta; ++j) header.emplace_back(fmt::format("theta_{}", j), "-");
  IdentificationResult result{SimTrace(header), L.theta0, L.theta0};

  PlantState x = L.eq.state;
  const std::size_t N = tick_count(id.duration, cfg.dt);
  std::vector<double> row(header.size());
  for (std::size_t i = 0; i < N; ++i) {
    const double t = static_cast<double>(i) * cfg.dt;
    const double du = noise.next();
    const double u = L.eq.holding_torque + du;
    try {
      check_envelope(cfg, x, i, result.trace);
      const Regression r = est.regress(du, x.arm_angle - L.a_lin);
      est.adapt(r, cfg.controller.gamma);
    } catch (const SimulationError&) {
      throw;
    } catch (const Error& e) {
      throw SimulationError(fmt::format("identification tick {}: {}", i, e.what()), i,
                            result.trace);
    }
    row[0] = t;
    row[1] = u;
    row[2] = x.arm_angle;
    row[3] = x.body_heave;
    row[4] = est.last_error();
    row[5] = est.last_m2();
    row[6] = theta_hash(est.theta());
    for (std::size_t j = 0; j < n_theta; ++j) row[7 + j] = est.theta()[static_cast<Eigen::Index>(j)];
    result.trace.append_row(row);
    x = rk4_step(x, u, t, cfg.dt, road, p);
  }
  result.theta = est.theta();
  return result;
}

SimTrace run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  if (cfg.mode == Mode::Identification) return identify(cfg).trace;

  const bool active = cfg.mode == Mode::Active;
  const auto& p = cfg.vehicle;
  const auto& ctl = cfg.controller;
  const auto road = road_fn(cfg.road);
  const double dt = cfg.dt;

  // Controller set-up (active only).
  std::optional<Linear> L;
  std::optional<ParametricModel> est;
  std::optional<Synthesis> syn;
  Eigen::VectorXd theta_syn;
  if (active) {
    L = operating_point(cfg);
    Eigen::VectorXd theta_start = L->theta0;
    if (cfg.identification.enabled) theta_start = identify(cfg).theta;
    est.emplace(make_estimator(cfg, *L, theta_start));
    theta_syn = est->theta();
    syn = design(cfg, est->plant());
  }
  const int order = active ? static_cast<int>(syn->model.order()) : 4;
  const std::size_t n_theta = active ? static_cast<std::size_t>(theta_syn.size()) : 7;

  const ReferenceAnchors anchors{cfg.trajectory.r_min,
                                 0.5 * (cfg.trajectory.r_min + cfg.trajectory.r_max),
                                 cfg.trajectory.r_max};
  MultiObserver obs(order, anchors, cfg.trajectory.r_initial);
  ReferenceTrajectory traj(cfg.trajectory);

  std::vector<std::pair<std::string, std::string>> header{
      {"t", "s"},           {"road", "m"},           {"road_rate", "m/s"},
      {"arm_angle", "rad"}, {"arm_rate", "rad/s"},   {"body_heave", "m"},
      {"body_rate", "m/s"}, {"body_accel", "m/s^2"}, {"envelope", "flag"},
      {"torque", "N m"},    {"reference", "rad"},    {"dispatched", "flag"},
      {"accel_filtered", "m/s^2"}, {"r_delta", "rad"}, {"theta_hash", "-"},
      {"est_eps", "-"},     {"est_m2", "-"}};
  const std::size_t c_theta = header.size();
  for (std::size_t j = 0; j < n_theta; ++j) header.emplace_back(fmt::format("theta_{}", j), "-");
  const std::size_t c_xhat = header.size();
  for (int j = 0; j < order; ++j) header.emplace_back(fmt::format("xhat_{}", j), "-");
  const std::size_t c_anchor = header.size();
  header.emplace_back("x1_0", "-");
  header.emplace_back("x2_0", "-");
  header.emplace_back("x3_0", "-");
  SimTrace trace(header);

  // Initial state and torque.
  PlantState x;
  double u = 0.0;
  double u_ff = 0.0;
  const double y0 = cfg.road.height(0.0);
  if (active) {
    const Equilibrium e0 = equilibrium(p, cfg.trajectory.r_initial, y0);
    x = e0.state;
    u = u_ff = e0.holding_torque;
  } else {
    x = equilibrium(p, passive_equilibrium_angle(p), y0).state;
  }
  std::map<double, double> holding_cache;
  auto holding = [&](double r) {
    auto it = holding_cache.find(r);
    if (it == holding_cache.end()) it = holding_cache.emplace(r, equilibrium(p, r).holding_torque).first;
    return it->second;
  };

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const bool noisy = cfg.sensor_noise_angle > 0.0 || cfg.sensor_noise_accel > 0.0;

  const std::size_t N = tick_count(cfg.duration, dt);
  std::vector<double> row(header.size(), 0.0);
  int since_refresh = 0;

  for (std::size_t i = 0; i < N; ++i) {
    const double t = static_cast<double>(i) * dt;
    const auto [h, hd] = road(t);
    check_envelope(cfg, x, i, trace);

    std::fill(row.begin(), row.end(), 0.0);
    try {
      const PlantStateDerivative d = eval_dynamics(x, u, h, hd, p);
      double y = x.arm_angle;
      double acc = d.body_accel;
      if (noisy) {
        y += cfg.sensor_noise_angle * normal(rng);
        acc += cfg.sensor_noise_accel * normal(rng);
      }
      row[0] = t;
      row[1] = h;
      row[2] = hd;
      row[3] = x.arm_angle;
      row[4] = x.arm_rate;
      row[5] = x.body_heave;
      row[6] = x.body_rate;
      row[7] = d.body_accel;
      row[8] = (x.arm_angle <= p.arm_angle_min || x.arm_angle >= p.arm_angle_max) ? 1.0 : 0.0;
      row[9] = u;

      if (active) {
        // Measurements at t_i produce the torque applied from t_(i+1).
        const TrajectorySample ts = traj.update(acc, y, dt);
        if (ts.dispatched) {
          obs.on_reference_change(*ts.dispatched, ctl.blending);
          u_ff = holding(*ts.dispatched);
          row[11] = 1.0;
        }
        const Regression reg = est->regress(u - L->eq.holding_torque, y - L->a_lin);
        if (ctl.adaptation == Adaptation::Continuous) est->adapt(reg, ctl.gamma);

        ++since_refresh;
        const double change = (est->theta() - theta_syn).norm() / theta_syn.norm();
        if ((change > ctl.refresh_threshold || since_refresh >= ctl.refresh_period) &&
            est->theta() != theta_syn) {
          GainEvent ev{i, change, true, {}};
          try {
            syn = design(cfg, est->plant());
            theta_syn = est->theta();
          } catch (const Error& e) {
            ev.accepted = false;
            ev.message = e.what();
          }
          trace.gain_events.push_back(std::move(ev));
          since_refresh = 0;
        } else if (since_refresh >= ctl.refresh_period) {
          since_refresh = 0;
        }

        obs.step(y, syn->gains, syn->model, dt);
        const double fb = control_torque(syn->gains.Kc, obs.x_hat(), ctl.torque_limit);
        const double u_next = u_ff + fb;

        row[10] = obs.reference();
        row[12] = ts.filtered_accel;
        row[13] = ts.r_delta;
        row[14] = static_cast<double>(theta_hash(est->theta()));
        row[15] = est->last_error();
        row[16] = est->last_m2();
        for (std::size_t j = 0; j < n_theta; ++j)
          row[c_theta + j] = est->theta()[static_cast<Eigen::Index>(j)];
        for (int j = 0; j < order; ++j) row[c_xhat + static_cast<std::size_t>(j)] = obs.x_hat()[j];
        for (int k = 0; k < 3; ++k) row[c_anchor + static_cast<std::size_t>(k)] = obs.anchor_state(k)[0];

        trace.append_row(row);
        x = rk4_step(x, u, t, dt, road, p);
        u = u_next;
      } else {
        trace.append_row(row);
        x = rk4_step(x, 0.0, t, dt, road, p);
      }
    } catch (const SimulationError&) {
      throw;
    } catch (const Error& e) {
      throw SimulationError(fmt::format("tick {} (t = {:.3f} s): {}", i, t, e.what()), i, trace);
    }
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Comparison and report

WeightingFilter scenario_weighting(const ScenarioConfig& cfg) {
  const double fs = 1.0 / cfg.dt;
  return cfg.weighting_file.empty() ? WeightingFilter::vertical(fs)
                                    : WeightingFilter::load(cfg.weighting_file, fs);
}

RideMetrics trace_metrics(const SimTrace& trace, const WeightingFilter& w) {
  const auto& t = trace.column("t");
  if (t.size() < 2) throw PreconditionError("trace too short for ride metrics");
  return ride_metrics(trace.column("body_accel"), t[1] - t[0], w);
}

namespace {
std::size_t count_flags(const SimTrace& t) {
  const auto& f = t.column("envelope");
  return static_cast<std::size_t>(std::count(f.begin(), f.end(), 1.0));
}
}  // namespace

ComparisonReport run_comparison(const ScenarioConfig& cfg) {
  ScenarioConfig passive = cfg;
  passive.mode = Mode::Passive;
  ScenarioConfig active = cfg;
  active.mode = Mode::Active;

  auto passive_run = std::async(std::launch::async, [&passive] { return run_scenario(passive); });
  ComparisonReport r;
  r.name = cfg.name;
  r.active = run_scenario(active);
  r.passive = passive_run.get();

  const WeightingFilter w = scenario_weighting(cfg);
  r.passive_metrics = trace_metrics(r.passive, w);
  r.active_metrics = trace_metrics(r.active, w);
  r.reduction = percent_reduction(r.passive_metrics, r.active_metrics);
  r.passive_envelope_ticks = count_flags(r.passive);
  r.active_envelope_ticks = count_flags(r.active);
  return r;
}

namespace {
std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "; " : "") + v[i];
  return s;
}
}  // namespace

std::string format_report(const ComparisonReport& r) {
  const auto& p = r.passive_metrics;
  const auto& a = r.active_metrics;
  std::string s;
  s += fmt::format("scenario: {}\nduration: {:.3f} s\n\n", r.name, p.duration);
  s += fmt::format("{:<28}{:>14}{:>14}{:>14}\n", "metric", "passive", "active", "reduction %");
  s += fmt::format("{:<28}{:>14.6f}{:>14.6f}{:>14.2f}\n", "weighted RMS [m/s^2]", p.a_rms,
                   a.a_rms, r.reduction.rms_percent);
  s += fmt::format("{:<28}{:>14.6f}{:>14.6f}{:>14.2f}\n", "weighted peak [m/s^2]", p.peak, a.peak,
                   r.reduction.peak_percent);
  s += fmt::format("{:<28}{:>14.6f}{:>14.6f}{:>14.2f}\n", "raw peak [m/s^2]", p.peak_raw,
                   a.peak_raw, r.reduction.peak_raw_percent);
  s += fmt::format("{:<28}{:>14}{:>14}\n\n", "envelope ticks", r.passive_envelope_ticks,
                   r.active_envelope_ticks);
  s += fmt::format("comfort (passive): {}\ncomfort (active):  {}\n", join(p.comfort),
                   join(a.comfort));
  return s;
}

void write_report(const ComparisonReport& r, const std::string& text_path,
                  const std::string& csv_path) {
  {
    std::ofstream out(text_path);
    if (!out) throw IoError("cannot write report '" + text_path + "'");
    out << format_report(r);
    if (!out) throw IoError("write failed for '" + text_path + "'");
  }
  std::ofstream out(csv_path);
  if (!out) throw IoError("cannot write metrics '" + csv_path + "'");
  out << "run,a_rms [m/s^2],peak [m/s^2],peak_raw [m/s^2],envelope_ticks,comfort\n";
  auto line = [&out](const char* run, const RideMetrics& m, std::size_t flags) {
    out << fmt::format("{},{:.17g},{:.17g},{:.17g},{},\"{}\"\n", run, m.a_rms, m.peak, m.peak_raw,
                       flags, join(m.comfort));
  };
  line("passive", r.passive_metrics, r.passive_envelope_ticks);
  line("active", r.active_metrics, r.active_envelope_ticks);
  out << fmt::format("reduction_percent,{:.17g},{:.17g},{:.17g},,\n", r.reduction.rms_percent,
                     r.reduction.peak_percent, r.reduction.peak_raw_percent);
  if (!out) throw IoError("write failed for '" + csv_path + "'");
}

// ---------------------------------------------------------------------------
// CSV

void export_csv(const SimTrace& trace, const std::string& path) {
  if (trace.empty()) throw PreconditionError("cannot export an empty trace");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  const auto& cols = trace.columns();
  std::string line;
  for (std::size_t j = 0; j < cols.size(); ++j)
    line += fmt::format("{}{} [{}]", j ? "," : "", cols[j].name, cols[j].unit);
  out << line << '\n';
  for (std::size_t i = 0; i < trace.rows(); ++i) {
    line.clear();
    for (std::size_t j = 0; j < cols.size(); ++j)
      line += fmt::format("{}{:.17g}", j ? "," : "", cols[j].values[i]);
    out << line << '\n';
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

SimTrace import_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "': file not found");
  std::string line;
  if (!std::getline(in, line)) throw IoError("'" + path + "' is empty");
  SimTrace trace;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) {
      const auto open = cell.rfind(" [");
      if (open != std::string::npos && cell.back() == ']')
        trace.add_column(cell.substr(0, open), cell.substr(open + 2, cell.size() - open - 3));
      else
        trace.add_column(cell, "");
    }
  }
  std::vector<double> row;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    row.clear();
    const char* s = line.c_str();
    while (true) {
      char* end = nullptr;
      row.push_back(std::strtod(s, &end));
      if (end == s) throw IoError(fmt::format("{}:{}: malformed number", path, lineno));
      if (*end == '\0') break;
      if (*end != ',') throw IoError(fmt::format("{}:{}: expected ','", path, lineno));
      s = end + 1;
    }
    if (row.size() != trace.cols())
      throw IoError(fmt::format("{}:{}: expected {} fields", path, lineno, trace.cols()));
    trace.append_row(row);
  }
  return trace;
}

}  // namespace alq
