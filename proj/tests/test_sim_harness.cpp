#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "alq/errors.hpp"
#include "alq/sim_harness.hpp"

using namespace alq;
namespace fs = std::filesystem;

namespace {

ScenarioConfig scenario(const std::string& name) {
  return load_scenario(std::string(ALQ_DATA_DIR "/scenarios/") + name + ".cfg");
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / name; }

}  // namespace

TEST(SimTrace, ColumnsAndRows) {
  SimTrace t({{"t", "s"}, {"x", "m"}});
  EXPECT_TRUE(t.empty());
  t.append_row({0.0, 1.0});
  t.append_row({0.1, 2.0});
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 2u);
  EXPECT_EQ(t.column("x")[1], 2.0);
  EXPECT_EQ(t.index("x"), 1u);
  EXPECT_THROW(t.column("y"), PreconditionError);
  EXPECT_THROW(t.append_row({1.0}), PreconditionError);
  EXPECT_THROW(t.add_column("y", "m"), PreconditionError);
  EXPECT_NO_THROW(t.validate());
  t.append_row({0.1, 3.0});
  EXPECT_THROW(t.validate(), PreconditionError);
  t.truncate(2);
  EXPECT_EQ(t.rows(), 2u);
  SimTrace dup;
  dup.add_column("a", "");
  EXPECT_THROW(dup.add_column("a", ""), PreconditionError);
}

TEST(SimTrace, CsvRoundTrip) {
  SimTrace t({{"t", "s"}, {"accel", "m/s^2"}, {"flag", "flag"}});
  t.append_row({0.0, 0.1, 0.0});
  t.append_row({0.001, -1.0 / 3.0, 1.0});
  t.append_row({0.002, 6.02214076e23, 0.0});
  const auto path = temp_file("alq_roundtrip.csv");
  export_csv(t, path.string());
  EXPECT_EQ(count_lines(path), 4u);
  const SimTrace back = import_csv(path.string());
  EXPECT_TRUE(back == t);
  EXPECT_EQ(back.columns()[1].unit, "m/s^2");
  fs::remove(path);
}

TEST(SimTrace, EmptyExportFails) {
  SimTrace t(std::vector<std::pair<std::string, std::string>>{{"t", "s"}});
  EXPECT_THROW(export_csv(t, temp_file("alq_empty.csv").string()), PreconditionError);
  EXPECT_THROW(import_csv("/nonexistent/trace.csv"), IoError);
}

TEST(SimTrace, ThetaHash) {
  EXPECT_EQ(theta_hash(Eigen::VectorXd()), 2166136261u);
  Eigen::VectorXd a(2), b(2);
  a << 1.0, 2.0;
  b << 1.0, 2.0000000000000004;
  EXPECT_EQ(theta_hash(a), theta_hash(a));
  EXPECT_NE(theta_hash(a), theta_hash(b));
}

TEST(Harness, ModesParse) {
  EXPECT_EQ(parse_mode("passive"), Mode::Passive);
  EXPECT_EQ(parse_mode(to_string(Mode::Identification)), Mode::Identification);
  EXPECT_THROW(parse_mode("manual"), ConfigError);
  EXPECT_EQ(parse_adaptation("frozen"), Adaptation::Frozen);
  EXPECT_THROW(parse_adaptation("sometimes"), ConfigError);
}

TEST(Harness, DeterministicRuns) {
  auto cfg = scenario("bump");
  const SimTrace a = run_scenario(cfg);
  const SimTrace b = run_scenario(cfg);
  EXPECT_TRUE(a == b);
  EXPECT_EQ(a.gain_events.size(), b.gain_events.size());
  EXPECT_NO_THROW(a.validate());
  EXPECT_EQ(a.rows(), 6001u);
}

TEST(Harness, SeedChangesNoisyRuns) {
  auto cfg = scenario("bump");
  cfg.duration = 1.0;
  cfg.sensor_noise_angle = 1e-5;
  cfg.sensor_noise_accel = 1e-3;
  const SimTrace a = run_scenario(cfg);
  EXPECT_TRUE(a == run_scenario(cfg));
  cfg.seed = 2;
  EXPECT_FALSE(a == run_scenario(cfg));
}

TEST(Harness, PassiveLeavesControllerColumnsZero) {
  auto cfg = scenario("bump");
  cfg.mode = Mode::Passive;
  const SimTrace t = run_scenario(cfg);
  for (const char* col : {"torque", "reference", "dispatched", "accel_filtered", "r_delta",
                          "theta_hash", "xhat_0", "x1_0"})
    for (double v : t.column(col)) ASSERT_EQ(v, 0.0) << col;
  EXPECT_TRUE(t.gain_events.empty());
}

// Changing the road after t_k must leave every earlier row alone. Row k itself
// already sees the slope of the new segment (the last RK4 stage sits on the knot),
// but its torque was computed from measurements at t_(k-1) and must not change.
TEST(Harness, Causal) {
  std::vector<std::pair<double, double>> table;
  for (int i = 0; i <= 200; ++i) table.emplace_back(i * 0.01, 0.01 * std::sin(i * 0.05));
  auto cfg = scenario("bump");
  cfg.duration = 1.5;
  cfg.road = RoadProfile::from_table(table);
  const SimTrace base = run_scenario(cfg);

  const std::size_t k = 700;  // t_k = 0.7 s
  for (auto& s : table)
    if (s.first > 0.7 + 1e-12) s.second += 0.005;
  cfg.road = RoadProfile::from_table(table);
  const SimTrace changed = run_scenario(cfg);

  for (std::size_t j = 0; j < base.cols(); ++j)
    for (std::size_t i = 0; i < k; ++i)
      ASSERT_EQ(base.column(j)[i], changed.column(j)[i]) << base.columns()[j].name << " row " << i;
  EXPECT_EQ(base.column("torque")[k], changed.column("torque")[k]);
  EXPECT_EQ(base.column("arm_angle")[k], changed.column("arm_angle")[k]);
  EXPECT_NE(base.column("torque")[k + 2], changed.column("torque")[k + 2]);
  EXPECT_NE(base.column("arm_angle")[k + 2], changed.column("arm_angle")[k + 2]);
}

TEST(Harness, ZeroRoadActiveIsFixedPoint) {
  auto cfg = scenario("bump");
  cfg.road = RoadProfile();
  cfg.duration = 10.0;
  const SimTrace t = run_scenario(cfg);
  const double hold = equilibrium(cfg.vehicle, cfg.trajectory.r_initial).holding_torque;
  const auto& torque = t.column("torque");
  const auto& angle = t.column("arm_angle");
  for (std::size_t i = 0; i < t.rows(); ++i) {
    ASSERT_LT(std::abs(torque[i] - hold), 1e-6) << i;
    ASSERT_LT(std::abs(angle[i] - cfg.trajectory.r_initial), 1e-8) << i;
  }
}

TEST(Harness, PassiveBumpSettles) {
  auto cfg = scenario("bump");
  cfg.mode = Mode::Passive;
  cfg.duration = 8.0;
  const SimTrace t = run_scenario(cfg);
  const auto& time = t.column("t");
  const auto& acc = t.column("body_accel");
  for (std::size_t i = 0; i < t.rows(); ++i)
    if (time[i] >= 6.0) ASSERT_LT(std::abs(acc[i]), 1e-3) << time[i];
}

TEST(Harness, PassiveStartsAtRest) {
  auto cfg = scenario("bump");
  cfg.mode = Mode::Passive;
  cfg.road = RoadProfile();
  cfg.duration = 2.0;
  const SimTrace t = run_scenario(cfg);
  const double a0 = passive_equilibrium_angle(cfg.vehicle);
  for (double a : t.column("arm_angle")) ASSERT_NEAR(a, a0, 1e-9);
}

TEST(Harness, EnvelopeAbortCarriesPartialTrace) {
  auto cfg = scenario("bump");
  cfg.mode = Mode::Passive;
  cfg.road = RoadProfile(RoadKind::Bump, 0.3);
  cfg.trajectory.r_min = 0.3;
  cfg.trajectory.r_max = 0.4;
  cfg.vehicle.arm_angle_min = 0.25;
  cfg.vehicle.arm_angle_max = 0.45;
  cfg.abort_margin = 0.0;
  try {
    run_scenario(cfg);
    FAIL() << "expected an envelope violation";
  } catch (const EnvelopeViolation& e) {
    EXPECT_GT(e.tick(), 0u);
    EXPECT_EQ(e.partial().rows(), e.tick());
    EXPECT_NO_THROW(e.partial().validate());
  }
}

TEST(Harness, EnvelopeFlagsWithoutAbort) {
  auto cfg = scenario("bump");
  cfg.mode = Mode::Passive;
  cfg.trajectory.r_min = 0.33;
  cfg.trajectory.r_max = 0.37;
  cfg.vehicle.arm_angle_min = 0.32;  // the passive arm swings over about [0.307, 0.394]
  cfg.vehicle.arm_angle_max = 0.38;
  cfg.abort_margin = 1.0;
  const SimTrace t = run_scenario(cfg);
  double flags = 0.0;
  for (double f : t.column("envelope")) flags += f;
  EXPECT_GT(flags, 0.0);
}

TEST(Harness, IdentificationStaysNearLinearization) {
  auto cfg = scenario("identify");
  cfg.identification.duration = 2.0;
  const auto id = identify(cfg);
  EXPECT_EQ(id.trace.rows(), 2001u);
  ASSERT_EQ(id.theta.size(), id.theta_initial.size());
  EXPECT_TRUE(id.theta.allFinite());
  // Stays inside the projection box around the linearized parameters.
  const double frac = cfg.controller.projection_fraction;
  for (Eigen::Index k = 0; k < id.theta.size(); ++k)
    EXPECT_LE(std::abs(id.theta[k] - id.theta_initial[k]),
              frac * std::abs(id.theta_initial[k]) + 1e-9);
  EXPECT_TRUE(identify(cfg).trace == id.trace);
  cfg.identification.seed = 12345;
  EXPECT_FALSE(identify(cfg).trace == id.trace);
}

TEST(Harness, GainRefreshesLogged) {
  auto cfg = scenario("sine");
  cfg.duration = 3.0;
  const SimTrace t = run_scenario(cfg);
  ASSERT_FALSE(t.gain_events.empty());
  for (const auto& ev : t.gain_events) {
    EXPECT_LT(ev.tick, t.rows());
    EXPECT_GE(ev.theta_change, 0.0);
  }
  auto frozen = cfg;
  frozen.controller.adaptation = Adaptation::Frozen;
  const SimTrace f = run_scenario(frozen);
  EXPECT_TRUE(f.gain_events.empty());
  const auto& h = f.column("theta_hash");
  for (double v : h) ASSERT_EQ(v, h.front());
}

struct Golden {
  const char* name;
  double passive_rms, active_rms, passive_peak, active_peak;
};

void PrintTo(const Golden& g, std::ostream* os) { *os << g.name; }

// Regression values for the shipped scenarios (weighted RMS and weighted peak, m/s^2).
class HarnessGolden : public ::testing::TestWithParam<Golden> {};

TEST_P(HarnessGolden, ShippedScenario) {
  const auto g = GetParam();
  const auto r = run_comparison(scenario(g.name));
  EXPECT_NEAR(r.passive_metrics.a_rms, g.passive_rms, 1e-6);
  EXPECT_NEAR(r.active_metrics.a_rms, g.active_rms, 1e-6);
  EXPECT_NEAR(r.passive_metrics.peak, g.passive_peak, 1e-6);
  EXPECT_NEAR(r.active_metrics.peak, g.active_peak, 1e-6);
  EXPECT_LT(r.active_metrics.a_rms, r.passive_metrics.a_rms);
  EXPECT_LT(r.active_metrics.peak, r.passive_metrics.peak);
  EXPECT_EQ(r.active_envelope_ticks, 0u);
  EXPECT_EQ(r.passive_envelope_ticks, 0u);
}

INSTANTIATE_TEST_SUITE_P(
    Shipped, HarnessGolden,
    ::testing::Values(Golden{"bump", 0.400876371, 0.076668130, 3.137291104, 0.514176015},
                      Golden{"ramp", 0.256408669, 0.061213311, 1.648794850, 0.644962133},
                      Golden{"sine", 0.070195343, 0.033015285, 0.112762453, 0.074414726},
                      Golden{"sine_fast", 0.925903225, 0.044288796, 1.366917336, 0.087115334}),
    [](const auto& info) { return std::string(info.param.name); });

TEST(Harness, FasterSineGainsMore) {
  const auto slow = run_comparison(scenario("sine"));
  const auto fast = run_comparison(scenario("sine_fast"));
  EXPECT_GE(fast.reduction.rms_percent, slow.reduction.rms_percent);
}

TEST(Harness, IdenticalRunsReduceNothing) {
  auto cfg = scenario("bump");
  cfg.mode = Mode::Passive;
  const SimTrace t = run_scenario(cfg);
  const auto w = scenario_weighting(cfg);
  const auto m = trace_metrics(t, w);
  const auto r = percent_reduction(m, m);
  EXPECT_EQ(r.rms_percent, 0.0);
  EXPECT_EQ(r.peak_percent, 0.0);
}

TEST(Harness, ReportFiles) {
  auto cfg = scenario("bump");
  const auto r = run_comparison(cfg);
  const auto txt = temp_file("alq_report.txt"), csv = temp_file("alq_metrics.csv");
  write_report(r, txt.string(), csv.string());
  std::ifstream in(txt);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  for (const char* s : {"weighted RMS", "weighted peak", "reduction", "comfort (passive)",
                        "comfort (active)", "Not uncomfortable"})
    EXPECT_NE(text.find(s), std::string::npos) << s;
  EXPECT_EQ(count_lines(csv), 4u);
  fs::remove(txt);
  fs::remove(csv);
}
