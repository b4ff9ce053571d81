// alqsim: scenario runner for the adaptive LQ trailing-arm suspension model.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "alq/errors.hpp"
#include "alq/ride_quality.hpp"
#include "alq/road.hpp"
#include "alq/sim_harness.hpp"

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool quiet = false;
};

alq::ScenarioConfig load(const std::string& path, const Globals& g) {
  alq::ScenarioConfig cfg = alq::load_scenario(path);
  if (g.seed) cfg.seed = *g.seed;
  if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
  std::filesystem::create_directories(cfg.out_dir);
  return cfg;
}

std::string out_path(const alq::ScenarioConfig& cfg, const std::string& suffix) {
  return (std::filesystem::path(cfg.out_dir) / (cfg.name + suffix)).string();
}

int cmd_run(const std::string& path, const Globals& g) {
  const auto cfg = load(path, g);
  alq::SimTrace trace;
  try {
    trace = alq::run_scenario(cfg);
  } catch (const alq::SimulationError& e) {
    if (!e.partial().empty()) alq::export_csv(e.partial(), out_path(cfg, "_aborted.csv"));
    throw;
  }
  const std::string file = out_path(cfg, "_" + alq::to_string(cfg.mode) + ".csv");
  alq::export_csv(trace, file);
  if (!g.quiet) {
    fmt::print("{} ({}): {} ticks -> {}\n", cfg.name, alq::to_string(cfg.mode), trace.rows(), file);
    if (trace.has("body_accel")) {
      const auto m = alq::trace_metrics(trace, alq::scenario_weighting(cfg));
      fmt::print("weighted RMS {:.6f} m/s^2, weighted peak {:.6f} m/s^2\n", m.a_rms, m.peak);
    }
    if (!trace.gain_events.empty()) fmt::print("gain refreshes: {}\n", trace.gain_events.size());
  }
  return 0;
}

int cmd_compare(const std::string& path, const Globals& g) {
  const auto cfg = load(path, g);
  const auto report = alq::run_comparison(cfg);
  const std::string txt = out_path(cfg, "_report.txt");
  alq::write_report(report, txt, out_path(cfg, "_metrics.csv"));
  alq::export_csv(report.passive, out_path(cfg, "_passive.csv"));
  alq::export_csv(report.active, out_path(cfg, "_active.csv"));
  if (!g.quiet) fmt::print("{}\nreport: {}\n", alq::format_report(report), txt);
  return 0;
}

int cmd_identify(const std::string& path, const Globals& g) {
  const auto cfg = load(path, g);
  const auto id = alq::identify(cfg);
  const std::string file = out_path(cfg, "_identification.csv");
  alq::export_csv(id.trace, file);
  if (!g.quiet) {
    fmt::print("{:>4}{:>22}{:>22}\n", "k", "linearized", "identified");
    for (Eigen::Index k = 0; k < id.theta.size(); ++k)
      fmt::print("{:>4}{:>22.10g}{:>22.10g}\n", k, id.theta_initial[k], id.theta[k]);
    fmt::print("trace: {}\n", file);
  }
  return 0;
}

int cmd_roads(const std::string& kind_name, double h, double duration, double time_scale,
              const std::string& out, const Globals& g) {
  const alq::RoadKind kind = alq::parse_road_kind(kind_name);
  if (kind == alq::RoadKind::Table) throw alq::ConfigError("roads: table profiles are read, not generated");
  const alq::RoadProfile road(kind, h, time_scale);
  const double dt = 1e-3;
  const auto n = static_cast<std::size_t>(std::llround(duration / dt)) + 1;
  std::string text = "t [s],road [m],road_rate [m/s]\n";
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    text += fmt::format("{:.17g},{:.17g},{:.17g}\n", t, road.height(t), road.rate(t));
  }
  if (out.empty()) {
    std::cout << text;
    return 0;
  }
  std::filesystem::path file(out);
  if (!g.out_dir.empty() && file.is_relative()) file = std::filesystem::path(g.out_dir) / file;
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream f(file);
  if (!f || !(f << text)) throw alq::IoError("cannot write '" + file.string() + "'");
  if (!g.quiet) fmt::print("{} rows -> {}\n", n, file.string());
  return 0;
}

int cmd_metrics(const std::string& in, const std::string& col, const std::string& weighting,
                const Globals& g) {
  const alq::SimTrace trace = alq::import_csv(in);
  const auto& t = trace.column("t");
  if (t.size() < 2) throw alq::PreconditionError("metrics needs at least two rows");
  const double dt = t[1] - t[0];
  const double fs = 1.0 / dt;
  const auto w = weighting.empty() ? alq::WeightingFilter::vertical(fs)
                                   : alq::WeightingFilter::load(weighting, fs);
  const auto m = alq::ride_metrics(trace.column(col), dt, w);
  if (!g.quiet) {
    fmt::print("column:        {}\n", col);
    fmt::print("duration:      {:.6f} s\n", m.duration);
  }
  fmt::print("weighted RMS:  {:.9f} m/s^2\n", m.a_rms);
  fmt::print("weighted peak: {:.9f} m/s^2\n", m.peak);
  fmt::print("raw peak:      {:.9f} m/s^2\n", m.peak_raw);
  std::string labels;
  for (const auto& l : m.comfort) labels += (labels.empty() ? "" : "; ") + l;
  fmt::print("comfort:       {}\n", labels);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive LQ trailing-arm suspension simulator"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Override the scenario seed (takes precedence over RD_SEED)");
  app.add_option("--out-dir", g.out_dir, "Directory for traces and reports");
  app.add_flag("--quiet,-q", g.quiet, "Suppress progress output");

  std::string scenario;
  auto* run = app.add_subcommand("run", "Run one scenario and export its trace");
  run->add_option("scenario", scenario, "Scenario file")->required();
  auto* compare = app.add_subcommand("compare", "Run passive and active variants and report");
  compare->add_option("scenario", scenario, "Scenario file")->required();
  auto* ident = app.add_subcommand("identify", "Run the identification phase only");
  ident->add_option("scenario", scenario, "Scenario file")->required();

  std::string kind, out;
  double h = 0.04, duration = 5.0, time_scale = 1.0;
  auto* roads = app.add_subcommand("roads", "Tabulate a road profile at 1 kHz");
  roads->set_help_flag("--help", "Print this help message and exit");
  roads->add_option("--kind", kind, "bump | ramp | sine | flat")->required();
  roads->add_option("--h", h, "Profile height, m");
  roads->add_option("--duration", duration, "Length, s")->check(CLI::PositiveNumber);
  roads->add_option("--time-scale", time_scale, "Time compression factor")->check(CLI::PositiveNumber);
  roads->add_option("--out", out, "Output CSV (stdout when omitted)");

  std::string in, col = "body_accel", weighting;
  auto* metrics = app.add_subcommand("metrics", "Ride metrics of one CSV column");
  metrics->add_option("--in", in, "Trace CSV")->required();
  metrics->add_option("--col", col, "Acceleration column");
  metrics->add_option("--weighting", weighting, "Coefficient file (default: built-in)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*run) return cmd_run(scenario, g);
    if (*compare) return cmd_compare(scenario, g);
    if (*ident) return cmd_identify(scenario, g);
    if (*roads) return cmd_roads(kind, h, duration, time_scale, out, g);
    if (*metrics) return cmd_metrics(in, col, weighting, g);
  } catch (const std::exception& e) {
    std::cerr << "alqsim: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
