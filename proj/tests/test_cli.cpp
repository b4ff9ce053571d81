#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

// Runs alqsim with stderr folded into stdout.
Result alqsim(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " \"" ALQSIM_PATH "\" " + args + " 2>&1";
  Result r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string scenario(const std::string& name) {
  return std::string(ALQ_DATA_DIR "/scenarios/") + name + ".cfg";
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("alqsim_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(Cli, RoadsTable) {
  const auto r = alqsim("roads --kind bump --h 0.04 --duration 0.2");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.rfind("t [s],road [m],road_rate [m/s]\n", 0), 0u);
  const auto at = r.out.find("\n0.125,");
  ASSERT_NE(at, std::string::npos);
  EXPECT_NEAR(std::stod(r.out.substr(at + 7)), 0.04, 1e-15);
  EXPECT_NE(r.out.find("\n0,0,0\n"), std::string::npos);
}

TEST(Cli, RoadsRejectsTable) {
  EXPECT_EQ(alqsim("roads --kind table").code, 2);
  EXPECT_EQ(alqsim("roads --kind gravel").code, 2);
}

TEST(Cli, MissingScenario) {
  const auto r = alqsim("run /nonexistent/missing.cfg");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("alqsim:"), std::string::npos);
  EXPECT_NE(r.out.find("file not found"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(alqsim("--bogus run x.cfg").code, 1);
  EXPECT_EQ(alqsim("").code, 1);
  EXPECT_EQ(alqsim("run").code, 1);
  EXPECT_EQ(alqsim("--help").code, 0);
}

TEST(Cli, CompareWritesReport) {
  const auto dir = scratch("compare");
  const auto r = alqsim("--out-dir " + dir.string() + " compare " + scenario("bump"));
  ASSERT_EQ(r.code, 0) << r.out;
  for (const char* s : {"weighted RMS", "weighted peak", "reduction", "comfort (passive)"})
    EXPECT_NE(r.out.find(s), std::string::npos) << s;
  for (const char* f : {"bump_report.txt", "bump_metrics.csv", "bump_passive.csv", "bump_active.csv"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_NE(slurp(dir / "bump_report.txt").find("80.87"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, MetricsOfExportedTrace) {
  const auto dir = scratch("metrics");
  ASSERT_EQ(alqsim("-q --out-dir " + dir.string() + " run " + scenario("bump")).code, 0);
  const auto trace = dir / "bump_active.csv";
  ASSERT_TRUE(fs::exists(trace));
  const auto r = alqsim("metrics --in " + trace.string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("weighted RMS:  0.076668"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("comfort:       Not uncomfortable"), std::string::npos);
  EXPECT_EQ(alqsim("metrics --in " + trace.string() + " --col nothing").code, 2);
  fs::remove_all(dir);
}

TEST(Cli, SeedPrecedence) {
  const auto dir = scratch("seed");
  const auto cfg = dir / "noisy.cfg";
  {
    std::ofstream out(cfg);
    out << "vehicle = " << ALQ_DATA_DIR << "/vehicle_default.cfg\nroad = bump\nduration = 0.5\n"
        << "sensor_noise_accel = 0.01\nseed = 4\n";
  }
  auto run = [&](const std::string& flags, const std::string& env, const std::string& tag) {
    const auto out = dir / tag;
    EXPECT_EQ(alqsim("-q --out-dir " + out.string() + " " + flags + " run " + cfg.string(), env).code, 0);
    return slurp(out / "noisy_active.csv");
  };
  const auto file_seed = run("", "", "a");
  const auto env_seed = run("", "RD_SEED=9", "b");
  const auto flag_seed = run("--seed 9", "RD_SEED=4", "c");
  const auto file_again = run("--seed 4", "RD_SEED=9", "d");
  EXPECT_NE(file_seed, env_seed);
  EXPECT_EQ(env_seed, flag_seed);
  EXPECT_EQ(file_seed, file_again);
  fs::remove_all(dir);
}

TEST(Cli, IdentifyPrintsTheta) {
  const auto dir = scratch("identify");
  const auto r = alqsim("--out-dir " + dir.string() + " identify " + scenario("identify"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("linearized"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "identify_identification.csv"));
  fs::remove_all(dir);
}
