#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gne/scenario.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string output;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() /
                     ("gne_cli_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome sim(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(GNE_SIM_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
}

std::string scenario_file(const std::string& name) {
  return (fs::path(GNE_SCENARIO_DIR) / name).string();
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace

TEST(Cli, RerunIsByteIdentical) {
  const auto a = scratch("rerun_a"), b = scratch("rerun_b");
  const std::string common = "run --scenario paper5 --horizon 0.2 --no-plots --out-dir ";
  ASSERT_EQ(sim(common + a.string(), a / "log").code, 0) << slurp(a / "log");
  ASSERT_EQ(sim(common + b.string(), b / "log").code, 0);
  for (const char* f : {"trajectory.csv", "metrics.csv", "events.csv", "manifest.json"}) {
    EXPECT_FALSE(slurp(a / f).empty()) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(Cli, ReplayReproducesArtifacts) {
  const auto a = scratch("replay_a"), b = scratch("replay_b");
  ASSERT_EQ(sim("run --scenario " + scenario_file("paper5_path.yaml") +
                    " --horizon 0.3 --no-plots --out-dir " + a.string(),
                a / "log")
                .code,
            0)
      << slurp(a / "log");
  ASSERT_EQ(sim("replay --no-plots --manifest " + (a / "manifest.json").string() + " --out-dir " +
                    b.string(),
                b / "log")
                .code,
            0)
      << slurp(b / "log");
  for (const char* f : {"trajectory.csv", "metrics.csv", "events.csv"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(Cli, ZeroHorizonWritesHeaderOnlyMetrics) {
  const auto dir = scratch("zero");
  const auto r = sim("run --scenario paper5 --horizon 0 --out-dir " + dir.string(), dir / "log");
  EXPECT_EQ(r.code, 0) << r.output;
  const std::string metrics = slurp(dir / "metrics.csv");
  EXPECT_EQ(count_lines(metrics), 1) << metrics;
  EXPECT_EQ(metrics.rfind("t,", 0), 0u) << metrics;
  EXPECT_EQ(count_lines(slurp(dir / "trajectory.csv")), 2);
}

TEST(Cli, EventModeLogsBroadcasts) {
  const auto dir = scratch("event");
  const auto r = sim("run --scenario paper5 --mode event --out-dir " + dir.string(),
                     dir / "log");
  ASSERT_EQ(r.code, 0) << r.output;
  const std::string events = slurp(dir / "events.csv");
  std::istringstream in(events);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "player,time");
  int rows = 0;
  while (std::getline(in, line)) {
    const int player = std::stoi(line.substr(0, line.find(',')));
    EXPECT_GE(player, 1);
    EXPECT_LE(player, 5);
    ++rows;
  }
  EXPECT_GT(rows, 0);
  EXPECT_TRUE(fs::exists(dir / "events.svg"));
  EXPECT_TRUE(fs::exists(dir / "regret.svg"));
  EXPECT_NE(r.output.find("events per player"), std::string::npos) << r.output;
}

TEST(Cli, CompareReportsSaving) {
  const auto dir = scratch("compare");
  const auto r = sim("compare --scenario paper5 --horizon 0.3 --out-dir " + dir.string(),
                     dir / "log");
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("saving ratio"), std::string::npos) << r.output;
}

TEST(Cli, BadScenarioExitsWithError) {
  const auto dir = scratch("bad");
  std::ofstream(dir / "bad.yaml") << "players: 2\naction_dim: 1\ngame:\n  - cost: \"x1 +\"\n";
  const auto r = sim("run --scenario " + (dir / "bad.yaml").string() + " --out-dir " +
                         dir.string(),
                     dir / "log");
  EXPECT_EQ(r.code, 2) << r.output;
  EXPECT_EQ(sim("run --scenario /nonexistent.yaml", dir / "log2").code, 2);
  EXPECT_NE(sim("frobnicate", dir / "log3").code, 0);
}

TEST(Cli, ExportExpandRoundTrips) {
  const auto dir = scratch("export");
  const auto r = sim("export --scenario paper5 --expand", dir / "out.yaml");
  ASSERT_EQ(r.code, 0) << r.output;
  const auto expanded = gne::load_scenario((dir / "out.yaml").string());
  EXPECT_TRUE(expanded.builtin.empty());
  EXPECT_EQ(expanded.n_players, 5);
  EXPECT_EQ(expanded.initial_actions(), gne::load_scenario("paper5").initial_actions());
}

TEST(Cli, CheckPrintsDiagnostics) {
  const auto dir = scratch("check");
  const auto r = sim("check --scenario " + scenario_file("two_player.yaml") + " --samples 50",
                     dir / "log");
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("gradient check"), std::string::npos);
  EXPECT_NE(r.output.find("reference point"), std::string::npos);
}

TEST(Cli, SampleScenariosLoad) {
  for (const auto& entry : fs::directory_iterator(GNE_SCENARIO_DIR)) {
    if (entry.path().extension() != ".yaml") continue;
    EXPECT_NO_THROW(gne::load_scenario(entry.path().string())) << entry.path();
  }
}
