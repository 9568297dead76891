#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "riskest/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(RISKEST_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  while (fgets(buf, sizeof buf, p)) r.out += buf;
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("riskest_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string d(const std::string& sub = "") const { return (dir / sub).string(); }
  fs::path dir;
};

fs::path only_file(const fs::path& dir, const std::string& prefix) {
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().filename().string().starts_with(prefix)) return e.path();
  return {};
}

}  // namespace

TEST_F(Cli, BuildProblemReportsCondition) {
  const auto r = run("build-problem --m 16 --l 0.02 --out-dir " + d("p"));
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("1.27"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(dir / "p" / "manifest.json"));
  EXPECT_FALSE(only_file(dir / "p", "problem_").empty());
  EXPECT_FALSE(only_file(dir / "p", "decomposition_").empty());
}

TEST_F(Cli, MissingRequiredFlagFails) {
  const auto r = run("build-problem --l 0.06");
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.out.find("--m"), std::string::npos) << r.out;
}

TEST_F(Cli, UnknownSubcommandFails) { EXPECT_NE(run("frobnicate").status, 0); }

TEST_F(Cli, RebuildIsByteIdentical) {
  ASSERT_EQ(run("build-problem --m 16 --l 0.06 --out-dir " + d("a")).status, 0);
  ASSERT_EQ(run("build-problem --m 16 --l 0.06 --out-dir " + d("b")).status, 0);
  EXPECT_EQ(riskest::file_hash(only_file(dir / "a", "problem_").string()),
            riskest::file_hash(only_file(dir / "b", "problem_").string()));
  EXPECT_EQ(riskest::file_hash(only_file(dir / "a", "decomposition_").string()),
            riskest::file_hash(only_file(dir / "b", "decomposition_").string()));
}

TEST_F(Cli, RunStudySmallIsFastAndComplete) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run("run-study --m 64 --l 0.06 --draws 10 --rules oracle,dp,psure,sure --out-dir " + d("s"));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_LT(secs, 5.0);
  const std::string csv = slurp(dir / "s" / "records.csv");
  const std::string header = csv.substr(0, csv.find('\n'));
  for (const char* rule : {"oracle_alpha", "dp_alpha", "psure_alpha", "sure_alpha"})
    EXPECT_NE(header.find(rule), std::string::npos) << rule;
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 11);
  const auto j = nlohmann::json::parse(slurp(dir / "s" / "summary.json"));
  EXPECT_EQ(j.at("n_draws").get<int>(), 10);
}

TEST_F(Cli, ManifestRerunReproducesRecords) {
  ASSERT_EQ(run("run-study --m 32 --l 0.04 --draws 6 --seed 77 --out-dir " + d("r1")).status, 0);
  const auto r = run("run-study --config " + d("r1/manifest.json") + " --out-dir " + d("r2"));
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_EQ(slurp(dir / "r1" / "records.csv"), slurp(dir / "r2" / "records.csv"));
}

TEST_F(Cli, ConfigFilePrecedence) {
  std::ofstream(dir / "cfg.txt") << "m = 16\nl = 0.06\ndraws = 5\nrules = \"dp,psure\"\n";
  const auto r = run("run-study --config " + d("cfg.txt") + " --draws 3 --out-dir " + d("c"));
  ASSERT_EQ(r.status, 0) << r.out;
  const std::string csv = slurp(dir / "c" / "records.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_EQ(csv.find("oracle_alpha"), std::string::npos);
}

TEST_F(Cli, BadConfigKeyFails) {
  std::ofstream(dir / "bad.txt") << "bogus_key = 1\n";
  EXPECT_NE(run("run-study --m 16 --l 0.06 --config " + d("bad.txt")).status, 0);
}

TEST_F(Cli, GridDemoExportsShareDataHash) {
  const auto r = run("grid-demo --mode quadratic --m 64 --l 0.06 --draw 2 --out-dir " + d("g"));
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_TRUE(fs::exists(dir / "g" / "draw2_linear.csv"));
  EXPECT_TRUE(fs::exists(dir / "g" / "draw2_log.csv"));
  ASSERT_EQ(run("grid-demo --mode quadratic --m 64 --l 0.06 --sweep 3 --out-dir " + d("h")).status, 0);
  const auto j = nlohmann::json::parse(slurp(dir / "g" / "grid_demo.json"));
  const auto k = nlohmann::json::parse(slurp(dir / "h" / "grid_demo.json"));
  EXPECT_EQ(j.at("draws").at(0).at("data_hash"), k.at("draws").at(2).at("data_hash"));
  EXPECT_NE(k.at("draws").at(1).at("data_hash"), k.at("draws").at(2).at("data_hash"));
  EXPECT_EQ(slurp(dir / "g" / "draw2_log.csv"), slurp(dir / "h" / "draw2_log.csv"));
}

TEST_F(Cli, StatsOnRecords) {
  ASSERT_EQ(run("run-study --m 16 --l 0.06 --draws 5 --out-dir " + d("s")).status, 0);
  const auto r = run("stats " + d("s/records.csv") + " --json " + d("stats.json"));
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("psure"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "stats.json"));
}
