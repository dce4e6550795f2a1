#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli.hpp"

namespace forcecbf {
namespace {

namespace fs = std::filesystem;

const fs::path kScenarios = FORCECBF_SCENARIO_DIR;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("forcecbf_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int call(std::vector<std::string> args) {
    args.insert(args.begin(), "forcecbf");
    out_.str("");
    err_.str("");
    return cli::main(args, out_, err_);
  }

  std::string read(const fs::path& p) const {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  std::string scenario(const std::string& name) const { return (kScenarios / (name + ".json")).string(); }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(Cli, RunWritesTraceAndSummary) {
  EXPECT_EQ(call({"run", scenario("no_contact"), "--out", dir_.string()}), cli::kOk) << err_.str();
  EXPECT_TRUE(fs::exists(dir_ / "no_contact.trace.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "no_contact.summary.json"));
  EXPECT_FALSE(fs::exists(dir_ / "no_contact.raw.csv"));
}

TEST_F(Cli, OverrideReflectedInSummary) {
  ASSERT_EQ(call({"run", scenario("no_contact"), "--out", dir_.string(), "--set",
                  "controller.params.alpha_force=2"}),
            cli::kOk);
  const auto doc = nlohmann::json::parse(read(dir_ / "no_contact.summary.json"));
  EXPECT_EQ(doc["config"]["controller"]["params"]["alpha_force"], 2.0);
}

TEST_F(Cli, SeedOverride) {
  ASSERT_EQ(call({"run", scenario("no_contact"), "--out", dir_.string(), "--seed", "42"}), cli::kOk);
  const auto doc = nlohmann::json::parse(read(dir_ / "no_contact.summary.json"));
  EXPECT_EQ(doc["config"]["rng_seed"], 42);
}

TEST_F(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(call({"run", (dir_ / "missing.json").string(), "--out", dir_.string()}), cli::kConfigError);
  EXPECT_EQ(call({"run", scenario("no_contact"), "--out", dir_.string(), "--set", "nope=1"}),
            cli::kConfigError);
  EXPECT_NE(err_.str().find("nope"), std::string::npos);
  EXPECT_EQ(call({"run", scenario("no_contact"), "--out", dir_.string(), "--set", "duration=-1"}),
            cli::kConfigError);
  EXPECT_EQ(call({"run", scenario("no_contact"), "--set", "duration"}), cli::kConfigError);
  EXPECT_EQ(call({"run"}), cli::kConfigError);
  EXPECT_EQ(call({"bogus"}), cli::kConfigError);
}

TEST_F(Cli, HelpExitsZero) { EXPECT_EQ(call({"--help"}), cli::kOk); }

TEST_F(Cli, VerboseLevels) {
  ASSERT_EQ(call({"run", scenario("no_contact"), "--out", dir_.string(), "-v", "2"}), cli::kOk);
  EXPECT_TRUE(fs::exists(dir_ / "no_contact.raw.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "no_contact.plant.csv"));
}

TEST_F(Cli, OutputsByteIdentical) {
  const fs::path a = dir_ / "a", b = dir_ / "b";
  ASSERT_EQ(call({"run", scenario("bag_test"), "--out", a.string(), "--set", "noise_std.force.2=0.5"}),
            cli::kOk);
  ASSERT_EQ(call({"run", scenario("bag_test"), "--out", b.string(), "--set", "noise_std.force.2=0.5"}),
            cli::kOk);
  for (const char* f : {"bag_test.trace.csv", "bag_test.summary.json"}) {
    EXPECT_EQ(read(a / f), read(b / f)) << f;
  }
}

TEST_F(Cli, SweepWritesCellsAndTable) {
  ASSERT_EQ(call({"sweep", scenario("no_contact"), "--out", dir_.string(), "--grid",
                  "controller.params.lambda=1,10", "--grid", "controller.params.slack_weight_k=0.5,1",
                  "-j", "2"}),
            cli::kOk)
      << err_.str();
  std::istringstream table(read(dir_ / "no_contact.sweep.csv"));
  std::string line;
  int rows = 0;
  while (std::getline(table, line)) ++rows;
  EXPECT_EQ(rows, 5);
  for (int i = 0; i < 4; ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "no_contact.cell%03d.trace.csv", i);
    EXPECT_TRUE(fs::exists(dir_ / name)) << name;
  }
}

TEST_F(Cli, SweepBadKeyIsConfigError) {
  EXPECT_EQ(call({"sweep", scenario("no_contact"), "--out", dir_.string(), "--grid", "nope=1,2"}),
            cli::kConfigError);
}

TEST_F(Cli, ValidateShippedScenario) {
  EXPECT_EQ(call({"validate", "--scenarios-only", "--scenario", scenario("bag_test")}), cli::kOk);
  EXPECT_NE(out_.str().find("PASS"), std::string::npos);
}

TEST_F(Cli, ValidateReportsAdversarialWithoutCrashing) {
  EXPECT_EQ(call({"validate", "--scenarios-only", "--json", "--scenario", scenario("adversarial_low_limit")}),
            cli::kValidationFailed);
  const auto doc = nlohmann::json::parse(out_.str());
  EXPECT_FALSE(doc["passed"].get<bool>());
  ASSERT_EQ(doc["results"].size(), 1u);
}

TEST_F(Cli, ValidateMissingScenario) {
  EXPECT_EQ(call({"validate", "--scenarios-only", "--scenario", (dir_ / "x.json").string()}),
            cli::kConfigError);
}

}  // namespace
}  // namespace forcecbf
