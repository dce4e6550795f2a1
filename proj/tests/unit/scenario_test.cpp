#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "forcecbf/presets.hpp"
#include "forcecbf/scenario.hpp"

namespace forcecbf {
namespace {

using nlohmann::json;

json bag_doc() { return to_json(presets::bag_test()); }

std::string error_field(const json& doc) {
  try {
    scenario_from_json(doc);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

TEST(Parse, RoundTripIsStable) {
  for (const ScenarioConfig& c : presets::all()) {
    const json doc = to_json(c);
    const ScenarioConfig back = scenario_from_json(doc);
    EXPECT_EQ(to_json(back), doc) << c.name;
  }
}

TEST(Parse, ShippedFilesMatchPresets) {
  const std::filesystem::path dir = FORCECBF_SCENARIO_DIR;
  for (const ScenarioConfig& c : presets::all()) {
    const std::filesystem::path file = dir / (c.name + ".json");
    ASSERT_TRUE(std::filesystem::exists(file)) << file;
    std::ifstream in(file);
    EXPECT_EQ(json::parse(in), to_json(c)) << file;
    EXPECT_EQ(to_json(load_scenario(file)), to_json(c)) << file;
  }
}

TEST(Parse, ErrorsNameTheField) {
  json d = bag_doc();
  d["limits"]["force"][1] = -3.0;
  EXPECT_EQ(error_field(d), "limits.force.1");

  d = bag_doc();
  d["controller"]["params"]["lambda"] = 0.0;
  EXPECT_EQ(error_field(d), "controller.params.lambda");

  d = bag_doc();
  d["contacts"][0]["mass"] = -1.0;
  EXPECT_EQ(error_field(d), "contacts.0.mass");

  d = bag_doc();
  d["contacts"][0]["colour"] = "red";
  EXPECT_EQ(error_field(d), "contacts.0.colour");

  d = bag_doc();
  d.erase("duration");
  EXPECT_EQ(error_field(d), "duration");

  d = bag_doc();
  d["control_rate_hz"] = 2000.0;
  EXPECT_EQ(error_field(d), "control_rate_hz");

  d = bag_doc();
  d["events"][1]["t"] = 5.0;
  EXPECT_EQ(error_field(d), "events.1.t");

  d = bag_doc();
  d["events"][0]["field"] = "colour";
  EXPECT_EQ(error_field(d), "events.0.field");

  d = bag_doc();
  d["initial_pose"]["orientation"] = json::array({0.5, 0.0, 0.0, 0.0});
  EXPECT_EQ(error_field(d), "initial_pose.orientation");

  d = bag_doc();
  d["controller"]["type"] = "pid";
  EXPECT_EQ(error_field(d), "controller.type");

  d = bag_doc();
  d["contacts"][0]["kind"] = "glue";
  EXPECT_EQ(error_field(d), "contacts.0.kind");

  d = bag_doc();
  d["lowpass_alpha"] = 0.0;
  EXPECT_EQ(error_field(d), "lowpass_alpha");

  d = bag_doc();
  d["noise_std"]["force"] = json::array({0.0, 0.0});
  EXPECT_EQ(error_field(d), "noise_std.force");
}

TEST(Parse, RpyOrientation) {
  json d = bag_doc();
  d["initial_pose"].erase("orientation");
  d["initial_pose"]["rpy"] = json::array({0.0, 0.0, 0.5});
  const ScenarioConfig c = scenario_from_json(d);
  EXPECT_NEAR(pose_error(c.initial_pose, c.desired_pose).rotational.z(), 0.5, 1e-12);

  d["initial_pose"]["orientation"] = json::array({1.0, 0.0, 0.0, 0.0});
  EXPECT_EQ(error_field(d), "initial_pose");
}

TEST(Parse, NearUnitQuaternionNormalized) {
  json d = bag_doc();
  d["initial_pose"]["orientation"] = json::array({1.0 + 1e-8, 0.0, 0.0, 0.0});
  const ScenarioConfig c = scenario_from_json(d);
  EXPECT_NEAR(c.initial_pose.orientation.norm(), 1.0, 1e-15);
}

TEST(Parse, MissingFileIsConfigError) {
  EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), ConfigError);
}

TEST(Parse, MalformedJsonIsConfigError) {
  const auto path = std::filesystem::temp_directory_path() / "forcecbf_malformed.json";
  {
    std::ofstream out(path);
    out << "{ \"duration\": ";
  }
  EXPECT_THROW(load_scenario(path), ConfigError);
  std::filesystem::remove(path);
}

TEST(Parse, FileStemBecomesName) {
  const auto path = std::filesystem::temp_directory_path() / "forcecbf_named_run.json";
  json d = bag_doc();
  d.erase("name");
  {
    std::ofstream out(path);
    out << d.dump();
  }
  EXPECT_EQ(load_scenario(path).name, "forcecbf_named_run");
  std::filesystem::remove(path);
}

TEST(Override, SetsExistingKeys) {
  const ScenarioConfig c = with_overrides(
      presets::bag_test(), {{"controller.params.alpha_force", "2"}, {"contacts.0.rope_length", "0.4"}});
  EXPECT_EQ(c.controller.cbf.alpha_force, 2.0);
  EXPECT_EQ(std::get<HangingLoad>(c.contacts[0]).rope_length, 0.4);
}

TEST(Override, ArrayIndexAndStrings) {
  ScenarioConfig c = with_overrides(presets::bag_test(), {{"limits.force.2", "30"}});
  EXPECT_EQ(c.limits.w_max.force.z(), 30.0);
  c = with_overrides(presets::bag_test(), {{"name", "custom"}});
  EXPECT_EQ(c.name, "custom");
  // The cbf params block does not fit an admittance controller.
  EXPECT_THROW(with_overrides(presets::bag_test(), {{"controller.type", "admittance"}}), ConfigError);
}

TEST(Override, UnknownKeyRejected) {
  try {
    with_overrides(presets::bag_test(), {{"controller.params.gain", "1"}});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "controller.params.gain");
  }
}

TEST(Override, InvalidValueRejected) {
  EXPECT_THROW(with_overrides(presets::bag_test(), {{"duration", "-1"}}), ConfigError);
  EXPECT_THROW(with_overrides(presets::bag_test(), {{"duration", "soon"}}), ConfigError);
}

TEST(FindPath, ResolvesObjectsAndArrays) {
  const json d = bag_doc();
  ASSERT_NE(find_path(d, "events.1.value"), nullptr);
  EXPECT_EQ(*find_path(d, "limits.torque.0"), 10.0);
  EXPECT_EQ(find_path(d, "limits.torque.3"), nullptr);
  EXPECT_EQ(find_path(d, "nope"), nullptr);
}

TEST(Presets, BagTestMatchesProtocol) {
  const ScenarioConfig c = presets::bag_test();
  EXPECT_EQ(c.limits.w_max.force, Vector3d::Constant(25.0));
  EXPECT_EQ(c.limits.w_max.torque, Vector3d::Constant(10.0));
  EXPECT_EQ(c.controller.cbf.lambda, 10.0);
  EXPECT_EQ(c.controller.cbf.alpha_force, 1.0);
  EXPECT_EQ(c.controller.cbf.slack_weight_k, 1.0);
  EXPECT_EQ(c.control_rate_hz, 30.0);
  EXPECT_EQ(c.plant_dt, 0.001);
  ASSERT_EQ(c.events.size(), 2u);
  EXPECT_EQ(c.events[0].t, 10.0);
  EXPECT_EQ(c.events[1].t, 17.0);
  EXPECT_NEAR(c.events[0].value * kGravity, 20.0, 1e-9);
  EXPECT_NEAR((c.events[0].value + c.events[1].value) * kGravity, 25.06, 1e-9);
}

TEST(Presets, HumanGuideLimits) {
  const ScenarioConfig c = presets::human_guide();
  EXPECT_EQ(c.limits.w_max.force, Vector3d::Constant(10.0));
  EXPECT_EQ(c.limits.w_max.torque, Vector3d(0.5, 3.0, 3.0));
  EXPECT_EQ(c.controller.cbf.alpha_force, 1.0);
  EXPECT_EQ(c.controller.cbf.alpha_torque, 10.0);
  EXPECT_EQ(c.controller.cbf.lambda, 10.0);
  EXPECT_EQ(c.controller.cbf.slack_weight_k, 1.0);
}

TEST(Presets, AllValidate) {
  for (const ScenarioConfig& c : presets::all()) EXPECT_NO_THROW(validate(c)) << c.name;
}

}  // namespace
}  // namespace forcecbf
