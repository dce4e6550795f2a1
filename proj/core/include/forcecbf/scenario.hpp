#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "forcecbf/admittance.hpp"
#include "forcecbf/contact.hpp"
#include "forcecbf/controller.hpp"

namespace forcecbf {

/// Raised for malformed or invalid scenario documents. `field` is the dotted
/// path of the offending entry (e.g. "contacts.0.mass").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class ControllerKind { cbf, admittance };

struct ControllerConfig {
  ControllerKind kind = ControllerKind::cbf;
  ControllerParams cbf;
  AdmittanceParams admittance;
};

/// Step (ramp == 0) or linear-ramp change of one numeric contact field.
struct ScenarioEvent {
  enum class Op { set, add };

  double t = 0.0;
  int contact = 0;
  std::string field;  // dotted path inside the contact document, e.g. "mass" or "stiffness.2"
  Op op = Op::set;
  double value = 0.0;
  double ramp = 0.0;  // seconds
};

struct ScenarioConfig {
  std::string name = "scenario";
  Pose initial_pose;
  Pose desired_pose;
  ControllerConfig controller;
  SafetyLimits limits;
  std::vector<ContactModel> contacts;
  std::vector<ScenarioEvent> events;  // sorted by t
  Wrench tool_wrench;                 // gravitational wrench of the tool, always present
  double control_rate_hz = 30.0;
  double plant_dt = 0.001;
  double duration = 10.0;
  Wrench noise_std;                   // per-axis Gaussian sensor noise
  double lowpass_alpha = 1.0;         // 1 disables the first-order filter
  std::uint64_t rng_seed = 0;
};

/// Throws ConfigError naming the first invalid field.
void validate(const ScenarioConfig& config);

nlohmann::json to_json(const Pose& pose);
nlohmann::json to_json(const Wrench& wrench);
nlohmann::json to_json(const ContactModel& contact);
nlohmann::json to_json(const ScenarioConfig& config);

Pose pose_from_json(const nlohmann::json& j, const std::string& path);
Wrench wrench_from_json(const nlohmann::json& j, const std::string& path);
ContactModel contact_from_json(const nlohmann::json& j, const std::string& path,
                               const Pose& default_rest);

/// Parses and validates. Unknown keys are rejected.
ScenarioConfig scenario_from_json(const nlohmann::json& j);

/// Reads a scenario document; the file stem becomes the name when the
/// document does not carry one.
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Sets `dotted_key` (e.g. "controller.params.alpha_force" or
/// "contacts.0.mass") to `value`, parsed as JSON when possible and as a
/// string otherwise. The key must already exist in `doc`.
void apply_override(nlohmann::json& doc, const std::string& dotted_key, const std::string& value);

/// Canonical document for `config` with each override applied, re-parsed.
ScenarioConfig with_overrides(const ScenarioConfig& config,
                              const std::vector<std::pair<std::string, std::string>>& overrides);

/// Resolves a dotted path inside `doc`; nullptr when absent.
const nlohmann::json* find_path(const nlohmann::json& doc, const std::string& dotted_key);
nlohmann::json* find_path(nlohmann::json& doc, const std::string& dotted_key);

}  // namespace forcecbf
