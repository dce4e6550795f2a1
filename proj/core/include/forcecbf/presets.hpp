#pragma once

#include <string>
#include <vector>

#include "forcecbf/scenario.hpp"

namespace forcecbf::presets {

/// Hanging-bag experiment: 20 N load at 10 s, raised just above the 25 N
/// limit at 17 s, ground 0.55 m below the gripper's load.
ScenarioConfig bag_test();

/// bag_test driven by the admittance baseline (K_s = 40 N/m).
ScenarioConfig stiffness_comparison();

/// Scripted human partner pushing, pulling and twisting a shared object
/// under tight force and torque limits, then resting at the start pose.
ScenarioConfig human_guide();

/// Free motion from a 0.1 m offset.
ScenarioConfig no_contact();

/// Template for `serve`: a compliant hand at the desired pose.
ScenarioConfig interactive();

/// Limits below the static load the robot is holding.
ScenarioConfig adversarial_low_limit();

/// Every preset, in a fixed order; names match the shipped scenario files.
std::vector<ScenarioConfig> all();

/// Weight of the load that produces `newtons` at standard gravity.
double mass_for_weight(double newtons);

}  // namespace forcecbf::presets
