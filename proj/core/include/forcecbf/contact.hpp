#pragma once

#include <variant>
#include <vector>

#include "forcecbf/se3.hpp"

namespace forcecbf {

inline constexpr double kGravity = 9.81;

/// Diagonal linear stiffness about an anchor pose: w = -K (p - p0).
struct SpringContact {
  Pose anchor;
  Vector6d stiffness = Vector6d::Zero();  // N/m, N m/rad; entries >= 0
};

/// A mass hanging from the gripper on a rope. When the load reaches the
/// ground a stiff ground spring takes over part of its weight.
struct HangingLoad {
  double mass = 0.0;                             // kg
  Vector3d rope_attach_offset = Vector3d::Zero(); // gripper frame, m
  double rope_length = 0.0;                      // m, gripper attach point to load
  double ground_height = 0.0;                    // z of the load resting on the ground, m
  double ground_stiffness = 10000.0;             // N/m
};

struct GuideWaypoint {
  double t = 0.0;
  Pose pose;
};

/// Simulated human partner: pulls the shared object toward a moving intent
/// pose through a diagonal grip stiffness.
struct HumanGuide {
  std::vector<GuideWaypoint> intent_trajectory;  // sorted by t
  Vector6d grip_stiffness = Vector6d::Zero();

  /// Intent pose at time t; clamped to the first/last waypoint.
  Pose intent_at(double t) const;
};

/// Compliant hand for interactive sessions. The commanded human wrench is
/// supplied separately by the session and added on top of this term, so the
/// sensed wrench is cmd - K (p - rest).
struct InteractiveHand {
  Pose rest;
  Vector6d hand_stiffness = Vector6d::Zero();
  Wrench envelope;  // per-axis magnitude clamp applied to client commands
};

using ContactModel = std::variant<SpringContact, HangingLoad, HumanGuide, InteractiveHand>;

Wrench spring_wrench(const SpringContact& model, const Pose& pose);
Wrench hanging_wrench(const HangingLoad& model, const Pose& pose);
Wrench human_guide_wrench(const HumanGuide& model, const Pose& pose, double t);
Wrench interactive_hand_wrench(const InteractiveHand& model, const Pose& pose);

/// Wrench exerted on the end-effector by one contact model at time t.
Wrench contact_wrench(const ContactModel& model, const Pose& pose, double t);

/// Clamps each component of `w` to [-envelope_i, envelope_i].
Wrench clamp_to_envelope(const Wrench& w, const Wrench& envelope);

}  // namespace forcecbf
