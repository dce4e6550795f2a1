#include "forcecbf/presets.hpp"

namespace forcecbf::presets {
namespace {

Pose bag_pose() { return make_pose(Vector3d(0.6, 0.0, 1.0), Quaterniond::Identity()); }

ControllerConfig cbf(double alpha_force, double alpha_torque, double lambda, double k) {
  ControllerConfig c;
  c.kind = ControllerKind::cbf;
  c.cbf.alpha_force = alpha_force;
  c.cbf.alpha_torque = alpha_torque;
  c.cbf.lambda = lambda;
  c.cbf.slack_weight_k = k;
  return c;
}

SafetyLimits limits(double fx, double fy, double fz, double tx, double ty, double tz) {
  SafetyLimits l;
  l.w_max = Wrench{Vector3d(fx, fy, fz), Vector3d(tx, ty, tz)};
  return l;
}

Pose offset(const Pose& base, const Vector3d& dp, double roll = 0.0, double yaw = 0.0) {
  const Quaterniond r = quaternion_exp(Vector3d(roll, 0.0, 0.0)) * quaternion_exp(Vector3d(0.0, 0.0, yaw));
  return make_pose(base.position + dp, r * base.orientation);
}

}  // namespace

double mass_for_weight(double newtons) { return newtons / kGravity; }

ScenarioConfig bag_test() {
  ScenarioConfig c;
  c.name = "bag_test";
  c.initial_pose = bag_pose();
  c.desired_pose = bag_pose();
  c.controller = cbf(1.0, 1.0, 10.0, 1.0);
  c.limits = limits(25, 25, 25, 10, 10, 10);
  HangingLoad bag;
  bag.mass = 0.0;
  bag.rope_length = 0.3;
  bag.ground_height = 0.15;
  bag.ground_stiffness = 10000.0;
  c.contacts.push_back(bag);
  c.events.push_back({10.0, 0, "mass", ScenarioEvent::Op::set, 2.0387359836901, 0.0});
  c.events.push_back({17.0, 0, "mass", ScenarioEvent::Op::add, 0.5158002038736, 0.0});
  c.tool_wrench.force = Vector3d(0.0, 0.0, -7.0);
  c.control_rate_hz = 30.0;
  c.plant_dt = 0.001;
  c.duration = 30.0;
  return c;
}

ScenarioConfig stiffness_comparison() {
  ScenarioConfig c = bag_test();
  c.name = "stiffness_comparison";
  c.controller.kind = ControllerKind::admittance;
  c.controller.admittance.stiffness = (Vector6d() << 40, 40, 40, 10, 10, 10).finished();
  c.controller.admittance.damping = (Vector6d() << 100, 100, 100, 10, 10, 10).finished();
  return c;
}

ScenarioConfig human_guide() {
  ScenarioConfig c;
  c.name = "human_guide";
  const Pose home = make_pose(Vector3d(0.5, 0.0, 0.8), Quaterniond::Identity());
  c.initial_pose = home;
  c.desired_pose = home;
  c.controller = cbf(1.0, 10.0, 10.0, 1.0);
  c.limits = limits(10, 10, 10, 0.5, 3, 3);
  HumanGuide guide;
  guide.grip_stiffness = (Vector6d() << 50, 50, 50, 5, 5, 5).finished();
  guide.intent_trajectory = {
      {0.0, home},
      {2.0, home},
      {6.0, offset(home, Vector3d(0.3, 0.0, 0.0))},
      {9.0, home},
      {11.0, offset(home, Vector3d(0.0, 0.25, 0.0))},
      {15.0, offset(home, Vector3d(0.0, -0.25, 0.0))},
      {17.0, home},
      {22.0, offset(home, Vector3d::Zero(), 0.0, 1.0)},
      {25.0, home},
      {29.0, offset(home, Vector3d::Zero(), 0.3, 0.0)},
      {33.0, home},
  };
  c.contacts.push_back(guide);
  c.tool_wrench.force = Vector3d(0.0, 0.0, -15.0);
  c.duration = 42.0;
  return c;
}

ScenarioConfig no_contact() {
  ScenarioConfig c;
  c.name = "no_contact";
  const Pose home = make_pose(Vector3d(0.5, 0.0, 0.8), Quaterniond::Identity());
  c.initial_pose = offset(home, Vector3d(0.1, 0.0, 0.0));
  c.desired_pose = home;
  c.controller = cbf(1.0, 1.0, 10.0, 1.0);
  c.limits = limits(25, 25, 25, 10, 10, 10);
  c.duration = 15.0;
  return c;
}

ScenarioConfig interactive() {
  ScenarioConfig c;
  c.name = "interactive";
  const Pose home = make_pose(Vector3d(0.5, 0.0, 0.8), Quaterniond::Identity());
  c.initial_pose = home;
  c.desired_pose = home;
  c.controller = cbf(1.0, 1.0, 10.0, 1.0);
  c.limits = limits(10, 10, 10, 3, 3, 3);
  InteractiveHand hand;
  hand.rest = home;
  hand.hand_stiffness = (Vector6d() << 50, 50, 50, 5, 5, 5).finished();
  hand.envelope = Wrench{Vector3d::Constant(30.0), Vector3d::Constant(5.0)};
  c.contacts.push_back(hand);
  c.duration = 60.0;
  return c;
}

ScenarioConfig adversarial_low_limit() {
  ScenarioConfig c = bag_test();
  c.name = "adversarial_low_limit";
  c.limits = limits(15, 15, 15, 10, 10, 10);
  c.events.pop_back();
  c.duration = 20.0;
  return c;
}

std::vector<ScenarioConfig> all() {
  return {bag_test(), stiffness_comparison(), human_guide(), no_contact(), interactive(),
          adversarial_low_limit()};
}

}  // namespace forcecbf::presets
