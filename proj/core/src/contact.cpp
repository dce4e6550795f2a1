#include "forcecbf/contact.hpp"

#include <algorithm>
#include <type_traits>

namespace forcecbf {
namespace {

Wrench stiffness_times_error(const Vector6d& k, const PoseError& e) {
  return Wrench::from_vector(-k.cwiseProduct(e.vector()));
}

}  // namespace

Pose HumanGuide::intent_at(double t) const {
  if (intent_trajectory.empty()) return Pose{};
  if (t <= intent_trajectory.front().t) return intent_trajectory.front().pose;
  if (t >= intent_trajectory.back().t) return intent_trajectory.back().pose;
  const auto next = std::upper_bound(intent_trajectory.begin(), intent_trajectory.end(), t,
                                     [](double tv, const GuideWaypoint& w) { return tv < w.t; });
  const auto prev = next - 1;
  const double span = next->t - prev->t;
  const double s = span > 0.0 ? (t - prev->t) / span : 1.0;
  Pose out;
  out.position = (1.0 - s) * prev->pose.position + s * next->pose.position;
  out.orientation = prev->pose.orientation.slerp(s, next->pose.orientation).normalized();
  return out;
}

Wrench spring_wrench(const SpringContact& model, const Pose& pose) {
  return stiffness_times_error(model.stiffness, pose_error(pose, model.anchor));
}

Wrench hanging_wrench(const HangingLoad& model, const Pose& pose) {
  const double weight = model.mass * kGravity;
  const Vector3d arm = pose.orientation * model.rope_attach_offset;
  const double load_z = pose.position.z() + arm.z() - model.rope_length;
  const double ground_share =
      std::clamp(model.ground_stiffness * std::max(0.0, model.ground_height - load_z), 0.0, weight);
  Wrench w;
  w.force = Vector3d(0.0, 0.0, -(weight - ground_share));
  w.torque = arm.cross(w.force);
  return w;
}

Wrench human_guide_wrench(const HumanGuide& model, const Pose& pose, double t) {
  return stiffness_times_error(model.grip_stiffness, pose_error(pose, model.intent_at(t)));
}

Wrench interactive_hand_wrench(const InteractiveHand& model, const Pose& pose) {
  return stiffness_times_error(model.hand_stiffness, pose_error(pose, model.rest));
}

Wrench contact_wrench(const ContactModel& model, const Pose& pose, double t) {
  return std::visit(
      [&](const auto& m) -> Wrench {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SpringContact>) {
          return spring_wrench(m, pose);
        } else if constexpr (std::is_same_v<T, HangingLoad>) {
          return hanging_wrench(m, pose);
        } else if constexpr (std::is_same_v<T, HumanGuide>) {
          return human_guide_wrench(m, pose, t);
        } else {
          return interactive_hand_wrench(m, pose);
        }
      },
      model);
}

Wrench clamp_to_envelope(const Wrench& w, const Wrench& envelope) {
  const Vector6d lim = envelope.vector().cwiseAbs();
  return Wrench::from_vector(w.vector().cwiseMax(-lim).cwiseMin(lim));
}

}  // namespace forcecbf
