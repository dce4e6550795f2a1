#include "forcecbf/admittance.hpp"

namespace forcecbf {

bool AdmittanceParams::valid() const {
  return stiffness.allFinite() && damping.allFinite() && (stiffness.array() >= 0.0).all() &&
         (damping.array() > 0.0).all();
}

Twist admittance_step(const Pose& pose, const Pose& desired, const Wrench& measured_wrench,
                      const AdmittanceParams& params) {
  const Vector6d e = pose_error(pose, desired).vector();
  const Vector6d v =
      (measured_wrench.vector() - params.stiffness.cwiseProduct(e)).cwiseQuotient(params.damping);
  return Twist::from_vector(v);
}

double admittance_loop_gain(double stiffness, double env_stiffness, double damping, double dt) {
  return dt * (stiffness + env_stiffness) / damping;
}

bool admittance_discrete_stable(double stiffness, double env_stiffness, double damping, double dt) {
  const double g = admittance_loop_gain(stiffness, env_stiffness, damping, dt);
  return g > 0.0 && g < 2.0;
}

}  // namespace forcecbf
