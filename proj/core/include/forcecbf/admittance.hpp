#pragma once

#include "forcecbf/se3.hpp"

namespace forcecbf {

/// First-order admittance (spring-damper, no virtual mass).
struct AdmittanceParams {
  Vector6d stiffness = Vector6d::Zero();  // K_s >= 0
  Vector6d damping = (Vector6d() << 100, 100, 100, 10, 10, 10).finished();  // D > 0

  bool valid() const;
};

/// Per axis v = (w - K_s e) / D, i.e. renders D v + K_s e = w about `desired`.
Twist admittance_step(const Pose& pose, const Pose& desired, const Wrench& measured_wrench,
                      const AdmittanceParams& params);

/// Closed loop of the admittance law against a spring environment of
/// stiffness `env_stiffness` on one axis, sampled with zero-order hold at
/// period `dt`: e[n+1] = (1 - dt (K_s + k_env) / D) e[n] + const.
/// Stable iff the loop gain dt (K_s + k_env) / D lies in (0, 2).
double admittance_loop_gain(double stiffness, double env_stiffness, double damping, double dt);
bool admittance_discrete_stable(double stiffness, double env_stiffness, double damping, double dt);

}  // namespace forcecbf
