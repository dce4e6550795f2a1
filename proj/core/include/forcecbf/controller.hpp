#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "forcecbf/qp.hpp"
#include "forcecbf/se3.hpp"

namespace forcecbf {

/// Per-axis magnitude limits |w_i| <= w_max_i, all entries strictly positive.
struct SafetyLimits {
  Wrench w_max;

  double operator[](int axis) const { return w_max[axis]; }
  bool valid() const;
};

struct ControllerParams {
  double alpha_force = 1.0;
  double alpha_torque = 1.0;
  double lambda = 1.0;
  double slack_weight_k = 1.0;
  Vector6d error_weight = Vector6d::Ones();

  double alpha(int axis) const { return is_torque_axis(axis) ? alpha_torque : alpha_force; }
  bool valid() const;
};

enum class ConstraintLabel { cbf_fx = 0, cbf_fy, cbf_fz, cbf_tx, cbf_ty, cbf_tz, clf, slack_nonneg };

std::string_view to_string(ConstraintLabel label);

inline constexpr int kTwistSlackDim = 7;  // six twist coordinates + slack
inline constexpr int kSlackIndex = 6;

using Vector7d = Eigen::Matrix<double, kTwistSlackDim, 1>;

/// row . (V, gamma) <= bound
struct LinearConstraint {
  Vector7d row = Vector7d::Zero();
  double bound = 0.0;
  ConstraintLabel label = ConstraintLabel::slack_nonneg;
};

struct ControlOutput {
  Twist twist;
  double slack = 0.0;
  std::vector<ConstraintLabel> active_labels;
  qp::QpStatus qp_status = qp::QpStatus::optimal;
  Vector6d per_axis_margin = Vector6d::Zero();
  double kkt_residual = 0.0;
};

/// Barrier value h = (w^2 - w_max^2) / 2. Negative inside the safe set.
double cbf_margin(double w, double w_max);

Vector6d cbf_margins(const Wrench& w, const SafetyLimits& limits);

/// -w v_axis <= -alpha h(w, w_max). The contact stiffness does not appear:
/// any positive per-axis stiffness only rescales the admissible rate.
LinearConstraint cbf_constraint_row(double w, double w_max, double alpha, int axis);

/// (W e) . V - gamma <= -(lambda / 2) e' W e, with W = diag(weight).
LinearConstraint clf_constraint_row(const PoseError& error, double lambda, const Vector6d& weight);

/// -gamma <= 0
LinearConstraint slack_nonneg_row();

/// The controller's quadratic program: six barrier rows, the relaxed
/// Lyapunov row and gamma >= 0, with cost ||V||^2 + k gamma.
struct ControllerQp {
  qp::QProblem problem;
  std::vector<ConstraintLabel> labels;  // parallel to problem.constraints
};

ControllerQp assemble_controller_qp(const PoseError& error, const Wrench& measured_wrench,
                                    const SafetyLimits& limits, const ControllerParams& params);

/// One control tick. `measured_wrench` is the gravity-compensated wrench the
/// environment exerts on the end-effector, base frame. When the QP is not
/// solved to optimality the output twist is zero and qp_status says why.
ControlOutput control_step(const Pose& pose, const Pose& desired, const Wrench& measured_wrench,
                           const SafetyLimits& limits, const ControllerParams& params,
                           qp::WarmStart* warm = nullptr);

/// Holds limits, gains and the solver warm start for one control loop.
/// Not thread-safe; give each loop its own instance.
class CbfClfController {
 public:
  CbfClfController(SafetyLimits limits, ControllerParams params);

  ControlOutput step(const Pose& pose, const Pose& desired, const Wrench& measured_wrench);

  const SafetyLimits& limits() const { return limits_; }
  const ControllerParams& params() const { return params_; }
  void set_limits(const SafetyLimits& limits);
  void reset() { warm_ = {}; }

 private:
  SafetyLimits limits_;
  ControllerParams params_;
  qp::WarmStart warm_;
};

}  // namespace forcecbf
