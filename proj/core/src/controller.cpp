#include "forcecbf/controller.hpp"

#include <cmath>
#include <stdexcept>

namespace forcecbf {

bool SafetyLimits::valid() const {
  const Vector6d w = w_max.vector();
  return w.allFinite() && (w.array() > 0.0).all();
}

bool ControllerParams::valid() const {
  return std::isfinite(alpha_force) && alpha_force > 0.0 && std::isfinite(alpha_torque) &&
         alpha_torque > 0.0 && std::isfinite(lambda) && lambda > 0.0 &&
         std::isfinite(slack_weight_k) && slack_weight_k > 0.0 && error_weight.allFinite() &&
         (error_weight.array() > 0.0).all();
}

std::string_view to_string(ConstraintLabel label) {
  switch (label) {
    case ConstraintLabel::cbf_fx: return "cbf_fx";
    case ConstraintLabel::cbf_fy: return "cbf_fy";
    case ConstraintLabel::cbf_fz: return "cbf_fz";
    case ConstraintLabel::cbf_tx: return "cbf_tx";
    case ConstraintLabel::cbf_ty: return "cbf_ty";
    case ConstraintLabel::cbf_tz: return "cbf_tz";
    case ConstraintLabel::clf: return "clf";
    case ConstraintLabel::slack_nonneg: return "slack_nonneg";
  }
  return "unknown";
}

double cbf_margin(double w, double w_max) { return 0.5 * (w * w - w_max * w_max); }

Vector6d cbf_margins(const Wrench& w, const SafetyLimits& limits) {
  Vector6d h;
  for (int i = 0; i < kNumAxes; ++i) h[i] = cbf_margin(w[i], limits[i]);
  return h;
}

LinearConstraint cbf_constraint_row(double w, double w_max, double alpha, int axis) {
  if (axis < 0 || axis >= kNumAxes) throw std::out_of_range("cbf_constraint_row: axis");
  LinearConstraint c;
  c.row[axis] = -w;
  c.bound = -alpha * cbf_margin(w, w_max);
  c.label = static_cast<ConstraintLabel>(axis);
  return c;
}

LinearConstraint clf_constraint_row(const PoseError& error, double lambda, const Vector6d& weight) {
  const Vector6d e = error.vector();
  const Vector6d we = weight.cwiseProduct(e);
  LinearConstraint c;
  c.row.head<6>() = we;
  c.row[kSlackIndex] = -1.0;
  c.bound = -0.5 * lambda * e.dot(we);
  c.label = ConstraintLabel::clf;
  return c;
}

LinearConstraint slack_nonneg_row() {
  LinearConstraint c;
  c.row[kSlackIndex] = -1.0;
  c.bound = 0.0;
  c.label = ConstraintLabel::slack_nonneg;
  return c;
}

ControllerQp assemble_controller_qp(const PoseError& error, const Wrench& measured_wrench,
                                    const SafetyLimits& limits, const ControllerParams& params) {
  ControllerQp out;
  out.problem = qp::QProblem(kTwistSlackDim);
  out.problem.cost_diagonal[kSlackIndex] = 0.0;
  out.problem.cost_linear[kSlackIndex] = params.slack_weight_k;

  auto push = [&out](const LinearConstraint& c) {
    out.problem.add_constraint(c.row, c.bound);
    out.labels.push_back(c.label);
  };
  for (int i = 0; i < kNumAxes; ++i) {
    push(cbf_constraint_row(measured_wrench[i], limits[i], params.alpha(i), i));
  }
  push(clf_constraint_row(error, params.lambda, params.error_weight));
  push(slack_nonneg_row());
  return out;
}

ControlOutput control_step(const Pose& pose, const Pose& desired, const Wrench& measured_wrench,
                           const SafetyLimits& limits, const ControllerParams& params,
                           qp::WarmStart* warm) {
  ControlOutput out;
  out.per_axis_margin = cbf_margins(measured_wrench, limits);

  const Vector6d w = measured_wrench.vector();
  if (!w.allFinite() || !pose.position.allFinite() || !pose.orientation.coeffs().allFinite()) {
    out.qp_status = qp::QpStatus::infeasible;
    return out;
  }

  const ControllerQp cqp = assemble_controller_qp(pose_error(pose, desired), measured_wrench,
                                                  limits, params);
  const qp::QSolution sol = qp::solve(cqp.problem, warm);
  out.qp_status = sol.status;
  if (sol.status != qp::QpStatus::optimal) {
    // Zero twist never grows a spring-like contact wrench.
    if (warm != nullptr) warm->x.reset();
    return out;
  }
  out.twist = Twist::from_vector(sol.x_star.head<6>());
  out.slack = sol.x_star[kSlackIndex];
  out.kkt_residual = sol.kkt_residual;
  for (const int i : sol.active_set) out.active_labels.push_back(cqp.labels[i]);
  return out;
}

CbfClfController::CbfClfController(SafetyLimits limits, ControllerParams params)
    : limits_(limits), params_(params) {
  if (!limits_.valid()) throw std::invalid_argument("CbfClfController: limits must be > 0");
  if (!params_.valid()) throw std::invalid_argument("CbfClfController: invalid parameters");
}

ControlOutput CbfClfController::step(const Pose& pose, const Pose& desired,
                                     const Wrench& measured_wrench) {
  return control_step(pose, desired, measured_wrench, limits_, params_, &warm_);
}

void CbfClfController::set_limits(const SafetyLimits& limits) {
  if (!limits.valid()) throw std::invalid_argument("CbfClfController: limits must be > 0");
  limits_ = limits;
}

}  // namespace forcecbf
