#include "forcecbf/se3.hpp"

#include <cmath>

namespace forcecbf {

Pose make_pose(const Vector3d& position, const Quaterniond& orientation) {
  Pose p;
  p.position = position;
  p.orientation = orientation.normalized();
  return p;
}

Pose pose_from_rpy(const Vector3d& position, double roll, double pitch, double yaw) {
  const Quaterniond q = Eigen::AngleAxisd(yaw, Vector3d::UnitZ()) *
                        Eigen::AngleAxisd(pitch, Vector3d::UnitY()) *
                        Eigen::AngleAxisd(roll, Vector3d::UnitX());
  return make_pose(position, q);
}

bool approx_equal(const Pose& a, const Pose& b, double tol) {
  if ((a.position - b.position).lpNorm<Eigen::Infinity>() > tol) return false;
  const Quaterniond rel = a.orientation.conjugate() * b.orientation;
  return 2.0 * std::atan2(rel.vec().norm(), std::abs(rel.w())) <= tol;
}

Vector6d Twist::vector() const {
  Vector6d v;
  v << linear, angular;
  return v;
}

Twist Twist::from_vector(const Vector6d& v) { return {v.head<3>(), v.tail<3>()}; }

Vector6d Wrench::vector() const {
  Vector6d w;
  w << force, torque;
  return w;
}

Wrench Wrench::from_vector(const Vector6d& w) { return {w.head<3>(), w.tail<3>()}; }

Vector6d PoseError::vector() const {
  Vector6d e;
  e << translational, rotational;
  return e;
}

Vector3d quaternion_log(const Quaterniond& q_in) {
  Quaterniond q = q_in;
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Vector3d v = q.vec();
  const double s = v.norm();
  if (s < 1e-12) {
    // angle / s -> 2 / w as s -> 0
    return (2.0 / q.w()) * v;
  }
  const double angle = 2.0 * std::atan2(s, q.w());
  return (angle / s) * v;
}

Quaterniond quaternion_exp(const Vector3d& rv) {
  const double theta = rv.norm();
  double k;
  if (theta < 1e-8) {
    k = 0.5 - theta * theta / 48.0;
  } else {
    k = std::sin(0.5 * theta) / theta;
  }
  Quaterniond q(std::cos(0.5 * theta), k * rv.x(), k * rv.y(), k * rv.z());
  q.normalize();
  return q;
}

PoseError pose_error(const Pose& current, const Pose& desired) {
  PoseError e;
  e.translational = current.position - desired.position;
  e.rotational = quaternion_log(current.orientation * desired.orientation.conjugate());
  return e;
}

Pose integrate_pose(const Pose& pose, const Twist& twist, double dt) {
  Pose out;
  out.position = pose.position + twist.linear * dt;
  out.orientation = quaternion_exp(twist.angular * dt) * pose.orientation;
  out.orientation.normalize();
  return out;
}

}  // namespace forcecbf
