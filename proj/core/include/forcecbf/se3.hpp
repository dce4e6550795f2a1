#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace forcecbf {

using Vector3d = Eigen::Vector3d;
using Vector6d = Eigen::Matrix<double, 6, 1>;
using Quaterniond = Eigen::Quaterniond;

/// Axis index into the six-component wrench / twist / error vectors.
/// Order is fixed: three linear components followed by three angular ones.
enum class Axis : int { fx = 0, fy, fz, tx, ty, tz };

inline constexpr int kNumAxes = 6;

inline constexpr bool is_torque_axis(int axis) { return axis >= 3; }

/// Gripper pose in the base frame. The orientation is kept unit-norm by
/// every operation in this library; construct through make_pose() when the
/// input quaternion may not be normalized.
struct Pose {
  Vector3d position = Vector3d::Zero();
  Quaterniond orientation = Quaterniond::Identity();
};

Pose make_pose(const Vector3d& position, const Quaterniond& orientation);

/// Pose from position and roll/pitch/yaw (intrinsic z-y-x, i.e. R = Rz*Ry*Rx).
Pose pose_from_rpy(const Vector3d& position, double roll, double pitch, double yaw);

/// True when positions agree within `tol` and orientations agree up to sign.
bool approx_equal(const Pose& a, const Pose& b, double tol = 1e-9);

/// Spatial velocity, base frame: (vx, vy, vz, wx, wy, wz).
struct Twist {
  Vector3d linear = Vector3d::Zero();
  Vector3d angular = Vector3d::Zero();

  Vector6d vector() const;
  static Twist from_vector(const Vector6d& v);
};

/// Force/torque at the end-effector, base frame: (fx, fy, fz, tx, ty, tz).
struct Wrench {
  Vector3d force = Vector3d::Zero();
  Vector3d torque = Vector3d::Zero();

  Vector6d vector() const;
  static Wrench from_vector(const Vector6d& w);

  Wrench operator+(const Wrench& o) const { return {force + o.force, torque + o.torque}; }
  Wrench operator-(const Wrench& o) const { return {force - o.force, torque - o.torque}; }
  double operator[](int axis) const { return axis < 3 ? force[axis] : torque[axis - 3]; }
};

/// Six-dimensional pose error: position difference (m) and rotation vector (rad).
struct PoseError {
  Vector3d translational = Vector3d::Zero();
  Vector3d rotational = Vector3d::Zero();

  Vector6d vector() const;
  double norm() const { return vector().norm(); }
};

/// Rotation vector (axis * angle, angle in [0, pi]) of a unit quaternion.
Vector3d quaternion_log(const Quaterniond& q);

/// Unit quaternion for the rotation vector `rv`.
Quaterniond quaternion_exp(const Vector3d& rv);

/// current - desired. The rotational part is the rotation vector of
/// current * desired^-1, expressed in the base frame so that it pairs
/// component-wise with base-frame angular velocity.
PoseError pose_error(const Pose& current, const Pose& desired);

/// Advances `pose` under a constant base-frame twist for `dt` seconds.
/// Translation: p += v dt. Rotation: q <- exp(w dt) * q, renormalized.
Pose integrate_pose(const Pose& pose, const Twist& twist, double dt);

}  // namespace forcecbf
