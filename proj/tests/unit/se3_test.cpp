#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "forcecbf/se3.hpp"
#include "gen.hpp"

namespace forcecbf {
namespace {

using testing::Gen;
using Matrix3d = Eigen::Matrix3d;

const double kPi = std::acos(-1.0);

Matrix3d skew(const Vector3d& v) {
  Matrix3d s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

// Rodrigues, written out by hand.
Matrix3d rotation_exp(const Vector3d& rv) {
  const double th = rv.norm();
  if (th < 1e-12) return Matrix3d::Identity() + skew(rv);
  const Matrix3d k = skew(rv / th);
  return Matrix3d::Identity() + std::sin(th) * k + (1.0 - std::cos(th)) * k * k;
}

// Matrix logarithm for angles away from pi.
Vector3d rotation_log(const Matrix3d& r) {
  const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double th = std::acos(c);
  const Vector3d axis(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  if (th < 1e-12) return axis / 2.0;
  return axis * (th / (2.0 * std::sin(th)));
}

// RK4 on dR/dt = [w]x R, dp/dt = v.
Pose rk4_flow(const Pose& start, const Twist& xi, double dt, int steps) {
  Matrix3d r = start.orientation.toRotationMatrix();
  const Matrix3d w = skew(xi.angular);
  const double h = dt / steps;
  for (int i = 0; i < steps; ++i) {
    const Matrix3d k1 = w * r;
    const Matrix3d k2 = w * (r + h / 2 * k1);
    const Matrix3d k3 = w * (r + h / 2 * k2);
    const Matrix3d k4 = w * (r + h * k3);
    r += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  Pose out;
  out.position = start.position + xi.linear * dt;
  out.orientation = Quaterniond(r).normalized();
  return out;
}

TEST(PoseError, IdenticalPosesGiveZero) {
  Gen g(1);
  for (int i = 0; i < 100; ++i) {
    const Pose p = g.pose(2.0, 3.0);
    EXPECT_EQ(pose_error(p, p).vector(), Vector6d::Zero());
  }
}

TEST(PoseError, PureTranslation) {
  Pose cur, des;
  cur.position = {0.6, -0.3, 1.0};
  des.position = {0.5, -0.3, 1.0};
  const PoseError e = pose_error(cur, des);
  EXPECT_NEAR(e.translational.x(), 0.1, 1e-15);
  EXPECT_EQ(e.translational.y(), 0.0);
  EXPECT_EQ(e.translational.z(), 0.0);
  EXPECT_EQ(e.rotational, Vector3d::Zero());
}

TEST(PoseError, QuarterTurnAboutX) {
  Pose des;
  Pose cur;
  cur.orientation = Quaterniond(Eigen::AngleAxisd(kPi / 2, Vector3d::UnitX()));
  const PoseError e = pose_error(cur, des);
  const Vector3d oracle = rotation_log(cur.orientation.toRotationMatrix());
  EXPECT_NEAR(oracle.x(), kPi / 2, 1e-12);
  EXPECT_LT((e.rotational - oracle).norm(), 1e-12);
  EXPECT_EQ(e.translational, Vector3d::Zero());
}

TEST(PoseError, MatchesMatrixLogOracle) {
  Gen g(2);
  for (int i = 0; i < 500; ++i) {
    const Pose a = g.pose(1.0, 3.0);
    const Pose b = g.pose(1.0, 3.0);
    const Matrix3d rel = a.orientation.toRotationMatrix() * b.orientation.toRotationMatrix().transpose();
    const Vector3d oracle = rotation_log(rel);
    if (oracle.norm() > kPi - 1e-3) continue;
    EXPECT_LT((pose_error(a, b).rotational - oracle).norm(), 1e-9) << "case " << i;
  }
}

TEST(PoseError, RotationalMagnitudeAtMostPi) {
  Gen g(3);
  for (int i = 0; i < 500; ++i) {
    Pose a = g.pose(1.0, kPi);
    Pose b = g.pose(1.0, kPi);
    if (g.coin()) a.orientation.coeffs() *= -1.0;
    EXPECT_LE(pose_error(a, b).rotational.norm(), kPi + 1e-12);
  }
}

TEST(PoseError, AntipodalQuaternionsAgree) {
  Gen g(4);
  for (int i = 0; i < 200; ++i) {
    const Pose a = g.pose(1.0, 3.0);
    const Pose b = g.pose(1.0, 3.0);
    Pose neg = a;
    neg.orientation.coeffs() *= -1.0;
    EXPECT_LT((pose_error(a, b).vector() - pose_error(neg, b).vector()).norm(), 1e-12);
    EXPECT_TRUE(approx_equal(a, neg));
  }
}

TEST(PoseError, AntisymmetricTranslationEqualRotationMagnitude) {
  Gen g(5);
  for (int i = 0; i < 500; ++i) {
    const Pose a = g.pose(1.0, 3.0);
    const Pose b = g.pose(1.0, 3.0);
    const PoseError ab = pose_error(a, b);
    const PoseError ba = pose_error(b, a);
    EXPECT_EQ(ab.translational, -ba.translational);
    EXPECT_NEAR(ab.rotational.norm(), ba.rotational.norm(), 1e-12);
  }
}

TEST(Integrate, ZeroTwistLeavesPose) {
  Gen g(6);
  for (int i = 0; i < 50; ++i) {
    const Pose p = g.pose(1.0, 3.0);
    const Pose q = integrate_pose(p, Twist{}, g.uniform(1e-4, 1.0));
    EXPECT_TRUE(approx_equal(p, q, 1e-15));
  }
}

TEST(Integrate, PureTranslation) {
  Twist xi;
  xi.linear = {1.0, 0.0, 0.0};
  const Pose q = integrate_pose(Pose{}, xi, 0.1);
  EXPECT_NEAR(q.position.x(), 0.1, 1e-15);
  EXPECT_EQ(q.position.y(), 0.0);
  EXPECT_EQ(q.position.z(), 0.0);
}

TEST(Integrate, HalfTurnRateAboutZ) {
  Twist xi;
  xi.angular = {0.0, 0.0, kPi};
  const Pose q = integrate_pose(Pose{}, xi, 0.5);
  const Matrix3d oracle = rotation_exp(Vector3d(0, 0, kPi / 2));
  EXPECT_LT((q.orientation.toRotationMatrix() - oracle).norm(), 1e-9);
}

TEST(Integrate, ExpMatchesRodrigues) {
  Gen g(7);
  for (int i = 0; i < 500; ++i) {
    const Vector3d rv = g.rotation_vector(3.0);
    EXPECT_LT((quaternion_exp(rv).toRotationMatrix() - rotation_exp(rv)).norm(), 1e-12);
  }
}

TEST(Integrate, UnitNormPreserved) {
  Gen g(8);
  Pose p = g.pose(1.0, 3.0);
  for (int i = 0; i < 10000; ++i) {
    Twist xi;
    xi.linear = g.vec3(1.0);
    xi.angular = g.vec3(5.0);
    p = integrate_pose(p, xi, 1e-3);
    ASSERT_NEAR(p.orientation.norm(), 1.0, 1e-9);
  }
}

// The flow under a constant base-frame twist is exp(w t) R, so the
// integrator should agree with a fine RK4 solve to RK4 accuracy, and the
// one-step error must shrink at least 4x when dt halves (or already sit
// at rounding level).
TEST(Integrate, AgreesWithRk4Flow) {
  Gen g(9);
  for (int i = 0; i < 50; ++i) {
    const Pose p = g.pose(1.0, 3.0);
    Twist xi;
    xi.linear = g.vec3(1.0);
    xi.angular = g.vec3(3.0);
    double prev = -1.0;
    for (double dt : {0.2, 0.1, 0.05}) {
      const double err = pose_error(integrate_pose(p, xi, dt), rk4_flow(p, xi, dt, 2000)).norm();
      EXPECT_LT(err, 1e-10);
      if (prev > 1e-12) EXPECT_LE(err, prev / 4.0);
      prev = err;
    }
  }
}

TEST(Integrate, FeedbackConvergesToTarget) {
  Gen g(10);
  for (int i = 0; i < 50; ++i) {
    const Pose target = g.pose(1.0, 3.0);
    Pose p = g.pose(1.0, 3.0);
    if (pose_error(p, target).rotational.norm() > kPi - 0.05) continue;
    for (int k = 0; k < 200; ++k) {
      const Vector6d e = pose_error(p, target).vector();
      p = integrate_pose(p, Twist::from_vector(-0.1 * e), 1.0);
    }
    EXPECT_LT(pose_error(p, target).norm(), 1e-8) << "case " << i;
  }
}

TEST(Pose, MakePoseNormalizes) {
  const Pose p = make_pose(Vector3d(1, 2, 3), Quaterniond(2.0, 0.0, 0.0, 0.0));
  EXPECT_NEAR(p.orientation.norm(), 1.0, 1e-15);
  EXPECT_TRUE(approx_equal(p, Pose{Vector3d(1, 2, 3), Quaterniond::Identity()}));
}

TEST(Pose, RpyMatchesAxisComposition) {
  const Pose p = pose_from_rpy(Vector3d::Zero(), 0.1, -0.2, 0.3);
  const Matrix3d r = rotation_exp(Vector3d(0, 0, 0.3)) * rotation_exp(Vector3d(0, -0.2, 0)) *
                     rotation_exp(Vector3d(0.1, 0, 0));
  EXPECT_LT((p.orientation.toRotationMatrix() - r).norm(), 1e-12);
}

TEST(Vectors, ComponentOrder) {
  Wrench w;
  w.force = {1, 2, 3};
  w.torque = {4, 5, 6};
  for (int i = 0; i < 6; ++i) {
    EXPECT_EQ(w.vector()[i], i + 1);
    EXPECT_EQ(w[i], i + 1);
  }
  const Twist t = Twist::from_vector(w.vector());
  EXPECT_EQ(t.linear, w.force);
  EXPECT_EQ(t.angular, w.torque);
}

}  // namespace
}  // namespace forcecbf
