#include <cmath>

#include <gtest/gtest.h>

#include "forcecbf/admittance.hpp"
#include "forcecbf/contact.hpp"
#include "forcecbf/presets.hpp"
#include "gen.hpp"

namespace forcecbf {
namespace {

using testing::Gen;

HangingLoad bag(double newtons) {
  HangingLoad h;
  h.mass = presets::mass_for_weight(newtons);
  h.rope_length = 0.3;
  h.ground_height = 0.15;
  h.ground_stiffness = 1e4;
  return h;
}

Pose at_z(double z) {
  Pose p;
  p.position = {0.6, 0.0, z};
  return p;
}

TEST(Spring, ZeroAtAnchor) {
  Gen g(30);
  SpringContact s;
  s.anchor = g.pose(1.0, 2.0);
  s.stiffness = g.vec6(10, 1000);
  EXPECT_EQ(spring_wrench(s, s.anchor).vector(), Vector6d::Zero());
}

TEST(Spring, HandValues) {
  SpringContact s;
  s.stiffness << 0, 0, 500, 2, 0, 0;
  Pose p;
  p.position.z() = 0.01;
  EXPECT_NEAR(spring_wrench(s, p).force.z(), -5.0, 1e-12);
  Pose r;
  r.orientation = Quaterniond(Eigen::AngleAxisd(0.25, Vector3d::UnitX()));
  EXPECT_NEAR(spring_wrench(s, r).torque.x(), -0.5, 1e-12);
}

TEST(Spring, OddInTheError) {
  Gen g(31);
  for (int i = 0; i < 200; ++i) {
    SpringContact s;
    s.stiffness = g.vec6(10, 1000);
    const Vector3d dp = g.vec3(0.5);
    const Vector3d rv = g.rotation_vector(1.0);
    Pose plus, minus;
    plus.position = dp;
    plus.orientation = quaternion_exp(rv);
    minus.position = -dp;
    minus.orientation = quaternion_exp(-rv);
    EXPECT_LT((spring_wrench(s, plus).vector() + spring_wrench(s, minus).vector()).cwiseAbs().maxCoeff(),
              1e-12);
  }
}

TEST(Hanging, WeightsAboveGround) {
  EXPECT_NEAR(hanging_wrench(bag(20.0), at_z(1.0)).force.z(), -20.0, 1e-12);
  EXPECT_NEAR(hanging_wrench(bag(25.0), at_z(1.0)).force.z(), -25.0, 1e-12);
  // 2.039 kg, the rounded mass of a 20 N load.
  HangingLoad h = bag(0.0);
  h.mass = 2.039;
  EXPECT_NEAR(hanging_wrench(h, at_z(1.0)).force.z(), -20.0, 5e-3);
}

TEST(Hanging, FullyDeloadedOnGround) {
  const Wrench w = hanging_wrench(bag(25.0), at_z(0.3));
  EXPECT_EQ(w.force.z(), 0.0);
  EXPECT_EQ(w.torque, Vector3d::Zero());
}

TEST(Hanging, ContinuousAndMonotoneInHeight) {
  const HangingLoad h = bag(25.0);
  double prev = std::abs(hanging_wrench(h, at_z(0.2)).force.z());
  for (double z = 0.2; z <= 0.6; z += 1e-5) {
    const double f = std::abs(hanging_wrench(h, at_z(z)).force.z());
    EXPECT_GE(f, prev - 1e-12);
    EXPECT_LE(f - prev, h.ground_stiffness * 1e-5 + 1e-9);
    prev = f;
  }
}

TEST(Hanging, OffsetProducesLeverTorque) {
  HangingLoad h = bag(20.0);
  h.rope_attach_offset = {0.1, 0.0, 0.0};
  const Wrench w = hanging_wrench(h, at_z(1.0));
  EXPECT_NEAR(w.torque.y(), 0.1 * 20.0, 1e-12);
  EXPECT_NEAR(w.torque.x(), 0.0, 1e-12);
}

TEST(Guide, ZeroOnIntent) {
  HumanGuide h;
  h.grip_stiffness << 50, 50, 50, 5, 5, 5;
  h.intent_trajectory = {{0.0, at_z(1.0)}, {5.0, at_z(1.5)}};
  EXPECT_LT(human_guide_wrench(h, h.intent_at(2.5), 2.5).vector().norm(), 1e-12);
  EXPECT_NEAR(h.intent_at(2.5).position.z(), 1.25, 1e-12);
  EXPECT_EQ(h.intent_at(-1.0).position.z(), 1.0);
  EXPECT_EQ(h.intent_at(99.0).position.z(), 1.5);
}

TEST(Guide, HandValues) {
  HumanGuide h;
  h.grip_stiffness << 50, 50, 50, 5, 5, 5;
  Pose intent;
  intent.position.x() = 0.2;
  h.intent_trajectory = {{0.0, intent}};
  EXPECT_NEAR(human_guide_wrench(h, Pose{}, 0.0).force.x(), 10.0, 1e-12);

  intent = Pose{};
  intent.orientation = Quaterniond(Eigen::AngleAxisd(0.1, Vector3d::UnitX()));
  h.intent_trajectory = {{0.0, intent}};
  EXPECT_NEAR(human_guide_wrench(h, Pose{}, 0.0).torque.x(), 0.5, 1e-12);
}

// Finite-difference Lipschitz probe: a small pose change moves the wrench by
// at most max stiffness times the change (plus the lever for hanging loads).
TEST(Property, WrenchContinuousInPose) {
  Gen g(32);
  for (int i = 0; i < 300; ++i) {
    const Vector6d k = g.vec6(10, 1000);
    SpringContact s{g.pose(0.5, 1.0), k};
    HumanGuide guide;
    guide.grip_stiffness = k;
    guide.intent_trajectory = {{0.0, g.pose(0.5, 1.0)}};
    InteractiveHand hand{g.pose(0.5, 1.0), k, Wrench{}};
    const std::vector<ContactModel> models{s, guide, hand};
    const Pose p = g.pose(0.5, 1.0);
    const double eps = 1e-6;
    Twist dir;
    dir.linear = g.unit3();
    dir.angular = g.unit3();
    const Pose q = integrate_pose(p, dir, eps);
    for (const ContactModel& m : models) {
      const double dw = (contact_wrench(m, q, 0.0).vector() - contact_wrench(m, p, 0.0).vector()).norm();
      EXPECT_LE(dw, k.maxCoeff() * 2.0 * eps * 1.01 + 1e-9) << "case " << i;
    }
  }
}

TEST(Envelope, ClampsEachAxis) {
  Wrench env;
  env.force = Vector3d::Constant(30.0);
  env.torque = Vector3d::Constant(3.0);
  Wrench w;
  w.force = {45.0, -10.0, -31.0};
  w.torque = {3.5, -4.0, 0.1};
  const Wrench c = clamp_to_envelope(w, env);
  EXPECT_EQ(c.force, Vector3d(30.0, -10.0, -30.0));
  EXPECT_EQ(c.torque, Vector3d(3.0, -3.0, 0.1));
}

AdmittanceParams admittance(double kz) {
  AdmittanceParams a;
  a.stiffness << 40, 40, kz, 10, 10, 10;
  return a;
}

TEST(Admittance, AtRest) {
  EXPECT_EQ(admittance_step(Pose{}, Pose{}, Wrench{}, admittance(40)).vector(), Vector6d::Zero());
}

TEST(Admittance, LoadStartsDroop) {
  Wrench w;
  w.force.z() = -20.0;
  EXPECT_NEAR(admittance_step(Pose{}, Pose{}, w, admittance(40)).linear.z(), -0.2, 1e-15);
}

TEST(Admittance, StaticDroopUnderLoad) {
  Wrench w;
  w.force.z() = -20.0;
  Pose p;
  p.position.z() = -0.5;
  EXPECT_EQ(admittance_step(p, Pose{}, w, admittance(40)).linear.z(), 0.0);
}

TEST(Admittance, EquilibriumIsWrenchOverStiffness) {
  Gen g(33);
  for (int i = 0; i < 200; ++i) {
    AdmittanceParams a;
    a.stiffness = g.vec6(1, 100);
    a.damping = g.vec6(1, 100);
    const Vector6d w = g.vec6(-20, 20);
    Vector6d e = w.cwiseQuotient(a.stiffness);
    e.tail<3>() = e.tail<3>().cwiseMax(-1.0).cwiseMin(1.0);
    const Vector6d wc = (Vector6d() << w.head<3>(), e.tail<3>().cwiseProduct(a.stiffness.tail<3>()))
                            .finished();
    const Twist v = admittance_step(Pose{e.head<3>(), quaternion_exp(e.tail<3>())}, Pose{},
                                    Wrench::from_vector(wc), a);
    EXPECT_LT(v.vector().cwiseAbs().maxCoeff(), 1e-12) << "case " << i;
  }
}

TEST(Admittance, Linear) {
  Gen g(34);
  for (int i = 0; i < 200; ++i) {
    AdmittanceParams a;
    a.stiffness = g.vec6(0, 100);
    a.damping = g.vec6(1, 100);
    const Vector3d dp = g.vec3(0.5);
    const Wrench w = Wrench::from_vector(g.vec6(-20, 20));
    const Wrench w2 = Wrench::from_vector(2.0 * w.vector());
    const Twist v1 = admittance_step(Pose{dp, Quaterniond::Identity()}, Pose{}, w, a);
    const Twist v2 = admittance_step(Pose{2.0 * dp, Quaterniond::Identity()}, Pose{}, w2, a);
    EXPECT_LT((v2.vector() - 2.0 * v1.vector()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Admittance, ParamsValidity) {
  AdmittanceParams a = admittance(40);
  EXPECT_TRUE(a.valid());
  a.damping[0] = 0.0;
  EXPECT_FALSE(a.valid());
  a = admittance(-1.0);
  EXPECT_FALSE(a.valid());
}

// Closed loop against a spring, zero-order hold at 30 Hz with the plant
// integrating at 1 ms.
double run_spring_loop(double ks, double kenv, double damping, int ticks) {
  AdmittanceParams a;
  a.stiffness = Vector6d::Constant(ks);
  a.damping = Vector6d::Constant(damping);
  SpringContact env;
  env.anchor.position.z() = 0.1;
  env.stiffness = Vector6d::Constant(kenv);
  Pose p;
  p.position.z() = 0.05;
  const double period = 1.0 / 30.0;
  const int sub = 34;
  for (int n = 0; n < ticks; ++n) {
    const Twist v = admittance_step(p, Pose{}, spring_wrench(env, p), a);
    for (int s = 0; s < sub; ++s) p = integrate_pose(p, v, period / sub);
    if (!std::isfinite(p.position.z()) || std::abs(p.position.z()) > 1e6) return INFINITY;
  }
  return p.position.z();
}

TEST(Admittance, DiscreteStabilityBoundary) {
  const double dt = 1.0 / 30.0;
  EXPECT_NEAR(admittance_loop_gain(40, 0, 100, dt), 40.0 * dt / 100.0, 1e-15);
  EXPECT_TRUE(admittance_discrete_stable(40, 500, 100, dt));
  EXPECT_FALSE(admittance_discrete_stable(40, 7000, 100, dt));

  // Stable side converges to the series-spring equilibrium.
  const double z = run_spring_loop(40, 500, 100, 600);
  EXPECT_NEAR(z, 0.1 * 500 / (500 + 40), 1e-6);
  // Far past the bound the loop diverges.
  EXPECT_FALSE(std::isfinite(run_spring_loop(40, 7000, 100, 600)));
  // Just inside and just outside gain 2.
  const double kcrit = 2.0 * 100 / dt;
  EXPECT_TRUE(std::isfinite(run_spring_loop(0.95 * kcrit, 0, 100, 2000)));
  EXPECT_FALSE(std::isfinite(run_spring_loop(1.05 * kcrit, 0, 100, 2000)));
}

}  // namespace
}  // namespace forcecbf
