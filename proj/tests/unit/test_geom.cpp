#include <cmath>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>

#include "invslam/geom.hpp"
#include "invslam/model.hpp"
#include "../test_support.hpp"

using namespace invslam;

TEST(Rot2, IdentityAndQuarterTurn)
{
  EXPECT_TRUE(rot2(0.0).matrix().isApprox(Mat2::Identity()));
  const Mat2 q = rot2(std::numbers::pi / 2).matrix();
  EXPECT_NEAR(q(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(q(1, 0), 1.0, 1e-15);
  EXPECT_NEAR(q(0, 1), -1.0, 1e-15);
  EXPECT_NEAR(q(1, 1), 0.0, 1e-15);
}

TEST(Rot2, RejectsNonFinite)
{
  EXPECT_THROW(rot2(std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
  EXPECT_THROW(rot2(std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST(Rot2, OrthogonalUnitDeterminantAndHomomorphism)
{
  test::Sampler s(11);
  for (int n = 0; n < 200; ++n) {
    const double a = s.uniform(-20.0, 20.0), b = s.uniform(-20.0, 20.0);
    const Mat2 r = rot2(a).matrix();
    EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
    EXPECT_LT((r.transpose() * r - Mat2::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((rot2(a).matrix() * rot2(b).matrix() - (rot2(a) * rot2(b)).matrix()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((rot2(a).matrix() * rot2(-a).matrix() - Mat2::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(SE2, GroupAxioms)
{
  test::Sampler s(12);
  for (int n = 0; n < 200; ++n) {
    const SE2Element g = s.group_element(), h = s.group_element();
    EXPECT_LT((g.compose(SE2Element::identity()).matrix() - g.matrix()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((g.compose(g.inverse()).matrix() - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(((g * h).matrix() - g.matrix() * h.matrix()).cwiseAbs().maxCoeff(), 1e-12);
    const Mat3 m = g.matrix();
    EXPECT_EQ(m(2, 0), 0.0);
    EXPECT_EQ(m(2, 1), 0.0);
    EXPECT_EQ(m(2, 2), 1.0);
    const Vec2 p = s.point();
    const Eigen::Vector3d ph = m * Eigen::Vector3d(p.x(), p.y(), 1.0);
    EXPECT_LT((g.act(p) - ph.head<2>()).norm(), 1e-12);
  }
}

TEST(SE2, QuarterTurnPlusTranslationActsOnPoint)
{
  const SE2Element g(std::numbers::pi / 2, Vec2(1.0, 0.0));
  const Vec2 p = g.act(Vec2(1.0, 0.0));
  EXPECT_NEAR(p.x(), 1.0, 1e-15);
  EXPECT_NEAR(p.y(), 1.0, 1e-15);
}

TEST(SE2, FromMatrixRoundTrip)
{
  test::Sampler s(13);
  for (int n = 0; n < 50; ++n) {
    const SE2Element g = s.group_element();
    const SE2Element back = SE2Element::from_matrix(g.matrix());
    EXPECT_LT((back.matrix() - g.matrix()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(SE2Velocity, MatrixShape)
{
  const Mat3 m = SE2Velocity{0.7, Vec2(1.0, -2.0)}.matrix();
  EXPECT_EQ(m(0, 1), -0.7);
  EXPECT_EQ(m(1, 0), 0.7);
  EXPECT_EQ(m(0, 0), 0.0);
  EXPECT_EQ(m(1, 1), 0.0);
  EXPECT_TRUE(m.row(2).isZero());
}

TEST(E3Cross, GeneratorAndLinearity)
{
  EXPECT_EQ(e3_cross(Vec2(1, 0)), Vec2(0, 1));
  EXPECT_EQ(e3_cross(Vec2(0, 1)), Vec2(-1, 0));
  test::Sampler s(14);
  for (int n = 0; n < 50; ++n) {
    const Vec2 u = s.point(), w = s.point();
    const double a = s.uniform(-3, 3), b = s.uniform(-3, 3);
    EXPECT_LT((e3_cross(a * u + b * w) - (a * e3_cross(u) + b * e3_cross(w))).norm(), 1e-12);
  }
}

TEST(SlamEmbed, IdentityPoseAndStraightVelocity)
{
  SlamState s;
  s.landmarks = {Vec2(1, 2)};
  const auto e = slam_embed(s, Inputs{1.0, 0.0});
  EXPECT_TRUE(e.vehicle.matrix().isApprox(Mat3::Identity()));
  const Mat3 omega = e.vehicle_velocity.matrix();
  EXPECT_TRUE((omega.topLeftCorner<2, 2>().isZero()));
  EXPECT_EQ(omega(0, 2), 1.0);
  EXPECT_EQ(omega(1, 2), 0.0);
  EXPECT_TRUE((e.landmark_velocity.matrix().topRightCorner<2, 1>().isZero()));
}

TEST(SlamEmbed, MatrixOdeReproducesPlantDynamics)
{
  // X' = X Omega and P_i' = P_i Omega_i, evaluated by central differences of the
  // plant flow, must equal the embedded right-hand side.
  test::Sampler s(15);
  for (int n = 0; n < 50; ++n) {
    const SlamState st = s.state(2);
    const Inputs in = s.inputs();
    const auto profile = InputProfile::constant(in.u, in.v);
    const double h = 1e-5;
    const auto fwd = simulate_plant(st, profile, h, 1).back();
    // (-u, v) runs the same flow backwards in time.
    const auto back = simulate_plant(st, InputProfile::constant(-in.u, in.v), h, 1).back();

    const auto emb = slam_embed(st, in);
    const Mat3 Xdot_fd = (SE2Element(fwd.theta, fwd.x).matrix() - SE2Element(back.theta, back.x).matrix()) / (2 * h);
    const Mat3 Xdot = emb.vehicle.matrix() * emb.vehicle_velocity.matrix();
    EXPECT_LT((Xdot_fd - Xdot).cwiseAbs().maxCoeff(), 1e-6);

    for (std::size_t i = 0; i < st.landmarks.size(); ++i) {
      const Mat3 Pdot_fd = (SE2Element(fwd.theta, fwd.landmarks[i]).matrix() -
                            SE2Element(back.theta, back.landmarks[i]).matrix()) /
                           (2 * h);
      const Mat3 Pdot = emb.landmarks[i].matrix() * emb.landmark_velocity.matrix();
      EXPECT_LT((Pdot_fd - Pdot).cwiseAbs().maxCoeff(), 1e-6);
    }

    // Block structure of X Omega.
    EXPECT_LT((Xdot.topRightCorner<2, 1>() - in.u * rot_matrix(st.theta).col(0)).norm(), 1e-12);
    const Mat2 omega_x = emb.vehicle_velocity.matrix().topLeftCorner<2, 2>();
    EXPECT_LT((Xdot.topLeftCorner<2, 2>() - rot_matrix(st.theta) * omega_x).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(WrapAngle, Range)
{
  EXPECT_NEAR(wrap_angle(3 * std::numbers::pi), std::numbers::pi, 1e-12);
  EXPECT_NEAR(wrap_angle(-std::numbers::pi / 2), -std::numbers::pi / 2, 1e-15);
  EXPECT_NEAR(wrap_angle(7.0), 7.0 - 2 * std::numbers::pi, 1e-12);
}
