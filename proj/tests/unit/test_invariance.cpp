#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "invslam/invariance.hpp"
#include "../test_support.hpp"

using namespace invslam;

namespace {

double max_abs(const Vector& v) { return v.cwiseAbs().maxCoeff(); }

// Gain for two landmarks: L_x = 0.5 I, L_i = -I on its own block, small heading row.
Matrix autonomy_gain()
{
  Matrix L = Matrix::Zero(7, 4);
  L.row(0) << 0.1, 0.05, -0.05, 0.1;
  L.block<2, 2>(1, 0) = 0.25 * Mat2::Identity();
  L.block<2, 2>(1, 2) = 0.25 * Mat2::Identity();
  L.block<2, 2>(3, 0) = -Mat2::Identity();
  L.block<2, 2>(5, 2) = -Mat2::Identity();
  return L;
}

SlamState two_landmark_truth()
{
  SlamState s;
  s.x = Vec2(0.5, -0.5);
  s.theta = 0.3;
  s.landmarks = {Vec2(3.0, 2.0), Vec2(-2.0, 4.0)};
  return s;
}

InvariantError moderate_error()
{
  return InvariantError{0.2, Vec2(0.3, -0.2), {Vec2(0.5, 0.4), Vec2(-0.6, 0.1)}};
}

}  // namespace

TEST(GroupAction, LeftActionComposes)
{
  test::Sampler s(51);
  for (int n = 0; n < 100; ++n) {
    const SlamState st = s.state(3);
    const SE2Element g = s.group_element(), h = s.group_element();
    const auto a = apply_action(GroupActionKind::Left, g, apply_action(GroupActionKind::Left, h, st));
    const auto b = apply_action(GroupActionKind::Left, g * h, st);
    EXPECT_LT(max_abs(a.to_vector() - b.to_vector()), 1e-10);
  }
}

TEST(GroupAction, RightActionComposesInReverse)
{
  test::Sampler s(52);
  for (int n = 0; n < 100; ++n) {
    const SlamState st = s.state(3);
    const SE2Element g = s.group_element(), h = s.group_element();
    const auto a = apply_action(GroupActionKind::Right, h, apply_action(GroupActionKind::Right, g, st));
    const auto b = apply_action(GroupActionKind::Right, g * h, st);
    EXPECT_LT(std::abs(wrap_angle(a.theta - b.theta)), 1e-10);
    EXPECT_LT((a.x - b.x).norm(), 1e-10);
    for (std::size_t i = 0; i < st.landmarks.size(); ++i) EXPECT_LT((a.landmarks[i] - b.landmarks[i]).norm(), 1e-10);
  }
}

TEST(GroupAction, InverseUndoesTheAction)
{
  test::Sampler s(58);
  for (int n = 0; n < 100; ++n) {
    const SlamState st = s.state(3);
    const SE2Element g = s.group_element();
    for (auto kind : {GroupActionKind::Left, GroupActionKind::Right}) {
      const auto back = apply_action(kind, g.inverse(), apply_action(kind, g, st));
      EXPECT_LT(std::abs(wrap_angle(back.theta - st.theta)), 1e-12);
      EXPECT_LT(max_abs(back.to_vector() - st.to_vector()), 1e-12 * (1.0 + max_abs(st.to_vector())));
    }
  }
}

TEST(GroupAction, IdentityIsTrivial)
{
  test::Sampler s(53);
  const SlamState st = s.state(2);
  for (auto kind : {GroupActionKind::Left, GroupActionKind::Right}) {
    EXPECT_LT(max_abs(apply_action(kind, SE2Element::identity(), st).to_vector() - st.to_vector()), 1e-15);
  }
}

TEST(GroupError, LeftErrorInvariantUnderLeftMultiplication)
{
  test::Sampler s(54);
  for (int n = 0; n < 100; ++n) {
    const SE2Element X = s.group_element(), Xh = s.group_element(), g = s.group_element();
    const Mat3 a = group_error(Xh, X, ErrorSide::Left).matrix();
    const Mat3 b = group_error(g * Xh, g * X, ErrorSide::Left).matrix();
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((a - X.matrix().inverse() * Xh.matrix()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(GroupError, RightErrorInvariantUnderRightMultiplication)
{
  test::Sampler s(55);
  for (int n = 0; n < 100; ++n) {
    const SE2Element X = s.group_element(), Xh = s.group_element(), g = s.group_element();
    const Mat3 a = group_error(Xh, X, ErrorSide::Right).matrix();
    const Mat3 b = group_error(Xh * g, X * g, ErrorSide::Right).matrix();
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((a - Xh.matrix() * X.matrix().inverse()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(InvariantStateError, HandCase)
{
  SlamState truth;
  truth.x = Vec2(1, 0);
  truth.landmarks = {Vec2(0, 2)};
  Estimate est;
  est.theta = std::numbers::pi / 2;
  est.landmarks = {Vec2(0, 0)};
  const InvariantError eta = invariant_state_error(est, truth);
  EXPECT_NEAR(eta.theta, std::numbers::pi / 2, 1e-15);
  EXPECT_LT((eta.x - Vec2(0, -1)).norm(), 1e-15);
  EXPECT_LT((eta.p[0] - Vec2(2, 0)).norm(), 1e-15);
}

TEST(InvariantStateError, ZeroForPerfectEstimateAndRoundTrips)
{
  test::Sampler s(56);
  for (int n = 0; n < 100; ++n) {
    const SlamState truth = s.state(3);
    EXPECT_LT(max_abs(invariant_state_error(truth, truth).to_vector()), 1e-12);
    const Estimate est = s.state(3);
    const InvariantError eta = invariant_state_error(est, truth);
    const Estimate back = estimate_from_error(eta, truth);
    EXPECT_LT(std::abs(wrap_angle(back.theta - est.theta)), 1e-12);
    EXPECT_LT((back.x - est.x).norm(), 1e-10);
    EXPECT_EQ(InvariantError::from_vector(eta.to_vector()).to_vector(), eta.to_vector());
  }
}

TEST(InvariantStateError, UnchangedByVehicleFrameChange)
{
  test::Sampler s(57);
  for (int n = 0; n < 100; ++n) {
    const SlamState truth = s.state(3);
    const Estimate est = s.state(3);
    const SE2Element g = s.group_element();
    const auto a = invariant_state_error(est, truth);
    const auto b = invariant_state_error(apply_action(GroupActionKind::Right, g, est),
                                         apply_action(GroupActionKind::Right, g, truth));
    EXPECT_LT(std::abs(wrap_angle(a.theta - b.theta)), 1e-10);
    EXPECT_LT((a.x - b.x).norm(), 1e-9);
    for (std::size_t i = 0; i < a.p.size(); ++i) EXPECT_LT((a.p[i] - b.p[i]).norm(), 1e-9);
  }
}

TEST(RightInvariantObserver, ZeroGainLeavesErrorConstant)
{
  const auto obs = RightInvariantObserver::linear(Vec2(2, 1), Eigen::Matrix<double, 3, 2>::Zero());
  const SE2Element X0(0.1, Vec2(0, 0)), Xh0(0.5, Vec2(1, -1));
  const auto tr = simulate_right_invariant(obs, X0, Xh0, InputProfile::constant(1.0, 0.5), 0.01, 500);
  const Mat3 eta0 = group_error(tr.estimate.front(), tr.truth.front(), ErrorSide::Right).matrix();
  const Mat3 eta1 = group_error(tr.estimate.back(), tr.truth.back(), ErrorSide::Right).matrix();
  EXPECT_LT((eta0 - eta1).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(right_error_flow_check(obs, tr.truth, tr.estimate, 0.01), 1e-10);
}

TEST(RightInvariantObserver, FlowMatchesFiniteDifferencesAndConverges)
{
  Eigen::Matrix<double, 3, 2> K;
  K << 0.0, -0.3,
       -1.0, 0.0,
       0.0, -1.0;
  const auto obs = RightInvariantObserver::linear(Vec2(3, 1), K);
  const SE2Element X0(0.0, Vec2(0, 0)), Xh0(0.4, Vec2(0.5, -0.3));
  const auto profile = InputProfile::constant(1.0, 0.5);

  const auto coarse = simulate_right_invariant(obs, X0, Xh0, profile, 0.002, 2500);
  const auto fine = simulate_right_invariant(obs, X0, Xh0, profile, 0.001, 5000);
  const double r_coarse = right_error_flow_check(obs, coarse.truth, coarse.estimate, 0.002);
  const double r_fine = right_error_flow_check(obs, fine.truth, fine.estimate, 0.001);
  EXPECT_LT(r_fine, 1e-4);
  // Central differences are second order.
  EXPECT_GT(r_coarse / r_fine, 3.0);
  EXPECT_LT(r_coarse / r_fine, 5.0);

  EXPECT_THROW(right_error_flow_check(obs, {X0, X0}, {Xh0, Xh0}, 0.01), std::invalid_argument);
}

TEST(Autonomy, IdenticalProfilesGiveZero)
{
  const ObserverConfig cfg{ObserverKind::Ekf, ConstantGain{autonomy_gain()}};
  const auto p = InputProfile::constant(1.0, 0.5);
  EXPECT_EQ(autonomy_check(cfg, {p, p}, two_landmark_truth(), moderate_error(), 5.0, 0.01), 0.0);
}

TEST(Autonomy, InvariantObserverErrorIgnoresTheInputs)
{
  const ObserverConfig cfg{ObserverKind::Iekf, ConstantGain{autonomy_gain()}};
  const double d = autonomy_check(cfg, {InputProfile::constant(1.0, 0.5), InputProfile::straight(1.0)},
                                  two_landmark_truth(), moderate_error(), 10.0, 0.01);
  EXPECT_LT(d, 1e-6);
}

TEST(Autonomy, StandardEkfErrorDependsOnTheInputs)
{
  const ObserverConfig cfg{ObserverKind::Ekf, ConstantGain{autonomy_gain()}};
  const double d = autonomy_check(cfg, {InputProfile::constant(1.0, 0.5), InputProfile::straight(1.0)},
                                  two_landmark_truth(), moderate_error(), 10.0, 0.01);
  EXPECT_GT(d, 1e-2);
}

TEST(Autonomy, Prop1ErrorIgnoresTheInputs)
{
  const ObserverConfig cfg{ObserverKind::Prop1, Prop1Gain{{1.0, 2.0}}};
  const double d = autonomy_check(cfg, {InputProfile::constant(1.0, 0.5), InputProfile::straight(2.0)},
                                  two_landmark_truth(), moderate_error(), 10.0, 0.01);
  EXPECT_LT(d, 1e-6);
}

TEST(Autonomy, IekfErrorFollowsTheClosedFormFlow)
{
  // d theta~/dt = Lth E, d x~/dt = Lth J x~ + Lx E, d p~_i/dt = Lth J p~_i + L_i E,
  // checked against central differences of the sampled error trajectory.
  const Matrix L = autonomy_gain();
  const ObserverConfig cfg{ObserverKind::Iekf, ConstantGain{L}};
  const double dt = 0.001;
  const auto traj =
      error_trajectory(cfg, InputProfile::constant(1.0, 0.5), two_landmark_truth(), moderate_error(), dt, 3000);
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < traj.size(); k += 10) {
    const InvariantError& e = traj[k];
    Vector E(4);
    E << e.p[0] - e.x, e.p[1] - e.x;
    const Vector l = L * E;
    Vector rate(7);
    rate(0) = l(0);
    rate.segment<2>(1) = l(0) * e3_cross(e.x) + l.segment<2>(1);
    for (std::size_t i = 0; i < 2; ++i) {
      rate.segment<2>(landmark_offset(i)) = l(0) * e3_cross(e.p[i]) + l.segment<2>(landmark_offset(i));
    }
    const Vector fd = (traj[k + 1].to_vector() - traj[k - 1].to_vector()) / (2 * dt);
    worst = std::max(worst, max_abs(fd - rate));
  }
  EXPECT_LT(worst, 1e-5);
}

TEST(Equivariance, LeftActionLeavesObservationsAndDynamicsConsistent)
{
  const auto r = equivariance_check(GroupActionKind::Left, 200, 7);
  EXPECT_LT(r.output_residual, 1e-10);
  EXPECT_LT(r.dynamics_residual, 1e-10);
  EXPECT_LT(r.dynamics_fd_residual, 1e-6);
}

TEST(Equivariance, RightActionRotatesObservations)
{
  const auto r = equivariance_check(GroupActionKind::Right, 200, 8);
  EXPECT_LT(r.output_residual, 1e-10);
  EXPECT_LT(r.dynamics_residual, 1e-10);
  EXPECT_LT(r.dynamics_fd_residual, 1e-6);
}

TEST(Equivariance, IdentityElementIsExact)
{
  const auto r = equivariance_check(GroupActionKind::Left, 20, 9, SE2Element::identity());
  EXPECT_EQ(r.output_residual, 0.0);
  EXPECT_EQ(r.dynamics_residual, 0.0);
}
