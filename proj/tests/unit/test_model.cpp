#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "invslam/invariance.hpp"
#include "invslam/model.hpp"
#include "../test_support.hpp"

using namespace invslam;

TEST(Dynamics, StraightAheadAtZeroHeading)
{
  SlamState s;
  s.landmarks = {Vec2(3, 4), Vec2(-1, 2)};
  const SlamRate r = dynamics(s, {1.0, 0.0});
  EXPECT_EQ(r.x, Vec2(1.0, 0.0));
  EXPECT_EQ(r.theta, 0.0);
  for (const auto& p : r.landmarks) EXPECT_EQ(p, Vec2::Zero());
}

TEST(Dynamics, HeadingRateIsSpeedTimesSteering)
{
  SlamState s;
  EXPECT_EQ(dynamics(s, {2.0, 0.5}).theta, 1.0);
}

TEST(Dynamics, ZeroSpeedFreezesEverything)
{
  test::Sampler smp(1);
  const SlamState s = smp.state(3);
  const SlamRate r = dynamics(s, {0.0, 0.9});
  EXPECT_TRUE(r.to_vector().isZero());
}

TEST(Observe, HandCases)
{
  SlamState s;
  s.landmarks = {Vec2(1, 1)};
  EXPECT_LT((observe(s)[0] - Vec2(1, 1)).norm(), 1e-15);

  s.x = Vec2(1, 0);
  s.theta = std::numbers::pi / 2;
  EXPECT_LT((observe(s)[0] - Vec2(1, 0)).norm(), 1e-15);
}

TEST(Observe, InsensitiveToReferenceFrameChange)
{
  test::Sampler smp(2);
  for (int n = 0; n < 100; ++n) {
    const SlamState s = smp.state(4);
    const SE2Element g = smp.group_element();
    const auto a = observe(s);
    const auto b = observe(apply_action(GroupActionKind::Left, g, s));
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_LT((a[i] - b[i]).norm(), 1e-12);
    }
  }
}

TEST(Noise, ZeroStdIsExact)
{
  test::Sampler smp(3);
  const SlamState s = smp.state(3);
  const auto z = observe(s);
  const auto zn = noisy_observe(s, NoiseConfig{0.0, 99}, 17);
  for (std::size_t i = 0; i < z.size(); ++i) EXPECT_EQ(z[i], zn[i]);
}

TEST(Noise, DeterministicPerKey)
{
  test::Sampler smp(4);
  const SlamState s = smp.state(3);
  const NoiseConfig cfg{0.2, 1234};
  const auto a = noisy_observe(s, cfg, 5);
  const auto b = noisy_observe(s, cfg, 5);
  const auto c = noisy_observe(s, cfg, 6);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], b[i]);
    EXPECT_NE(a[i], c[i]);
  }
}

TEST(Noise, RejectsNegativeStd)
{
  SlamState s;
  s.landmarks = {Vec2(1, 0)};
  EXPECT_THROW(noisy_observe(s, NoiseConfig{-0.1, 0}, 0), std::invalid_argument);
}

TEST(Noise, EmpiricalStdMatchesRelativeSetting)
{
  // Landmark at unit range; the per-component sample std over 1e5 draws must
  // fall within [0.196, 0.204] (about 4.5 standard errors of the estimate).
  SlamState s;
  s.landmarks = {Vec2(1.0, 0.0)};
  const NoiseConfig cfg{0.2, 42};
  constexpr int kDraws = 100000;
  double sum[2] = {0, 0}, sq[2] = {0, 0};
  for (int k = 0; k < kDraws; ++k) {
    const Vec2 d = noisy_observe(s, cfg, static_cast<std::uint64_t>(k))[0] - Vec2(1.0, 0.0);
    for (int c = 0; c < 2; ++c) {
      sum[c] += d(c);
      sq[c] += d(c) * d(c);
    }
  }
  for (int c = 0; c < 2; ++c) {
    const double mean = sum[c] / kDraws;
    const double sd = std::sqrt(sq[c] / kDraws - mean * mean);
    EXPECT_GE(sd, 0.196);
    EXPECT_LE(sd, 0.204);
  }
}

TEST(Profile, ConstantCircleHasRadiusOneOverV)
{
  // Closed-form unicycle oracle: radius 1/v about (0, 1/v) when starting at the origin heading east.
  SlamState s;
  const double dt = 0.01;
  const auto traj = simulate_plant(s, InputProfile::constant(1.0, 0.5), dt, 1000);
  const Vec2 centre(0.0, 2.0);
  for (std::size_t k = 0; k < traj.size(); k += 50) {
    const auto [x, theta] = test::unicycle_closed_form(Vec2::Zero(), 0.0, 1.0, 0.5, static_cast<double>(k) * dt);
    EXPECT_LT((traj[k].x - x).norm(), 1e-9);
    EXPECT_NEAR(traj[k].theta, theta, 1e-12);
    EXPECT_NEAR((traj[k].x - centre).norm(), 2.0, 1e-9);
  }
}

TEST(Profile, CircleFactoryMatchesSteering)
{
  const Inputs in = InputProfile::circle(1.0, 2.0).eval(3.0);
  EXPECT_EQ(in.u, 1.0);
  EXPECT_EQ(in.v, 0.5);
  EXPECT_THROW(InputProfile::circle(1.0, 0.0), std::invalid_argument);
}

TEST(Profile, StraightLineFollowsHeading)
{
  SlamState s;
  s.theta = 0.3;
  const auto traj = simulate_plant(s, InputProfile::straight(2.0), 0.1, 10);
  EXPECT_LT((traj.back().x - 2.0 * Vec2(std::cos(0.3), std::sin(0.3))).norm(), 1e-12);
  EXPECT_EQ(traj.back().theta, 0.3);
}

TEST(Profile, PiecewiseLookupAndHorizon)
{
  const auto p = InputProfile::piecewise({{0, 5, {1, 0}}, {5, 10, {1, 0.5}}});
  EXPECT_EQ(p.eval(6.0).v, 0.5);
  EXPECT_EQ(p.eval(4.999).v, 0.0);
  EXPECT_EQ(p.eval(5.0).v, 0.5);
  EXPECT_EQ(p.eval(10.0).v, 0.5);
  EXPECT_THROW(p.eval(10.5), std::out_of_range);
  EXPECT_THROW(p.eval(-1.0), std::out_of_range);
  EXPECT_THROW(InputProfile::constant(1, 0).eval(-0.5), std::out_of_range);
}

TEST(Profile, PiecewiseRejectsGapsAndEmpty)
{
  EXPECT_THROW(InputProfile::piecewise({}), std::invalid_argument);
  EXPECT_THROW(InputProfile::piecewise({{0, 5, {1, 0}}, {6, 10, {1, 0}}}), std::invalid_argument);
  EXPECT_THROW(InputProfile::piecewise({{0, 0, {1, 0}}}), std::invalid_argument);
}

TEST(Plant, LandmarksStayExactlyPut)
{
  test::Sampler smp(5);
  const SlamState s = smp.state(4);
  const auto p = InputProfile::piecewise({{0, 3, {1, 0.2}}, {3, 7, {-0.5, 1.0}}, {7, 10, {2, -0.3}}});
  const auto traj = simulate_plant(s, p, 0.01, 1000);
  for (std::size_t i = 0; i < s.landmarks.size(); ++i) {
    EXPECT_EQ(traj.back().landmarks[i], s.landmarks[i]);
  }
}

TEST(Plant, CircleClosesAfterOnePeriod)
{
  SlamState s;
  s.x = Vec2(0.4, -1.0);
  s.theta = 0.7;
  const double u = 1.0, v = 0.5;
  const double period = 2.0 * std::numbers::pi / (u * v);
  const std::size_t steps = 4000;
  const auto traj = simulate_plant(s, InputProfile::constant(u, v), period / steps, steps);
  EXPECT_LT((traj.back().x - s.x).norm(), 1e-9);
}

TEST(Plant, DynamicsEquivariantUnderReferenceFrameChange)
{
  // d/dt phi_g(state) by central differences of the flow equals dynamics(phi_g(state)).
  test::Sampler smp(6);
  for (int n = 0; n < 100; ++n) {
    const SlamState s = smp.state(2);
    const Inputs in = smp.inputs();
    const SE2Element g = smp.group_element();
    const double h = 1e-5;
    const auto fwd = simulate_plant(s, InputProfile::constant(in.u, in.v), h, 1).back();
    const auto bwd = simulate_plant(s, InputProfile::constant(-in.u, in.v), h, 1).back();
    const Vector fd = (apply_action(GroupActionKind::Left, g, fwd).to_vector() -
                       apply_action(GroupActionKind::Left, g, bwd).to_vector()) /
                      (2 * h);
    const Vector direct = dynamics(apply_action(GroupActionKind::Left, g, s), in).to_vector();
    EXPECT_LT((fd - direct).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(StepCount, DividesHorizon)
{
  EXPECT_EQ(step_count(40.0, 0.01), 4000u);
  EXPECT_EQ(step_count(0.0, 0.01), 0u);
  EXPECT_THROW(step_count(1.0, 0.3), std::invalid_argument);
  EXPECT_THROW(step_count(1.0, 0.0), std::invalid_argument);
}
