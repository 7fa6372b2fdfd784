#include "invslam/invariance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

namespace invslam {

Vector InvariantError::to_vector() const
{
  SlamState s;
  s.theta = theta;
  s.x = x;
  s.landmarks = p;
  return s.to_vector();
}

InvariantError InvariantError::from_vector(const Eigen::Ref<const Vector>& v)
{
  const SlamState s = SlamState::from_vector(v);
  return {s.theta, s.x, s.landmarks};
}

InvariantError invariant_state_error(const Estimate& est, const SlamState& truth)
{
  if (est.landmarks.size() != truth.landmarks.size()) {
    throw std::invalid_argument("invariant_state_error: landmark counts differ");
  }
  InvariantError eta;
  eta.theta = est.theta - truth.theta;
  const Rot2 r(eta.theta);
  eta.x = est.x - r * truth.x;
  eta.p.reserve(truth.landmarks.size());
  for (std::size_t i = 0; i < truth.landmarks.size(); ++i) {
    eta.p.push_back(est.landmarks[i] - r * truth.landmarks[i]);
  }
  return eta;
}

Estimate estimate_from_error(const InvariantError& eta, const SlamState& truth)
{
  if (eta.p.size() != truth.landmarks.size()) {
    throw std::invalid_argument("estimate_from_error: landmark counts differ");
  }
  const Rot2 r(eta.theta);
  Estimate est;
  est.theta = truth.theta + eta.theta;
  est.x = eta.x + r * truth.x;
  est.landmarks.reserve(eta.p.size());
  for (std::size_t i = 0; i < eta.p.size(); ++i) {
    est.landmarks.push_back(eta.p[i] + r * truth.landmarks[i]);
  }
  return est;
}

SlamState apply_action(GroupActionKind kind, const SE2Element& g, const SlamState& state)
{
  SlamState out = state;
  out.theta = state.theta + g.angle();
  if (kind == GroupActionKind::Left) {
    out.x = g.act(state.x);
    for (auto& p : out.landmarks) {
      p = g.act(p);
    }
  } else {
    const Vec2 shift = Rot2(state.theta) * g.translation;
    out.x = state.x + shift;
    for (auto& p : out.landmarks) {
      p += shift;
    }
  }
  return out;
}

SE2Element group_error(const SE2Element& estimate, const SE2Element& truth, ErrorSide side)
{
  return side == ErrorSide::Left ? truth.inverse() * estimate : estimate * truth.inverse();
}

RightInvariantObserver RightInvariantObserver::linear(const Vec2& beacon, const Eigen::Matrix<double, 3, 2>& K)
{
  RightInvariantObserver obs;
  obs.beacon = beacon;
  obs.correction = [K](const Vec2& innovation) {
    const Eigen::Vector3d xi = K * innovation;
    return SE2Velocity{xi(0), xi.tail<2>()};
  };
  return obs;
}

Mat3 RightInvariantObserver::error_flow(const SE2Element& eta) const
{
  const SE2Velocity xi = correction(eta.act(beacon) - beacon);
  return xi.matrix() * eta.matrix();
}

PoseTrajectories simulate_right_invariant(const RightInvariantObserver& obs, const SE2Element& truth0,
                                          const SE2Element& estimate0, const InputProfile& profile, double dt,
                                          std::size_t steps)
{
  const auto unpack = [](const Vector& y, Eigen::Index at) { return SE2Element(y(at), y.segment<2>(at + 1)); };
  const auto rhs = [&](double t, const Vector& y) {
    const Inputs in = profile.eval(t);
    const SE2Element X = unpack(y, 0);
    const SE2Element Xhat = unpack(y, 3);
    const SE2Velocity xi = obs.correction(Xhat.act(obs.output(X)) - obs.beacon);
    Vector dy(6);
    dy(0) = in.u * in.v;
    dy.segment<2>(1) = in.u * (X.rotation * Vec2::UnitX());
    dy(3) = in.u * in.v + xi.angular;
    dy.segment<2>(4) = in.u * (Xhat.rotation * Vec2::UnitX()) + xi.angular * e3_cross(Xhat.translation) + xi.linear;
    return dy;
  };

  PoseTrajectories out;
  out.truth.reserve(steps + 1);
  out.estimate.reserve(steps + 1);
  Vector y(6);
  y << truth0.angle(), truth0.translation, estimate0.angle(), estimate0.translation;
  out.truth.push_back(truth0);
  out.estimate.push_back(estimate0);
  for (std::size_t k = 0; k < steps; ++k) {
    y = rk4_step(rhs, static_cast<double>(k) * dt, y, dt);
    out.truth.push_back(unpack(y, 0));
    out.estimate.push_back(unpack(y, 3));
  }
  return out;
}

double right_error_flow_check(const RightInvariantObserver& obs, const std::vector<SE2Element>& truth,
                              const std::vector<SE2Element>& estimate, double dt)
{
  if (truth.size() != estimate.size()) {
    throw std::invalid_argument(fmt::format("right_error_flow_check: trajectory lengths differ ({} vs {})",
                                            truth.size(), estimate.size()));
  }
  if (truth.size() < 3) {
    throw std::invalid_argument("right_error_flow_check: need at least 3 samples");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("right_error_flow_check: dt must be positive");
  }
  std::vector<Mat3> eta(truth.size());
  for (std::size_t k = 0; k < truth.size(); ++k) {
    eta[k] = estimate[k].matrix() * truth[k].inverse().matrix();
  }
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < eta.size(); ++k) {
    const Mat3 fd = (eta[k + 1] - eta[k - 1]) / (2.0 * dt);
    const Mat3 flow = obs.error_flow(group_error(estimate[k], truth[k], ErrorSide::Right));
    worst = std::max(worst, (fd - flow).cwiseAbs().maxCoeff());
  }
  return worst;
}

std::vector<InvariantError> error_trajectory(const ObserverConfig& cfg, const InputProfile& profile,
                                             const SlamState& truth0, const InvariantError& eta0, double dt,
                                             std::size_t steps)
{
  ClosedLoop loop(truth0, estimate_from_error(eta0, truth0), profile, cfg, NoiseConfig{}, dt);
  std::vector<InvariantError> out;
  out.reserve(steps + 1);
  out.push_back(invariant_state_error(loop.estimate(), loop.truth()));
  for (std::size_t k = 0; k < steps; ++k) {
    loop.step();
    out.push_back(invariant_state_error(loop.estimate(), loop.truth()));
  }
  return out;
}

double autonomy_check(const ObserverConfig& cfg, const std::pair<InputProfile, InputProfile>& profiles,
                      const SlamState& truth0, const InvariantError& eta0, double horizon, double dt)
{
  const std::size_t steps = step_count(horizon, dt);
  const auto a = error_trajectory(cfg, profiles.first, truth0, eta0, dt, steps);
  const auto b = error_trajectory(cfg, profiles.second, truth0, eta0, dt, steps);
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    worst = std::max(worst, (a[k].to_vector() - b[k].to_vector()).cwiseAbs().maxCoeff());
  }
  return worst;
}

namespace {

Mat3 pose_rate_matrix(double theta, double theta_dot, const Vec2& position_dot)
{
  Mat3 m = Mat3::Zero();
  m.topLeftCorner<2, 2>() = theta_dot * SE2Velocity{1.0, Vec2::Zero()}.matrix().topLeftCorner<2, 2>() *
                            rot_matrix(theta);
  m.topRightCorner<2, 1>() = position_dot;
  return m;
}

SlamState flow(const SlamState& s, const Inputs& in, double tau)
{
  const auto f = [&](double, const Vector& y) { return dynamics(SlamState::from_vector(y), in).to_vector(); };
  return SlamState::from_vector(rk4_step(f, 0.0, s.to_vector(), tau));
}

}  // namespace

EquivarianceReport equivariance_residuals(GroupActionKind kind, const SlamState& s, const Inputs& in,
                                          const SE2Element& g)
{
  constexpr double kTau = 1e-4;
  const std::size_t n = s.landmarks.size();
  EquivarianceReport report;

  const SlamState image = apply_action(kind, g, s);
  const Observations z = observe(s);
  const Observations z_image = observe(image);
  const Rot2 expected_turn = kind == GroupActionKind::Left ? Rot2() : g.rotation.inverse();
  for (std::size_t i = 0; i < n; ++i) {
    report.output_residual =
        std::max(report.output_residual, (z_image[i] - expected_turn * z[i]).cwiseAbs().maxCoeff());
  }

  const SlamRate rate = dynamics(s, in);
  const SlamState ahead = apply_action(kind, g, flow(s, in, kTau));
  const SlamState behind = apply_action(kind, g, flow(s, in, -kTau));

  if (kind == GroupActionKind::Left) {
    SlamRate pushed = rate;
    pushed.x = g.rotation * rate.x;
    for (std::size_t i = 0; i < n; ++i) {
      pushed.landmarks[i] = g.rotation * rate.landmarks[i];
    }
    const Vector target = dynamics(image, in).to_vector();
    const Vector fd = (ahead.to_vector() - behind.to_vector()) / (2.0 * kTau);
    report.dynamics_residual = (pushed.to_vector() - target).cwiseAbs().maxCoeff();
    report.dynamics_fd_residual = (fd - target).cwiseAbs().maxCoeff();
    return report;
  }

  // X g solves the left-invariant system driven by g^-1 Omega g.
  const SlamEmbedding emb = slam_embed(s, in);
  const Mat3 G = g.matrix();
  const Mat3 Ginv = g.inverse().matrix();
  const Mat3 omega = Ginv * emb.vehicle_velocity.matrix() * G;
  const Mat3 omega_l = Ginv * emb.landmark_velocity.matrix() * G;

  const Mat3 target = emb.vehicle.matrix() * G * omega;
  const Mat3 pushed = pose_rate_matrix(s.theta, rate.theta, rate.x) * G;
  const Mat3 fd =
      (SE2Element(ahead.theta, ahead.x).matrix() - SE2Element(behind.theta, behind.x).matrix()) / (2.0 * kTau);
  report.dynamics_residual = (pushed - target).cwiseAbs().maxCoeff();
  report.dynamics_fd_residual = (fd - target).cwiseAbs().maxCoeff();

  for (std::size_t i = 0; i < n; ++i) {
    const Mat3 target_l = emb.landmarks[i].matrix() * G * omega_l;
    const Mat3 pushed_l = pose_rate_matrix(s.theta, rate.theta, rate.landmarks[i]) * G;
    const Mat3 fd_l = (SE2Element(ahead.theta, ahead.landmarks[i]).matrix() -
                       SE2Element(behind.theta, behind.landmarks[i]).matrix()) /
                      (2.0 * kTau);
    report.dynamics_residual = std::max(report.dynamics_residual, (pushed_l - target_l).cwiseAbs().maxCoeff());
    report.dynamics_fd_residual = std::max(report.dynamics_fd_residual, (fd_l - target_l).cwiseAbs().maxCoeff());
  }
  return report;
}

void EquivarianceReport::merge(const EquivarianceReport& other)
{
  output_residual = std::max(output_residual, other.output_residual);
  dynamics_residual = std::max(dynamics_residual, other.dynamics_residual);
  dynamics_fd_residual = std::max(dynamics_fd_residual, other.dynamics_fd_residual);
}

EquivarianceReport equivariance_check(GroupActionKind kind, std::size_t samples, std::uint64_t seed,
                                      std::optional<SE2Element> fixed)
{
  constexpr std::size_t kLandmarks = 3;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> pos(-10.0, 10.0);
  std::uniform_real_distribution<double> speed(-2.0, 2.0);
  std::uniform_real_distribution<double> steer(-1.0, 1.0);

  EquivarianceReport report;
  for (std::size_t n = 0; n < samples; ++n) {
    SlamState s;
    s.theta = angle(rng);
    s.x = Vec2(pos(rng), pos(rng));
    for (std::size_t i = 0; i < kLandmarks; ++i) {
      s.landmarks.emplace_back(pos(rng), pos(rng));
    }
    const Inputs in{speed(rng), steer(rng)};
    const SE2Element g = fixed ? *fixed : SE2Element(angle(rng), Vec2(pos(rng), pos(rng)));
    report.merge(equivariance_residuals(kind, s, in, g));
  }
  return report;
}

}  // namespace invslam
