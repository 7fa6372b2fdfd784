#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "invslam/geom.hpp"
#include "invslam/simulation.hpp"

namespace invslam {

/// (theta~, x~, p~_i) with theta~ = thetahat - theta, x~ = xhat - R x, p~_i = phat_i - R p_i, R = R_theta~.
struct InvariantError
{
  double theta = 0.0;
  Vec2 x = Vec2::Zero();
  std::vector<Vec2> p;

  /// Stacked as (theta~, x~, p~_1, ..., p~_N), same layout as SlamState.
  Vector to_vector() const;
  static InvariantError from_vector(const Eigen::Ref<const Vector>& v);
};

InvariantError invariant_state_error(const Estimate& est, const SlamState& truth);

/// The estimate whose invariant error against `truth` is `eta`.
Estimate estimate_from_error(const InvariantError& eta, const SlamState& truth);

enum class GroupActionKind
{
  Left,   // change of reference frame: (R0 x + x0, theta + theta0, R0 p_i + x0)
  Right,  // change of vehicle frame: X -> X g, P_i -> P_i g
};

SlamState apply_action(GroupActionKind kind, const SE2Element& g, const SlamState& state);

enum class ErrorSide
{
  Left,   // X^-1 Xhat
  Right,  // Xhat X^-1
};

SE2Element group_error(const SE2Element& estimate, const SE2Element& truth, ErrorSide side);

/**
 * Pose-only right-invariant observer on SE(2).
 *
 * The output is the vehicle-frame position of a known beacon, y = X^-1 b,
 * which is right-equivariant. The observer is
 *
 *   Xhat' = Xhat Omega + L(Xhat y - b) Xhat,
 *
 * so the right error eta = Xhat X^-1 obeys eta' = L(eta b - b) eta.
 */
struct RightInvariantObserver
{
  Vec2 beacon = Vec2::Zero();
  /// Maps the innovation to se(2); must vanish at zero.
  std::function<SE2Velocity(const Vec2&)> correction;

  /// Linear correction (angular, linear) = K * innovation.
  static RightInvariantObserver linear(const Vec2& beacon, const Eigen::Matrix<double, 3, 2>& K);

  Vec2 output(const SE2Element& X) const { return X.inverse().act(beacon); }
  /// L(h(eta^-1)) eta in matrix form.
  Mat3 error_flow(const SE2Element& eta) const;
};

struct PoseTrajectories
{
  std::vector<SE2Element> truth;
  std::vector<SE2Element> estimate;
};

/// Truth and observer co-integrated with RK4, steps + 1 samples each.
PoseTrajectories simulate_right_invariant(const RightInvariantObserver& obs, const SE2Element& truth0,
                                          const SE2Element& estimate0, const InputProfile& profile, double dt,
                                          std::size_t steps);

/**
 * Sup-norm mismatch between the central finite-difference derivative of
 * eta = Xhat X^-1 along the sampled pair and the closed-form error flow.
 */
double right_error_flow_check(const RightInvariantObserver& obs, const std::vector<SE2Element>& truth,
                              const std::vector<SE2Element>& estimate, double dt);

/// Invariant-error trajectory of a noiseless closed-loop run started at eta0.
std::vector<InvariantError> error_trajectory(const ObserverConfig& cfg, const InputProfile& profile,
                                             const SlamState& truth0, const InvariantError& eta0, double dt,
                                             std::size_t steps);

/**
 * Runs the same observer from the same invariant error under two input
 * profiles and returns the sup over time and components of the difference
 * between the two invariant-error trajectories. Angles are compared unwrapped.
 */
double autonomy_check(const ObserverConfig& cfg, const std::pair<InputProfile, InputProfile>& profiles,
                      const SlamState& truth0, const InvariantError& eta0, double horizon, double dt);

struct EquivarianceReport
{
  double output_residual = 0.0;    // observation invariance (left) or equivariance (right)
  double dynamics_residual = 0.0;  // dynamics pushed through the action vs dynamics of the image
  double dynamics_fd_residual = 0.0;  // same, with the left side from finite differences of the flow

  /// Componentwise maximum.
  void merge(const EquivarianceReport& other);
};

/// Residuals for one state, input and group element.
EquivarianceReport equivariance_residuals(GroupActionKind kind, const SlamState& state, const Inputs& input,
                                          const SE2Element& g);

/// Random states, inputs and group elements (or a fixed element when given).
EquivarianceReport equivariance_check(GroupActionKind kind, std::size_t samples, std::uint64_t seed,
                                      std::optional<SE2Element> fixed = std::nullopt);

}  // namespace invslam
