#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "invslam/model.hpp"

namespace invslam {

enum class ObserverKind
{
  Ekf,               // raw residual correction in the vehicle frame
  InvariantizedEkf,  // same gains, corrections rotated into the reference frame
  Prop1,             // constant per-landmark gains on the invariant output error
  Iekf,              // invariant EKF with autonomous error dynamics
};

std::string_view to_string(ObserverKind kind);
/// Accepts "ekf", "inv-ekf", "prop1", "iekf"; throws std::invalid_argument otherwise.
ObserverKind parse_observer_kind(std::string_view name);

/// E_i = R_thetahat (zhat_i - z_i) = (phat_i - xhat) - R_thetahat z_i.
std::vector<Vec2> output_error(const Estimate& est, const Observations& obs);

/// Stacked raw residuals (zhat_k - z_k) in landmark order.
Vector raw_residual(const Estimate& est, const Observations& obs);

struct Linearization
{
  Matrix A;  // (3+2N) x (3+2N)
  Matrix C;  // 2N x (3+2N)
};

/// Jacobians of the plant and observation maps at the estimate.
Linearization ekf_jacobians(const Estimate& est, const Inputs& input);

/// Observation Jacobian of the invariant error system at eta = 0: [0 | -I | I] per landmark.
Matrix iekf_output_matrix(std::size_t n_landmarks);

/// Model copy plus L (zhat - z). L is (3+2N) x 2N with rows in stacked order.
SlamRate ekf_step(const Estimate& est, const Inputs& input, const Observations& obs, const Matrix& gain);

/// As ekf_step, but the position and landmark corrections are premultiplied by R_thetahat.
SlamRate invariantized_step(const Estimate& est, const Inputs& input, const Observations& obs,
                            const Matrix& gain);

/**
 * Dead-reckoned pose with landmark correction -k_i R_thetahat (zhat_i - z_i).
 *
 * With this sign the invariant output error obeys Y_i' = -k_i Y_i exactly on
 * the noiseless plant, whatever the inputs.
 */
SlamRate prop1_step(const Estimate& est, const Inputs& input, const Observations& obs,
                    std::span<const double> gains);

/**
 * Invariant EKF correction driven by the invariant output error E.
 *
 * With l = L E split into (l_theta, l_x, l_1..l_N):
 *   thetahat' = u v + l_theta
 *   xhat'     = u R e1 + l_theta e3 x xhat + l_x
 *   phat_i'   = l_theta e3 x phat_i + l_i
 */
SlamRate iekf_step(const Estimate& est, const Inputs& input, const Observations& obs, const Matrix& gain);

/// Equivalent (3+2N) x 2N gain matrix of the per-landmark gains, in the invariantized convention.
Matrix prop1_gain_matrix(std::span<const double> gains);

}  // namespace invslam
