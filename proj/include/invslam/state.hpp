#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace invslam {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/**
 * Vehicle pose plus N landmark positions, all in the reference frame.
 *
 * Stacked layout (used by every matrix in the library):
 *
 *   [ theta | x1 x2 | p1_1 p1_2 | ... | pN_1 pN_2 ]
 *
 * so the state dimension is 3 + 2N and the heading always sits at index 0.
 * The same struct carries time derivatives of a state (see SlamRate).
 */
struct SlamState
{
  Vec2 x = Vec2::Zero();
  double theta = 0.0;
  std::vector<Vec2> landmarks;

  std::size_t landmark_count() const { return landmarks.size(); }
  Eigen::Index dim() const { return 3 + 2 * static_cast<Eigen::Index>(landmarks.size()); }

  Vector to_vector() const;
  static SlamState from_vector(const Eigen::Ref<const Vector>& v);

  bool all_finite() const;
};

using SlamRate = SlamState;
using Estimate = SlamState;

/// Row offset of landmark i in the stacked layout.
constexpr Eigen::Index landmark_offset(std::size_t i) { return 3 + 2 * static_cast<Eigen::Index>(i); }
constexpr Eigen::Index state_dim(std::size_t n_landmarks) { return 3 + 2 * static_cast<Eigen::Index>(n_landmarks); }

/// Speed u (m/s) and steering v (1/m); the heading rate is u v.
struct Inputs
{
  double u = 0.0;
  double v = 0.0;
};

/// Landmark positions seen from the vehicle frame, one per landmark.
using Observations = std::vector<Vec2>;

Vector stack(const std::vector<Vec2>& vs);
std::vector<Vec2> unstack(const Eigen::Ref<const Vector>& v);

}  // namespace invslam
