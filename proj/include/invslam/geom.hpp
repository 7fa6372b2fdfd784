#pragma once

#include <vector>

#include <Eigen/Core>

#include "invslam/state.hpp"

namespace invslam {

/**
 * Planar rotation stored by its (unwrapped) angle.
 *
 * Matrix form
 * -----------
 * [ cos -sin ]
 * [ sin  cos ]
 */
class Rot2
{
public:
  Rot2() = default;
  explicit Rot2(double angle);

  static Rot2 identity() { return Rot2(); }

  double angle() const { return angle_; }
  Mat2 matrix() const;

  Rot2 operator*(const Rot2& other) const { return Rot2(angle_ + other.angle_); }
  Vec2 operator*(const Vec2& v) const;
  Rot2 inverse() const { return Rot2(-angle_); }

private:
  double angle_ = 0.0;
};

/// Throws std::invalid_argument on a non-finite angle.
Rot2 rot2(double theta);

/// Shorthand for the 2x2 matrix of rot2(theta).
Mat2 rot_matrix(double theta);

/**
 * Rigid transform of the plane, g = (R, t), acting on points as R p + t.
 *
 * Homogeneous form
 * ----------------
 * [ R  t ]
 * [ 0  1 ]
 */
struct SE2Element
{
  Rot2 rotation;
  Vec2 translation = Vec2::Zero();

  SE2Element() = default;
  SE2Element(double angle, const Vec2& t);
  SE2Element(const Rot2& r, const Vec2& t) : rotation(r), translation(t) {}

  static SE2Element identity() { return {}; }

  /// Recovers (angle, t) from a homogeneous matrix; the angle lands in (-pi, pi].
  static SE2Element from_matrix(const Mat3& m);

  double angle() const { return rotation.angle(); }
  Mat3 matrix() const;

  SE2Element compose(const SE2Element& other) const;
  SE2Element inverse() const;
  Vec2 act(const Vec2& p) const;

  SE2Element operator*(const SE2Element& other) const { return compose(other); }
};

/// Element of se(2): angular rate and linear velocity.
struct SE2Velocity
{
  double angular = 0.0;
  Vec2 linear = Vec2::Zero();

  /// [ w J  v ; 0 0 0 ] with J the 90 degree generator.
  Mat3 matrix() const;
};

/// e3 x v restricted to the plane: (-v2, v1).
inline Vec2 e3_cross(const Vec2& v) { return {-v.y(), v.x()}; }

/// Matrix embedding of a SLAM state on the product group SE(2) x ... x SE(2).
struct SlamEmbedding
{
  SE2Element vehicle;                  // (R_theta, x)
  std::vector<SE2Element> landmarks;   // (R_theta, p_i)
  SE2Velocity vehicle_velocity;        // (u v, u e1)
  SE2Velocity landmark_velocity;       // (u v, 0)
};

SlamEmbedding slam_embed(const SlamState& state, const Inputs& input);

/// Inverse of slam_embed for the state part; landmark headings are ignored.
SlamState slam_unembed(const SE2Element& vehicle, const std::vector<SE2Element>& landmarks);

/// Wraps an angle into (-pi, pi]. Only used when comparing headings.
double wrap_angle(double a);

}  // namespace invslam
