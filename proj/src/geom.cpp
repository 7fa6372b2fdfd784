#include "invslam/geom.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace invslam {

Rot2::Rot2(double angle) : angle_(angle) {}

Mat2 Rot2::matrix() const { return rot_matrix(angle_); }

Vec2 Rot2::operator*(const Vec2& v) const
{
  const double c = std::cos(angle_), s = std::sin(angle_);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

Rot2 rot2(double theta)
{
  if (!std::isfinite(theta)) {
    throw std::invalid_argument("rot2: non-finite angle");
  }
  return Rot2(theta);
}

Mat2 rot_matrix(double theta)
{
  const double c = std::cos(theta), s = std::sin(theta);
  Mat2 r;
  r << c, -s, s, c;
  return r;
}

SE2Element::SE2Element(double angle, const Vec2& t) : rotation(angle), translation(t) {}

SE2Element SE2Element::from_matrix(const Mat3& m)
{
  return {std::atan2(m(1, 0), m(0, 0)), Vec2(m(0, 2), m(1, 2))};
}

Mat3 SE2Element::matrix() const
{
  Mat3 m = Mat3::Identity();
  m.topLeftCorner<2, 2>() = rotation.matrix();
  m.topRightCorner<2, 1>() = translation;
  return m;
}

SE2Element SE2Element::compose(const SE2Element& other) const
{
  return {rotation * other.rotation, rotation * other.translation + translation};
}

SE2Element SE2Element::inverse() const
{
  const Rot2 inv = rotation.inverse();
  return {inv, -(inv * translation)};
}

Vec2 SE2Element::act(const Vec2& p) const { return rotation * p + translation; }

Mat3 SE2Velocity::matrix() const
{
  Mat3 m = Mat3::Zero();
  m(0, 1) = -angular;
  m(1, 0) = angular;
  m.topRightCorner<2, 1>() = linear;
  return m;
}

SlamEmbedding slam_embed(const SlamState& state, const Inputs& input)
{
  SlamEmbedding e;
  e.vehicle = SE2Element(state.theta, state.x);
  e.landmarks.reserve(state.landmarks.size());
  for (const auto& p : state.landmarks) {
    e.landmarks.emplace_back(state.theta, p);
  }
  const double w = input.u * input.v;
  e.vehicle_velocity = SE2Velocity{w, Vec2(input.u, 0.0)};
  e.landmark_velocity = SE2Velocity{w, Vec2::Zero()};
  return e;
}

SlamState slam_unembed(const SE2Element& vehicle, const std::vector<SE2Element>& landmarks)
{
  SlamState s;
  s.theta = vehicle.angle();
  s.x = vehicle.translation;
  s.landmarks.reserve(landmarks.size());
  for (const auto& l : landmarks) {
    s.landmarks.push_back(l.translation);
  }
  return s;
}

double wrap_angle(double a)
{
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(a + std::numbers::pi, two_pi);
  if (w <= 0.0) {
    w += two_pi;
  }
  return w - std::numbers::pi;
}

}  // namespace invslam
