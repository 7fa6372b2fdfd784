#include "invslam/state.hpp"

#include <stdexcept>

namespace invslam {

Vector SlamState::to_vector() const
{
  Vector v(dim());
  v(0) = theta;
  v.segment<2>(1) = x;
  for (std::size_t i = 0; i < landmarks.size(); ++i) {
    v.segment<2>(landmark_offset(i)) = landmarks[i];
  }
  return v;
}

SlamState SlamState::from_vector(const Eigen::Ref<const Vector>& v)
{
  if (v.size() < 3 || (v.size() - 3) % 2 != 0) {
    throw std::invalid_argument("SlamState::from_vector: size must be 3 + 2N");
  }
  SlamState s;
  s.theta = v(0);
  s.x = v.segment<2>(1);
  const auto n = static_cast<std::size_t>((v.size() - 3) / 2);
  s.landmarks.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.landmarks[i] = v.segment<2>(landmark_offset(i));
  }
  return s;
}

bool SlamState::all_finite() const { return to_vector().allFinite(); }

Vector stack(const std::vector<Vec2>& vs)
{
  Vector out(2 * static_cast<Eigen::Index>(vs.size()));
  for (std::size_t i = 0; i < vs.size(); ++i) {
    out.segment<2>(2 * static_cast<Eigen::Index>(i)) = vs[i];
  }
  return out;
}

std::vector<Vec2> unstack(const Eigen::Ref<const Vector>& v)
{
  if (v.size() % 2 != 0) {
    throw std::invalid_argument("unstack: odd length");
  }
  std::vector<Vec2> out(static_cast<std::size_t>(v.size() / 2));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = v.segment<2>(2 * static_cast<Eigen::Index>(i));
  }
  return out;
}

}  // namespace invslam
