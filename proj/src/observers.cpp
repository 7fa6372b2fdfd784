#include "invslam/observers.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace invslam {

namespace {

void check_counts(const Estimate& est, const Observations& obs)
{
  if (est.landmarks.size() != obs.size()) {
    throw std::invalid_argument(
        fmt::format("observer: {} landmark estimates but {} observations", est.landmarks.size(), obs.size()));
  }
}

void check_gain(const Estimate& est, const Matrix& gain)
{
  const auto n = static_cast<Eigen::Index>(est.landmarks.size());
  if (gain.rows() != est.dim() || gain.cols() != 2 * n) {
    throw std::invalid_argument(fmt::format("observer: gain is {}x{}, expected {}x{}", gain.rows(), gain.cols(),
                                            est.dim(), 2 * n));
  }
}

}  // namespace

std::string_view to_string(ObserverKind kind)
{
  switch (kind) {
    case ObserverKind::Ekf: return "ekf";
    case ObserverKind::InvariantizedEkf: return "inv-ekf";
    case ObserverKind::Prop1: return "prop1";
    case ObserverKind::Iekf: return "iekf";
  }
  return "unknown";
}

ObserverKind parse_observer_kind(std::string_view name)
{
  if (name == "ekf") return ObserverKind::Ekf;
  if (name == "inv-ekf") return ObserverKind::InvariantizedEkf;
  if (name == "prop1") return ObserverKind::Prop1;
  if (name == "iekf") return ObserverKind::Iekf;
  throw std::invalid_argument(fmt::format("unknown observer '{}' (expected ekf, inv-ekf, prop1, iekf)", name));
}

std::vector<Vec2> output_error(const Estimate& est, const Observations& obs)
{
  check_counts(est, obs);
  const Rot2 r(est.theta);
  std::vector<Vec2> e;
  e.reserve(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    e.push_back((est.landmarks[i] - est.x) - r * obs[i]);
  }
  return e;
}

Vector raw_residual(const Estimate& est, const Observations& obs)
{
  check_counts(est, obs);
  const Observations predicted = observe(est);
  Vector r(2 * static_cast<Eigen::Index>(obs.size()));
  for (std::size_t i = 0; i < obs.size(); ++i) {
    r.segment<2>(2 * static_cast<Eigen::Index>(i)) = predicted[i] - obs[i];
  }
  return r;
}

Linearization ekf_jacobians(const Estimate& est, const Inputs& input)
{
  const Eigen::Index dim = est.dim();
  const auto n = est.landmarks.size();
  Linearization lin{Matrix::Zero(dim, dim), Matrix::Zero(2 * static_cast<Eigen::Index>(n), dim)};

  // d/dtheta of u R_theta e1 is u R_theta e2.
  lin.A.block<2, 1>(1, 0) = input.u * Vec2(-std::sin(est.theta), std::cos(est.theta));

  const Mat2 to_vehicle = rot_matrix(-est.theta);
  const Observations predicted = observe(est);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Index row = 2 * static_cast<Eigen::Index>(i);
    lin.C.block<2, 1>(row, 0) = -e3_cross(predicted[i]);
    lin.C.block<2, 2>(row, 1) = -to_vehicle;
    lin.C.block<2, 2>(row, landmark_offset(i)) = to_vehicle;
  }
  return lin;
}

Matrix iekf_output_matrix(std::size_t n_landmarks)
{
  const Eigen::Index dim = state_dim(n_landmarks);
  Matrix c = Matrix::Zero(2 * static_cast<Eigen::Index>(n_landmarks), dim);
  for (std::size_t i = 0; i < n_landmarks; ++i) {
    const Eigen::Index row = 2 * static_cast<Eigen::Index>(i);
    c.block<2, 2>(row, 1) = -Mat2::Identity();
    c.block<2, 2>(row, landmark_offset(i)) = Mat2::Identity();
  }
  return c;
}

SlamRate ekf_step(const Estimate& est, const Inputs& input, const Observations& obs, const Matrix& gain)
{
  check_counts(est, obs);
  check_gain(est, gain);
  const Vector correction = gain * raw_residual(est, obs);
  SlamRate rate = dynamics(est, input);
  rate.theta += correction(0);
  rate.x += correction.segment<2>(1);
  for (std::size_t i = 0; i < est.landmarks.size(); ++i) {
    rate.landmarks[i] += correction.segment<2>(landmark_offset(i));
  }
  return rate;
}

SlamRate invariantized_step(const Estimate& est, const Inputs& input, const Observations& obs,
                            const Matrix& gain)
{
  check_counts(est, obs);
  check_gain(est, gain);
  const Vector correction = gain * raw_residual(est, obs);
  const Rot2 to_reference(est.theta);
  SlamRate rate = dynamics(est, input);
  rate.theta += correction(0);
  rate.x += to_reference * Vec2(correction.segment<2>(1));
  for (std::size_t i = 0; i < est.landmarks.size(); ++i) {
    rate.landmarks[i] += to_reference * Vec2(correction.segment<2>(landmark_offset(i)));
  }
  return rate;
}

SlamRate prop1_step(const Estimate& est, const Inputs& input, const Observations& obs,
                    std::span<const double> gains)
{
  check_counts(est, obs);
  if (gains.size() != obs.size()) {
    throw std::invalid_argument(
        fmt::format("prop1_step: {} gains for {} landmarks", gains.size(), obs.size()));
  }
  for (double k : gains) {
    if (!(k > 0.0) || !std::isfinite(k)) {
      throw std::invalid_argument("prop1_step: gains must be positive");
    }
  }
  const std::vector<Vec2> e = output_error(est, obs);
  SlamRate rate = dynamics(est, input);
  for (std::size_t i = 0; i < e.size(); ++i) {
    rate.landmarks[i] = -gains[i] * e[i];
  }
  return rate;
}

SlamRate iekf_step(const Estimate& est, const Inputs& input, const Observations& obs, const Matrix& gain)
{
  check_counts(est, obs);
  check_gain(est, gain);
  const Vector l = gain * stack(output_error(est, obs));
  const double l_theta = l(0);
  SlamRate rate = dynamics(est, input);
  rate.theta += l_theta;
  rate.x += l_theta * e3_cross(est.x) + l.segment<2>(1);
  for (std::size_t i = 0; i < est.landmarks.size(); ++i) {
    rate.landmarks[i] += l_theta * e3_cross(est.landmarks[i]) + l.segment<2>(landmark_offset(i));
  }
  return rate;
}

Matrix prop1_gain_matrix(std::span<const double> gains)
{
  const Eigen::Index dim = state_dim(gains.size());
  Matrix l = Matrix::Zero(dim, 2 * static_cast<Eigen::Index>(gains.size()));
  for (std::size_t i = 0; i < gains.size(); ++i) {
    l.block<2, 2>(landmark_offset(i), 2 * static_cast<Eigen::Index>(i)) = -gains[i] * Mat2::Identity();
  }
  return l;
}

}  // namespace invslam
