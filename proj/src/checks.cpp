#include "invslam/checks.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace invslam {

Matrix autonomy_gain(std::size_t n_landmarks)
{
  const auto n = static_cast<Eigen::Index>(n_landmarks);
  Matrix L = Matrix::Zero(state_dim(n_landmarks), 2 * n);
  const double share = 0.5 / static_cast<double>(n_landmarks);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i % 2 == 0) {
      L.block<1, 2>(0, 2 * i) << 0.1, 0.05;
    } else {
      L.block<1, 2>(0, 2 * i) << -0.05, 0.1;
    }
    L.block<2, 2>(1, 2 * i) = share * Mat2::Identity();
    L.block<2, 2>(landmark_offset(static_cast<std::size_t>(i)), 2 * i) = -Mat2::Identity();
  }
  return L;
}

AutonomySetup default_autonomy_setup(ObserverKind kind, std::size_t n_landmarks, std::uint64_t seed)
{
  if (n_landmarks == 0) {
    throw std::invalid_argument("default_autonomy_setup: at least one landmark is required");
  }
  AutonomySetup setup;
  setup.observer.kind = kind;
  if (kind == ObserverKind::Prop1) {
    setup.observer.gain = Prop1Gain{std::vector<double>(n_landmarks, 1.0)};
  } else {
    setup.observer.gain = ConstantGain{autonomy_gain(n_landmarks)};
  }

  for (std::size_t i = 0; i < n_landmarks; ++i) {
    const double a = 0.3 + 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n_landmarks);
    setup.truth.landmarks.emplace_back(4.0 * std::cos(a), 4.0 * std::sin(a));
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  setup.eta0.theta = 0.5 * unit(rng);
  setup.eta0.x = Vec2(unit(rng), unit(rng));
  for (std::size_t i = 0; i < n_landmarks; ++i) {
    setup.eta0.p.emplace_back(unit(rng), unit(rng));
  }
  return setup;
}

AutonomySetup autonomy_setup_from(const Scenario& s)
{
  AutonomySetup setup;
  setup.observer = s.observer;
  setup.truth = s.truth;
  setup.eta0 = invariant_state_error(s.estimate, s.truth);
  setup.profiles = {s.profile, InputProfile::straight(s.profile.eval(0.0).u)};
  setup.horizon = s.horizon;
  setup.dt = s.dt;
  return setup;
}

nlohmann::json to_json(const AutonomySetup& setup)
{
  // Reuse the scenario serializer for the shared pieces.
  Scenario s;
  s.truth = setup.truth;
  s.estimate = estimate_from_error(setup.eta0, setup.truth);
  s.observer = setup.observer;
  s.horizon = setup.horizon;
  s.dt = setup.dt;
  s.profile = setup.profiles.first;
  nlohmann::json j = to_json(s);
  Scenario other = s;
  other.profile = setup.profiles.second;
  j["profile_b"] = to_json(other).at("profile");
  const Vector eta = setup.eta0.to_vector();
  j["eta0"] = std::vector<double>(eta.begin(), eta.end());
  for (const char* key : {"name", "noise", "seed", "metrics", "log_every"}) {
    j.erase(key);
  }
  return j;
}

AutonomyResult run_autonomy(const AutonomySetup& setup)
{
  AutonomyResult r;
  try {
    r.deviation = autonomy_check(setup.observer, setup.profiles, setup.truth, setup.eta0, setup.horizon, setup.dt);
    r.finite = std::isfinite(r.deviation);
  } catch (const std::runtime_error& e) {
    r.deviation = std::numeric_limits<double>::infinity();
    r.finite = false;
    r.diagnostic = e.what();
  }
  return r;
}

}  // namespace invslam
