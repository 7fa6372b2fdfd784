#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "invslam/model.hpp"
#include "invslam/observers.hpp"
#include "invslam/riccati.hpp"

namespace invslam {

/// Fixed (3+2N) x 2N gain, used as given by the observer's correction term.
struct ConstantGain
{
  Matrix L;
};

/// Per-landmark positive scalars.
struct Prop1Gain
{
  std::vector<double> k;
};

/**
 * Riccati-driven gain. For ekf the pair (A, C) is the Jacobian of the plant
 * at the current estimate; for iekf it is (0, [0 | -I | I]). The applied gain
 * is -P C^T N^-1, matching the "+ L (zhat - z)" correction convention.
 */
struct RiccatiTuning
{
  Matrix M;
  Matrix N;
  Matrix P0;
};

using GainSpec = std::variant<ConstantGain, Prop1Gain, RiccatiTuning>;

struct ObserverConfig
{
  ObserverKind kind = ObserverKind::Iekf;
  GainSpec gain;
};

/// Rejects gain/observer combinations that make no sense and wrong dimensions.
void validate(const ObserverConfig& cfg, std::size_t n_landmarks);

/// Observer derivative for a given applied gain matrix (ignored for prop1, which uses `k`).
SlamRate observer_rate(const ObserverConfig& cfg, const Estimate& est, const Inputs& input,
                       const Observations& obs, const Matrix& gain);

/**
 * Plant, observer and (for Riccati gains) covariance advanced together by one
 * RK4 integrator with a fixed step. Measurement noise is drawn once per step
 * from the true state at the start of the step and held over the RK4 stages.
 */
class ClosedLoop
{
public:
  ClosedLoop(SlamState truth, Estimate estimate, InputProfile profile, ObserverConfig cfg, NoiseConfig noise,
             double dt);

  /// Advances by dt. Throws RiccatiDivergence or std::runtime_error on a non-finite state.
  void step();

  std::size_t step_index() const { return step_; }
  double time() const { return static_cast<double>(step_) * dt_; }
  const SlamState& truth() const { return truth_; }
  const Estimate& estimate() const { return estimate_; }
  const std::optional<Matrix>& covariance() const { return P_; }

  /// Gain applied at the current state, in the observer's own correction convention.
  Matrix applied_gain() const;

  const ObserverConfig& config() const { return cfg_; }

private:
  Matrix gain_at(const Estimate& est, const Inputs& input, const Matrix* P) const;
  Linearization linearization_at(const Estimate& est, const Inputs& input) const;
  Vector pack() const;
  void unpack(const Vector& y);

  SlamState truth_;
  Estimate estimate_;
  InputProfile profile_;
  ObserverConfig cfg_;
  NoiseConfig noise_;
  double dt_;
  std::size_t step_ = 0;
  std::optional<Matrix> P_;
  Matrix iekf_c_;
  Matrix n_inverse_;
};

}  // namespace invslam
