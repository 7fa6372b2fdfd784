#pragma once

#include <cstdint>
#include <limits>
#include <variant>
#include <vector>

#include "invslam/geom.hpp"
#include "invslam/state.hpp"

namespace invslam {

/// Unicycle-plus-static-map plant: x' = u R_theta e1, theta' = u v, p_i' = 0.
SlamRate dynamics(const SlamState& state, const Inputs& input);

/// z_i = R_{-theta} (p_i - x).
Observations observe(const SlamState& state);

struct NoiseConfig
{
  double relative_std = 0.0;
  std::uint64_t seed = 0;
};

/**
 * Additive measurement noise for one time step.
 *
 * Each component of z_i gets a zero-mean Gaussian with standard deviation
 * relative_std * |z_i|. Draws are keyed by (seed, step, landmark index), so
 * the result does not depend on call order or thread.
 */
Observations measurement_noise(const Observations& clean, const NoiseConfig& cfg, std::uint64_t step);

Observations noisy_observe(const SlamState& state, const NoiseConfig& cfg, std::uint64_t step);

struct ProfileSegment
{
  double t0 = 0.0;
  double t1 = 0.0;
  Inputs input;
};

/**
 * Time-indexed input schedule. Constant profiles (including circles) are the
 * permanent trajectories of the plant and are defined for every t >= 0.
 * Piecewise schedules use half-open segments [t0, t1) except the last one,
 * which is closed, and must tile [t0_first, t1_last] without gaps.
 */
class InputProfile
{
public:
  static InputProfile constant(double u, double v);
  /// Constant input tracing a circle of the given radius at speed u.
  static InputProfile circle(double u, double radius);
  static InputProfile straight(double u) { return constant(u, 0.0); }
  static InputProfile piecewise(std::vector<ProfileSegment> segments);

  Inputs eval(double t) const;

  bool is_constant() const { return std::holds_alternative<Inputs>(rule_); }
  double start() const;
  double end() const;
  const std::vector<ProfileSegment>& segments() const;

private:
  using Rule = std::variant<Inputs, std::vector<ProfileSegment>>;
  explicit InputProfile(Rule r) : rule_(std::move(r)) {}
  Rule rule_;
};

/// One classical Runge-Kutta step of y' = f(t, y).
template<typename F>
Vector rk4_step(F&& f, double t, const Vector& y, double dt)
{
  const Vector k1 = f(t, y);
  const Vector k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1);
  const Vector k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2);
  const Vector k4 = f(t + dt, y + dt * k3);
  return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Noiseless plant trajectory at t = 0, dt, ..., steps * dt (steps + 1 samples).
std::vector<SlamState> simulate_plant(const SlamState& initial, const InputProfile& profile, double dt,
                                      std::size_t steps);

/// Number of fixed steps covering a horizon; rejects a dt that does not divide it (to 1e-9).
std::size_t step_count(double horizon, double dt);

}  // namespace invslam
