#include "invslam/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace invslam {

namespace {

constexpr double kProfileSlack = 1e-9;

std::uint32_t lo32(std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); }
std::uint32_t hi32(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

}  // namespace

SlamRate dynamics(const SlamState& state, const Inputs& input)
{
  SlamRate rate;
  rate.x = input.u * Vec2(std::cos(state.theta), std::sin(state.theta));
  rate.theta = input.u * input.v;
  rate.landmarks.assign(state.landmarks.size(), Vec2::Zero());
  return rate;
}

Observations observe(const SlamState& state)
{
  const Rot2 to_vehicle(-state.theta);
  Observations z;
  z.reserve(state.landmarks.size());
  for (const auto& p : state.landmarks) {
    z.push_back(to_vehicle * (p - state.x));
  }
  return z;
}

Observations measurement_noise(const Observations& clean, const NoiseConfig& cfg, std::uint64_t step)
{
  if (cfg.relative_std < 0.0) {
    throw std::invalid_argument("measurement_noise: relative_std must be >= 0");
  }
  Observations noise(clean.size(), Vec2::Zero());
  if (cfg.relative_std == 0.0) {
    return noise;
  }
  for (std::size_t i = 0; i < clean.size(); ++i) {
    std::seed_seq key{lo32(cfg.seed), hi32(cfg.seed), lo32(step), hi32(step), lo32(i), hi32(i)};
    std::mt19937_64 engine(key);
    std::normal_distribution<double> gauss(0.0, cfg.relative_std * clean[i].norm());
    const double a = gauss(engine);
    const double b = gauss(engine);
    noise[i] = Vec2(a, b);
  }
  return noise;
}

Observations noisy_observe(const SlamState& state, const NoiseConfig& cfg, std::uint64_t step)
{
  Observations z = observe(state);
  const Observations n = measurement_noise(z, cfg, step);
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] += n[i];
  }
  return z;
}

InputProfile InputProfile::constant(double u, double v)
{
  if (!std::isfinite(u) || !std::isfinite(v)) {
    throw std::invalid_argument("InputProfile: non-finite input");
  }
  return InputProfile(Inputs{u, v});
}

InputProfile InputProfile::circle(double u, double radius)
{
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("InputProfile::circle: radius must be positive");
  }
  return constant(u, 1.0 / radius);
}

InputProfile InputProfile::piecewise(std::vector<ProfileSegment> segments)
{
  if (segments.empty()) {
    throw std::invalid_argument("InputProfile::piecewise: no segments");
  }
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (!std::isfinite(s.t0) || !std::isfinite(s.t1) || !(s.t1 > s.t0)) {
      throw std::invalid_argument("InputProfile::piecewise: segment needs t0 < t1");
    }
    if (!std::isfinite(s.input.u) || !std::isfinite(s.input.v)) {
      throw std::invalid_argument("InputProfile::piecewise: non-finite input");
    }
    if (i > 0 && std::abs(s.t0 - segments[i - 1].t1) > kProfileSlack) {
      throw std::invalid_argument("InputProfile::piecewise: segments must be contiguous");
    }
  }
  return InputProfile(std::move(segments));
}

double InputProfile::start() const
{
  if (is_constant()) {
    return 0.0;
  }
  return std::get<std::vector<ProfileSegment>>(rule_).front().t0;
}

double InputProfile::end() const
{
  if (is_constant()) {
    return std::numeric_limits<double>::infinity();
  }
  return std::get<std::vector<ProfileSegment>>(rule_).back().t1;
}

const std::vector<ProfileSegment>& InputProfile::segments() const
{
  static const std::vector<ProfileSegment> none;
  if (is_constant()) {
    return none;
  }
  return std::get<std::vector<ProfileSegment>>(rule_);
}

Inputs InputProfile::eval(double t) const
{
  if (!std::isfinite(t) || t < start() - kProfileSlack || t > end() + kProfileSlack) {
    throw std::out_of_range("InputProfile::eval: t outside profile horizon");
  }
  if (const auto* c = std::get_if<Inputs>(&rule_)) {
    return *c;
  }
  const auto& segs = std::get<std::vector<ProfileSegment>>(rule_);
  for (const auto& s : segs) {
    if (t < s.t1) {
      return s.input;
    }
  }
  return segs.back().input;
}

std::vector<SlamState> simulate_plant(const SlamState& initial, const InputProfile& profile, double dt,
                                      std::size_t steps)
{
  std::vector<SlamState> traj;
  traj.reserve(steps + 1);
  traj.push_back(initial);
  Vector y = initial.to_vector();
  const auto f = [&](double t, const Vector& s) {
    return dynamics(SlamState::from_vector(s), profile.eval(t)).to_vector();
  };
  for (std::size_t k = 0; k < steps; ++k) {
    y = rk4_step(f, static_cast<double>(k) * dt, y, dt);
    traj.push_back(SlamState::from_vector(y));
  }
  return traj;
}

std::size_t step_count(double horizon, double dt)
{
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("step_count: dt must be positive");
  }
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("step_count: horizon must be >= 0");
  }
  const double n = std::round(horizon / dt);
  if (std::abs(n * dt - horizon) > 1e-9 * std::max(1.0, horizon)) {
    throw std::invalid_argument("step_count: dt must divide the horizon");
  }
  return static_cast<std::size_t>(n);
}

}  // namespace invslam
