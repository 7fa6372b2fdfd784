#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "invslam/simulation.hpp"

namespace invslam {

/// Malformed or inconsistent scenario description.
class ScenarioError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

struct Scenario
{
  std::string name = "scenario";
  double horizon = 0.0;
  double dt = 0.01;
  std::size_t log_every = 1;
  SlamState truth;
  Estimate estimate;
  InputProfile profile = InputProfile::constant(0.0, 0.0);
  NoiseConfig noise;
  ObserverConfig observer;
  /// Samples with t < transient are excluded from steady-state metrics.
  double transient = 0.0;
};

/**
 * Builds a scenario from its JSON description, filling defaults:
 *
 *   dt 0.01, log_every 1, noise 0, seed 0, observer iekf, transient horizon/4,
 *   estimate pose = true pose, estimate landmarks = first noiseless
 *   observation mapped through the estimated pose, Riccati M = I,
 *   N = relative_std^2 I (I when noise is off), P0 = I, prop1 k_i = 1.
 *
 * Tuning matrices accept a scalar (times identity), a list (diagonal) or a
 * nested list (full matrix). Throws ScenarioError on anything invalid.
 */
Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& path);

/// Fully resolved description; parse_scenario(to_json(s)) reproduces s.
nlohmann::json to_json(const Scenario& s);

std::string sha256_hex(std::string_view text);

/// Hex SHA-256 of the resolved description.
std::string scenario_hash(const Scenario& s);

void set_seed(Scenario& s, std::uint64_t seed);
/// Switches observer kind, resetting the gain to that kind's default when incompatible.
void set_observer(Scenario& s, ObserverKind kind);

}  // namespace invslam
