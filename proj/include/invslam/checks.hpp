#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "invslam/invariance.hpp"
#include "invslam/scenario.hpp"

namespace invslam {

/// Everything autonomy_check needs, bundled so a run can be described and hashed.
struct AutonomySetup
{
  ObserverConfig observer;
  SlamState truth;
  InvariantError eta0;
  std::pair<InputProfile, InputProfile> profiles{InputProfile::constant(1.0, 0.3), InputProfile::straight(1.0)};
  double horizon = 20.0;
  double dt = 0.001;
};

/**
 * Constant gain with the structure used by the autonomy comparisons:
 * L_i = -I on landmark i's own block, L_x = (0.5 / N) I on every block and a
 * small heading row. The linearized output-error dynamics then have
 * eigenvalues -1 and -1.5.
 */
Matrix autonomy_gain(std::size_t n_landmarks);

/**
 * Landmarks evenly spread on a radius-4 circle, vehicle at the origin, eta0
 * drawn from `seed` (|theta~| <= 0.5, other components in [-1, 1]), circle
 * (u = 1, v = 0.3) against a straight line, 20 s at dt = 0.001.
 * prop1 uses k_i = 1; every other kind uses autonomy_gain.
 */
AutonomySetup default_autonomy_setup(ObserverKind kind, std::size_t n_landmarks = 2, std::uint64_t seed = 0);

/**
 * Autonomy setup derived from a scenario: its truth, the invariant error of its
 * initial estimate, its observer and gain, and its input profile set against a
 * straight line at the profile's initial speed, over its horizon and dt.
 */
AutonomySetup autonomy_setup_from(const Scenario& s);

nlohmann::json to_json(const AutonomySetup& setup);

struct AutonomyResult
{
  double deviation = 0.0;
  /// False when a run blew up; deviation is then +inf.
  bool finite = true;
  std::string diagnostic;
};

/// autonomy_check, with non-finite or diverging runs reported rather than thrown.
AutonomyResult run_autonomy(const AutonomySetup& setup);

}  // namespace invslam
