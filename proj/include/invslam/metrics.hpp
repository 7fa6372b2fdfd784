#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "invslam/geom.hpp"
#include "invslam/run.hpp"

namespace invslam {

struct Alignment
{
  SE2Element transform;  // maps estimates onto truth
  double rms = 0.0;
};

/**
 * Rigid (rotation + translation, no scale) least-squares alignment of
 * corresponding point sets. Rejects fewer than two correspondences or a point
 * set whose points all coincide, since the rotation is then undetermined.
 */
Alignment aligned_rms(std::span<const Vec2> estimated, std::span<const Vec2> truth);

/// Vehicle positions and landmark estimates after the transient, paired with truth.
Alignment trajectory_alignment(const RunLog& log, double transient);

/**
 * Relative gain change over fixed windows:
 *   |L(t + w) - L(t)|_F / max(1, |L(t)|_F)
 * evaluated at every logged t with t + w also logged.
 */
struct GainVariation
{
  std::vector<double> t;
  std::vector<double> value;
};

GainVariation gain_variation(const RunLog& log, double window = 1.0);

constexpr double kGainSettleThreshold = 1e-3;

/// First t after which every window stays below the threshold; empty if never.
std::optional<double> settle_time(const GainVariation& gv, double threshold = kGainSettleThreshold);

struct RunMetrics
{
  double aligned_rms = 0.0;
  double alignment_angle = 0.0;
  double gain_variation_sup = 0.0;             // over the whole run
  double gain_variation_min = 0.0;             // over the whole run
  double gain_variation_sup_after_transient = 0.0;
  std::optional<double> gain_settle_time;
  double output_error_rms = 0.0;               // after the transient, all landmarks
  double final_output_error = 0.0;             // max over landmarks at the last record
  std::optional<double> final_heading_variance;  // P(theta, theta), reported apart from the rest
};

RunMetrics compute_metrics(const RunLog& log, double transient);

struct ComparisonEntry
{
  std::string name;
  Scenario scenario;
  RunLog log;
  RunMetrics metrics;
};

struct Comparison
{
  std::vector<ComparisonEntry> entries;
};

/**
 * Runs every scenario (on worker threads; results are assembled in input
 * order) and computes metrics. Scenarios must share horizon and dt.
 * Duplicate names are disambiguated with a "#k" suffix.
 */
Comparison compare(const std::vector<Scenario>& scenarios, std::size_t workers = 0);

/**
 * metric,<name_1>,...,<name_k> rows; with more than one scenario a contrast
 * section follows with rows "delta.<metric>" holding value_j - value_1.
 */
void write_comparison_csv(const Comparison& c, std::ostream& out);

}  // namespace invslam
