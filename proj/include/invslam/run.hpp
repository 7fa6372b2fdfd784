#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "invslam/invariance.hpp"
#include "invslam/scenario.hpp"

namespace invslam {

struct RunRecord
{
  double t = 0.0;
  SlamState truth;
  Estimate estimate;
  InvariantError eta;
  std::vector<double> output_error_norms;  // |E_i| against the noiseless observation
  Matrix gain;                             // applied gain, observer convention
  std::optional<Vector> covariance_diagonal;
};

struct RunLog
{
  std::vector<std::string> columns;
  std::vector<RunRecord> records;
  std::size_t n_landmarks = 0;
  bool has_covariance = false;
};

/// Column names for a run with n landmarks.
std::vector<std::string> run_columns(std::size_t n_landmarks, bool has_covariance);

/**
 * Co-integrates plant, observer and Riccati state over the scenario horizon.
 * Records t = 0 and every log_every-th step; a zero horizon yields no records.
 * Riccati divergence and non-finite states propagate as exceptions.
 */
RunLog run_scenario(const Scenario& scenario);

/// One record in column order.
Vector record_row(const RunLog& log, const RunRecord& record);
/// All records as a (records x columns) matrix.
Matrix run_table(const RunLog& log);

/// Header row plus one row per record, doubles at 17 significant digits.
void write_csv(const RunLog& log, std::ostream& out);
std::string to_csv(const RunLog& log);

}  // namespace invslam
