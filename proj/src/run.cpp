#include "invslam/run.hpp"

#include <iterator>
#include <sstream>

#include <fmt/format.h>

namespace invslam {

namespace {

void add_state_columns(std::vector<std::string>& cols, const std::string& prefix, std::size_t n)
{
  cols.push_back(prefix + "theta");
  cols.push_back(prefix + "x_1");
  cols.push_back(prefix + "x_2");
  for (std::size_t i = 1; i <= n; ++i) {
    cols.push_back(fmt::format("{}p{}_1", prefix, i));
    cols.push_back(fmt::format("{}p{}_2", prefix, i));
  }
}

RunRecord make_record(const ClosedLoop& loop)
{
  RunRecord r;
  r.t = loop.time();
  r.truth = loop.truth();
  r.estimate = loop.estimate();
  r.eta = invariant_state_error(r.estimate, r.truth);
  for (const auto& e : output_error(r.estimate, observe(r.truth))) {
    r.output_error_norms.push_back(e.norm());
  }
  r.gain = loop.applied_gain();
  if (loop.covariance()) {
    r.covariance_diagonal = loop.covariance()->diagonal();
  }
  return r;
}

}  // namespace

std::vector<std::string> run_columns(std::size_t n_landmarks, bool has_covariance)
{
  std::vector<std::string> cols{"t"};
  add_state_columns(cols, "", n_landmarks);
  add_state_columns(cols, "hat_", n_landmarks);
  add_state_columns(cols, "eta_", n_landmarks);
  for (std::size_t i = 1; i <= n_landmarks; ++i) {
    cols.push_back(fmt::format("E{}_norm", i));
  }
  const Eigen::Index dim = state_dim(n_landmarks);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < 2 * n_landmarks; ++c) {
      cols.push_back(fmt::format("L_{}_{}", r, c));
    }
  }
  if (has_covariance) {
    for (Eigen::Index r = 0; r < dim; ++r) {
      cols.push_back(fmt::format("P_{}_{}", r, r));
    }
  }
  return cols;
}

RunLog run_scenario(const Scenario& scenario)
{
  RunLog log;
  log.n_landmarks = scenario.truth.landmarks.size();
  log.has_covariance = std::holds_alternative<RiccatiTuning>(scenario.observer.gain);
  log.columns = run_columns(log.n_landmarks, log.has_covariance);

  const std::size_t steps = step_count(scenario.horizon, scenario.dt);
  if (steps == 0) {
    return log;
  }
  ClosedLoop loop(scenario.truth, scenario.estimate, scenario.profile, scenario.observer, scenario.noise,
                  scenario.dt);
  log.records.reserve(steps / scenario.log_every + 2);
  log.records.push_back(make_record(loop));
  for (std::size_t k = 1; k <= steps; ++k) {
    loop.step();
    if (k % scenario.log_every == 0 || k == steps) {
      log.records.push_back(make_record(loop));
    }
  }
  return log;
}

Vector record_row(const RunLog& log, const RunRecord& r)
{
  std::vector<double> row;
  row.reserve(log.columns.size());
  row.push_back(r.t);
  for (const auto* s : {&r.truth, &r.estimate}) {
    const Vector v = s->to_vector();
    row.insert(row.end(), v.begin(), v.end());
  }
  const Vector eta = r.eta.to_vector();
  row.insert(row.end(), eta.begin(), eta.end());
  row.insert(row.end(), r.output_error_norms.begin(), r.output_error_norms.end());
  for (Eigen::Index i = 0; i < r.gain.rows(); ++i) {
    for (Eigen::Index j = 0; j < r.gain.cols(); ++j) row.push_back(r.gain(i, j));
  }
  if (log.has_covariance) {
    const Vector& d = *r.covariance_diagonal;
    row.insert(row.end(), d.begin(), d.end());
  }
  return Eigen::Map<const Vector>(row.data(), static_cast<Eigen::Index>(row.size()));
}

Matrix run_table(const RunLog& log)
{
  Matrix table(static_cast<Eigen::Index>(log.records.size()), static_cast<Eigen::Index>(log.columns.size()));
  for (std::size_t k = 0; k < log.records.size(); ++k) {
    table.row(static_cast<Eigen::Index>(k)) = record_row(log, log.records[k]).transpose();
  }
  return table;
}

void write_csv(const RunLog& log, std::ostream& out)
{
  fmt::memory_buffer buf;
  for (std::size_t c = 0; c < log.columns.size(); ++c) {
    if (c > 0) buf.push_back(',');
    fmt::format_to(std::back_inserter(buf), "{}", log.columns[c]);
  }
  buf.push_back('\n');

  for (const auto& r : log.records) {
    const Vector row = record_row(log, r);
    for (Eigen::Index i = 0; i < row.size(); ++i) {
      if (i > 0) buf.push_back(',');
      fmt::format_to(std::back_inserter(buf), "{:.17g}", row(i));
    }
    buf.push_back('\n');
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::string to_csv(const RunLog& log)
{
  std::ostringstream os;
  write_csv(log, os);
  return os.str();
}

}  // namespace invslam
