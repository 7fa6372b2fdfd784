#include "invslam/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <thread>

#include <Eigen/Geometry>
#include <fmt/format.h>

namespace invslam {

namespace {

bool coincident(std::span<const Vec2> pts)
{
  Vec2 mean = Vec2::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  double spread = 0.0;
  for (const auto& p : pts) spread = std::max(spread, (p - mean).norm());
  return spread <= 1e-12 * std::max(1.0, mean.norm());
}

}  // namespace

Alignment aligned_rms(std::span<const Vec2> estimated, std::span<const Vec2> truth)
{
  if (estimated.size() != truth.size()) {
    throw std::invalid_argument("aligned_rms: point sets differ in size");
  }
  if (truth.size() < 2) {
    throw std::invalid_argument("aligned_rms: need at least two correspondences to fix a rotation");
  }
  if (coincident(truth) || coincident(estimated)) {
    throw std::invalid_argument("aligned_rms: degenerate point set (all points coincide)");
  }
  const auto n = static_cast<Eigen::Index>(truth.size());
  Eigen::Matrix2Xd src(2, n), dst(2, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    src.col(i) = estimated[static_cast<std::size_t>(i)];
    dst.col(i) = truth[static_cast<std::size_t>(i)];
  }
  const Mat3 T = Eigen::umeyama(src, dst, false);
  Alignment a;
  a.transform = SE2Element::from_matrix(T);
  double sq = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    sq += (a.transform.act(src.col(i)) - dst.col(i)).squaredNorm();
  }
  a.rms = std::sqrt(sq / static_cast<double>(n));
  return a;
}

Alignment trajectory_alignment(const RunLog& log, double transient)
{
  std::vector<Vec2> est, truth;
  for (const auto& r : log.records) {
    if (r.t < transient) continue;
    est.push_back(r.estimate.x);
    truth.push_back(r.truth.x);
    for (std::size_t i = 0; i < r.truth.landmarks.size(); ++i) {
      est.push_back(r.estimate.landmarks[i]);
      truth.push_back(r.truth.landmarks[i]);
    }
  }
  return aligned_rms(est, truth);
}

GainVariation gain_variation(const RunLog& log, double window)
{
  GainVariation gv;
  if (log.records.size() < 2) {
    return gv;
  }
  const double spacing = log.records[1].t - log.records[0].t;
  const auto lag = static_cast<std::size_t>(std::max(1L, std::lround(window / spacing)));
  for (std::size_t k = 0; k + lag < log.records.size(); ++k) {
    const Matrix& a = log.records[k].gain;
    const Matrix& b = log.records[k + lag].gain;
    gv.t.push_back(log.records[k].t);
    gv.value.push_back((b - a).norm() / std::max(1.0, a.norm()));
  }
  return gv;
}

std::optional<double> settle_time(const GainVariation& gv, double threshold)
{
  if (gv.value.empty()) {
    return std::nullopt;
  }
  for (std::size_t k = gv.value.size(); k-- > 0;) {
    if (gv.value[k] >= threshold) {
      if (k + 1 == gv.value.size()) return std::nullopt;
      return gv.t[k + 1];
    }
  }
  return gv.t.front();
}

RunMetrics compute_metrics(const RunLog& log, double transient)
{
  RunMetrics m;
  if (log.records.empty()) {
    m.aligned_rms = std::numeric_limits<double>::quiet_NaN();
    return m;
  }
  const Alignment a = trajectory_alignment(log, transient);
  m.aligned_rms = a.rms;
  m.alignment_angle = a.transform.angle();

  const GainVariation gv = gain_variation(log);
  if (!gv.value.empty()) {
    m.gain_variation_sup = *std::max_element(gv.value.begin(), gv.value.end());
    m.gain_variation_min = *std::min_element(gv.value.begin(), gv.value.end());
    for (std::size_t k = 0; k < gv.value.size(); ++k) {
      if (gv.t[k] >= transient) {
        m.gain_variation_sup_after_transient = std::max(m.gain_variation_sup_after_transient, gv.value[k]);
      }
    }
  }
  m.gain_settle_time = settle_time(gv);

  double sq = 0.0;
  std::size_t count = 0;
  for (const auto& r : log.records) {
    if (r.t < transient) continue;
    for (double e : r.output_error_norms) {
      sq += e * e;
      ++count;
    }
  }
  m.output_error_rms = count > 0 ? std::sqrt(sq / static_cast<double>(count)) : 0.0;
  const auto& last = log.records.back();
  m.final_output_error = *std::max_element(last.output_error_norms.begin(), last.output_error_norms.end());
  if (last.covariance_diagonal) {
    m.final_heading_variance = (*last.covariance_diagonal)(0);
  }
  return m;
}

Comparison compare(const std::vector<Scenario>& scenarios, std::size_t workers)
{
  if (scenarios.empty()) {
    throw std::invalid_argument("compare: no scenarios");
  }
  for (const auto& s : scenarios) {
    if (s.horizon != scenarios.front().horizon || s.dt != scenarios.front().dt) {
      throw std::invalid_argument(fmt::format("compare: scenario '{}' has horizon/dt {}/{} but '{}' has {}/{}",
                                              s.name, s.horizon, s.dt, scenarios.front().name,
                                              scenarios.front().horizon, scenarios.front().dt));
    }
  }

  Comparison c;
  c.entries.resize(scenarios.size());
  std::map<std::string, int> seen;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const int k = ++seen[scenarios[i].name];
    c.entries[i].name = k == 1 ? scenarios[i].name : fmt::format("{}#{}", scenarios[i].name, k);
    c.entries[i].scenario = scenarios[i];
  }

  if (workers == 0) {
    workers = std::max(1u, std::thread::hardware_concurrency());
  }
  workers = std::min(workers, scenarios.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(scenarios.size());
  const auto work = [&] {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) {
      try {
        auto& e = c.entries[i];
        e.log = run_scenario(e.scenario);
        e.metrics = compute_metrics(e.log, e.scenario.transient);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return c;
}

void write_comparison_csv(const Comparison& c, std::ostream& out)
{
  static constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  const auto opt = [](const std::optional<double>& v) { return v.value_or(nan); };
  const std::vector<std::pair<const char*, std::function<double(const RunMetrics&)>>> rows{
      {"aligned_rms", [](const RunMetrics& m) { return m.aligned_rms; }},
      {"alignment_angle", [](const RunMetrics& m) { return m.alignment_angle; }},
      {"gain_variation_sup", [](const RunMetrics& m) { return m.gain_variation_sup; }},
      {"gain_variation_min", [](const RunMetrics& m) { return m.gain_variation_min; }},
      {"gain_variation_sup_after_transient", [](const RunMetrics& m) { return m.gain_variation_sup_after_transient; }},
      {"gain_settle_time", [&](const RunMetrics& m) { return opt(m.gain_settle_time); }},
      {"output_error_rms", [](const RunMetrics& m) { return m.output_error_rms; }},
      {"final_output_error", [](const RunMetrics& m) { return m.final_output_error; }},
      {"final_heading_variance", [&](const RunMetrics& m) { return opt(m.final_heading_variance); }},
  };

  std::string text = "metric";
  for (const auto& e : c.entries) text += "," + e.name;
  text += '\n';
  for (const auto& [name, get] : rows) {
    text += name;
    for (const auto& e : c.entries) text += fmt::format(",{:.17g}", get(e.metrics));
    text += '\n';
  }
  if (c.entries.size() > 1) {
    for (const auto& [name, get] : rows) {
      text += fmt::format("delta.{}", name);
      const double base = get(c.entries.front().metrics);
      for (const auto& e : c.entries) {
        const double v = get(e.metrics);
        const bool same = v == base || (std::isnan(v) && std::isnan(base));
        text += fmt::format(",{:.17g}", same ? 0.0 : v - base);
      }
      text += '\n';
    }
  }
  out << text;
}

}  // namespace invslam
