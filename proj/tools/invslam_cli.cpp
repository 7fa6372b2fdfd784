// Command-line front end: simulate, compare, autonomy-check, equivariance-check, riccati.
//
// Exit codes: 0 success / check passed, 1 check failed or run aborted, 2 invalid input.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "invslam/checks.hpp"
#include "invslam/invariance.hpp"
#include "invslam/metrics.hpp"
#include "invslam/run.hpp"
#include "invslam/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace invslam;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kInvalid = 2;

class InvalidInput : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct Common
{
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c, bool scenario_required)
{
  auto* opt = cmd->add_option("--scenario", c.scenario, "Scenario file (JSON)");
  if (scenario_required) {
    opt->required();
  }
  cmd->add_option("--out", c.out, "Output directory")->required();
  cmd->add_option("--seed", c.seed, "Override the noise/sampling seed");
}

fs::path prepare_out(const std::string& dir)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw InvalidInput(fmt::format("cannot create output directory '{}'", dir));
  }
  return fs::path(dir);
}

void write_file(const fs::path& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    throw InvalidInput(fmt::format("cannot write '{}'", path.string()));
  }
}

json manifest_base(const std::string& command, std::uint64_t seed, const std::string& hash)
{
  return {{"tool", "invslam"}, {"version", INVSLAM_VERSION}, {"command", command}, {"seed", seed},
          {"scenario_hash", hash}};
}

void write_manifest(const fs::path& dir, const json& manifest)
{
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

std::string fmt17(double v) { return fmt::format("{:.17g}", v); }

std::string sanitize(const std::string& name)
{
  std::string s = name;
  for (char& ch : s) {
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_' && ch != '.') {
      ch = '_';
    }
  }
  return s;
}

Scenario load_with_overrides(const std::string& path, const std::optional<std::uint64_t>& seed,
                             const std::optional<std::string>& observer)
{
  Scenario s = load_scenario(path);
  if (seed) {
    set_seed(s, *seed);
  }
  if (observer) {
    set_observer(s, parse_observer_kind(*observer));
  }
  return s;
}

std::string metrics_summary(const RunMetrics& m)
{
  return fmt::format("aligned_rms={:.6g} gain_variation_after_transient={:.6g} output_error_rms={:.6g}", m.aligned_rms,
                     m.gain_variation_sup_after_transient, m.output_error_rms);
}

// ---------------------------------------------------------------------------

struct SimulateArgs
{
  Common common;
  std::optional<std::string> observer;
};

int cmd_simulate(const SimulateArgs& a)
{
  const Scenario s = load_with_overrides(a.common.scenario, a.common.seed, a.observer);
  const fs::path dir = prepare_out(a.common.out);
  const RunLog log = run_scenario(s);
  write_file(dir / "run.csv", to_csv(log));

  json manifest = manifest_base("simulate", s.noise.seed, scenario_hash(s));
  manifest["scenario"] = to_json(s);
  manifest["outputs"] = json::array({"run.csv"});
  if (log.records.size() >= 2) {
    Comparison c;
    c.entries.push_back({s.name, s, log, compute_metrics(log, s.transient)});
    std::ostringstream m;
    write_comparison_csv(c, m);
    write_file(dir / "metrics.csv", m.str());
    manifest["outputs"].push_back("metrics.csv");
    std::cout << fmt::format("simulate {} observer={} records={} {}\n", s.name, to_string(s.observer.kind),
                             log.records.size(), metrics_summary(c.entries[0].metrics));
  } else {
    std::cout << fmt::format("simulate {} observer={} records={}\n", s.name, to_string(s.observer.kind),
                             log.records.size());
  }
  manifest["status"] = "ok";
  write_manifest(dir, manifest);
  return kPass;
}

// ---------------------------------------------------------------------------

struct CompareArgs
{
  std::vector<std::string> scenarios;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> observers;
  std::size_t workers = 0;
};

int cmd_compare(const CompareArgs& a)
{
  std::vector<Scenario> list;
  for (const auto& path : a.scenarios) {
    if (a.observers.empty()) {
      list.push_back(load_with_overrides(path, a.seed, std::nullopt));
      continue;
    }
    for (const auto& kind : a.observers) {
      Scenario s = load_with_overrides(path, a.seed, kind);
      s.name += "." + kind;
      list.push_back(std::move(s));
    }
  }
  const fs::path dir = prepare_out(a.out);
  const Comparison c = compare(list, a.workers);

  std::ostringstream table;
  write_comparison_csv(c, table);
  write_file(dir / "comparison.csv", table.str());

  json manifest = manifest_base("compare", a.seed.value_or(list.front().noise.seed),
                                sha256_hex([&] {
                                  std::string all;
                                  for (const auto& e : c.entries) all += scenario_hash(e.scenario);
                                  return all;
                                }()));
  manifest["outputs"] = json::array({"comparison.csv"});
  manifest["runs"] = json::array();
  fs::create_directories(dir / "runs");
  for (std::size_t i = 0; i < c.entries.size(); ++i) {
    const auto& e = c.entries[i];
    const std::string file = fmt::format("runs/{:02d}_{}.csv", i + 1, sanitize(e.name));
    write_file(dir / file, to_csv(e.log));
    manifest["outputs"].push_back(file);
    manifest["runs"].push_back({{"name", e.name},
                                {"scenario_hash", scenario_hash(e.scenario)},
                                {"seed", e.scenario.noise.seed},
                                {"scenario", to_json(e.scenario)}});
    std::cout << fmt::format("compare {} {}\n", e.name, metrics_summary(e.metrics));
  }
  manifest["status"] = "ok";
  write_manifest(dir, manifest);
  return kPass;
}

// ---------------------------------------------------------------------------

struct AutonomyArgs
{
  Common common;
  std::optional<std::string> observer;
  std::size_t landmarks = 2;
  std::optional<double> horizon;
  std::optional<double> dt;
  double tolerance = 1e-6;
  std::size_t log_every = 100;
};

int cmd_autonomy(const AutonomyArgs& a)
{
  const ObserverKind kind = parse_observer_kind(a.observer.value_or("iekf"));
  AutonomySetup setup;
  std::uint64_t seed = a.common.seed.value_or(0);
  if (!a.common.scenario.empty()) {
    Scenario s = load_with_overrides(a.common.scenario, a.common.seed, a.observer);
    seed = s.noise.seed;
    setup = autonomy_setup_from(s);
  } else {
    if (a.landmarks == 0) {
      throw InvalidInput("--landmarks must be at least 1");
    }
    setup = default_autonomy_setup(kind, a.landmarks, seed);
  }
  if (a.horizon) setup.horizon = *a.horizon;
  if (a.dt) setup.dt = *a.dt;
  if (!(setup.dt > 0.0) || !(setup.horizon > 0.0)) {
    throw InvalidInput("horizon and dt must be positive");
  }
  if (a.log_every == 0) {
    throw InvalidInput("--log-every must be at least 1");
  }
  validate(setup.observer, setup.truth.landmarks.size());
  const std::size_t steps = step_count(setup.horizon, setup.dt);
  const fs::path dir = prepare_out(a.common.out);

  double deviation = 0.0;
  std::string diagnostic;
  std::string csv = "t,deviation\n";
  try {
    const auto first = error_trajectory(setup.observer, setup.profiles.first, setup.truth, setup.eta0, setup.dt, steps);
    const auto second =
        error_trajectory(setup.observer, setup.profiles.second, setup.truth, setup.eta0, setup.dt, steps);
    for (std::size_t k = 0; k < first.size(); ++k) {
      const double d = (first[k].to_vector() - second[k].to_vector()).cwiseAbs().maxCoeff();
      deviation = std::max(deviation, d);
      if (k % a.log_every == 0 || k + 1 == first.size()) {
        csv += fmt17(static_cast<double>(k) * setup.dt) + "," + fmt17(d) + "\n";
      }
    }
  } catch (const std::runtime_error& e) {
    deviation = std::numeric_limits<double>::infinity();
    diagnostic = e.what();
  }
  write_file(dir / "autonomy.csv", csv);

  const bool pass = std::isfinite(deviation) && deviation < a.tolerance;
  const json resolved = to_json(setup);
  json manifest = manifest_base("autonomy-check", seed, sha256_hex(resolved.dump()));
  manifest["setup"] = resolved;
  manifest["outputs"] = json::array({"autonomy.csv"});
  manifest["deviation"] = std::isfinite(deviation) ? json(deviation) : json("inf");
  manifest["tolerance"] = a.tolerance;
  manifest["status"] = pass ? "pass" : "fail";
  if (!diagnostic.empty()) manifest["diagnostic"] = diagnostic;
  write_manifest(dir, manifest);

  std::cout << fmt::format("autonomy-check observer={} deviation={:.6g} tolerance={:g} {}\n",
                           to_string(setup.observer.kind), deviation, a.tolerance, pass ? "PASS" : "FAIL");
  if (!diagnostic.empty()) std::cout << "  " << diagnostic << "\n";
  return pass ? kPass : kFail;
}

// ---------------------------------------------------------------------------

struct EquivarianceArgs
{
  Common common;
  std::string action = "both";
  std::size_t samples = 100;
};

constexpr double kExactTolerance = 1e-9;
constexpr double kFdTolerance = 1e-6;

int cmd_equivariance(const EquivarianceArgs& a)
{
  std::vector<GroupActionKind> kinds;
  if (a.action == "left" || a.action == "both") kinds.push_back(GroupActionKind::Left);
  if (a.action == "right" || a.action == "both") kinds.push_back(GroupActionKind::Right);
  if (kinds.empty()) {
    throw InvalidInput(fmt::format("unknown action '{}'", a.action));
  }
  if (a.samples == 0) {
    throw InvalidInput("--samples must be at least 1");
  }

  std::uint64_t seed = a.common.seed.value_or(0);
  std::optional<Scenario> scenario;
  std::string hash;
  json resolved = {{"action", a.action}, {"samples", a.samples}, {"seed", seed}};
  if (!a.common.scenario.empty()) {
    scenario = load_with_overrides(a.common.scenario, a.common.seed, std::nullopt);
    seed = scenario->noise.seed;
    resolved["seed"] = seed;
    resolved["scenario"] = to_json(*scenario);
  }
  hash = sha256_hex(resolved.dump());
  const fs::path dir = prepare_out(a.common.out);

  std::string csv = "action,samples,output_residual,dynamics_residual,dynamics_fd_residual,status\n";
  bool all_pass = true;
  json results = json::array();
  for (const auto kind : kinds) {
    EquivarianceReport r;
    if (scenario) {
      // States along the scenario's true trajectory, random group elements.
      const std::size_t steps = step_count(scenario->horizon, scenario->dt);
      const auto traj = simulate_plant(scenario->truth, scenario->profile, scenario->dt, steps);
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi), pos(-10.0, 10.0);
      for (std::size_t n = 0; n < a.samples; ++n) {
        const std::size_t k = steps == 0 ? 0 : (n * steps) / std::max<std::size_t>(1, a.samples - 1);
        const SE2Element g(angle(rng), Vec2(pos(rng), pos(rng)));
        const double t = std::min(static_cast<double>(k) * scenario->dt, scenario->horizon);
        r.merge(equivariance_residuals(kind, traj[std::min(k, steps)], scenario->profile.eval(t), g));
      }
    } else {
      r = equivariance_check(kind, a.samples, seed);
    }
    const bool pass = r.output_residual < kExactTolerance && r.dynamics_residual < kExactTolerance &&
                      r.dynamics_fd_residual < kFdTolerance;
    all_pass = all_pass && pass;
    const char* name = kind == GroupActionKind::Left ? "left" : "right";
    csv += fmt::format("{},{},{},{},{},{}\n", name, a.samples, fmt17(r.output_residual), fmt17(r.dynamics_residual),
                       fmt17(r.dynamics_fd_residual), pass ? "pass" : "fail");
    results.push_back({{"action", name},
                       {"output_residual", r.output_residual},
                       {"dynamics_residual", r.dynamics_residual},
                       {"dynamics_fd_residual", r.dynamics_fd_residual},
                       {"status", pass ? "pass" : "fail"}});
    std::cout << fmt::format("equivariance-check action={} output={:.3g} dynamics={:.3g} dynamics_fd={:.3g} {}\n", name,
                             r.output_residual, r.dynamics_residual, r.dynamics_fd_residual, pass ? "PASS" : "FAIL");
  }
  write_file(dir / "equivariance.csv", csv);

  json manifest = manifest_base("equivariance-check", seed, hash);
  manifest["setup"] = resolved;
  manifest["outputs"] = json::array({"equivariance.csv"});
  manifest["results"] = results;
  manifest["tolerances"] = {{"exact", kExactTolerance}, {"finite_difference", kFdTolerance}};
  manifest["status"] = all_pass ? "pass" : "fail";
  write_manifest(dir, manifest);
  return all_pass ? kPass : kFail;
}

// ---------------------------------------------------------------------------

struct RiccatiArgs
{
  Common common;
  std::string mode = "auto";
};

int cmd_riccati(const RiccatiArgs& a)
{
  Scenario s = load_with_overrides(a.common.scenario, a.common.seed, std::nullopt);
  ObserverKind kind = s.observer.kind;
  if (a.mode == "ekf") {
    kind = ObserverKind::Ekf;
  } else if (a.mode == "iekf") {
    kind = ObserverKind::Iekf;
  } else if (a.mode != "auto") {
    throw InvalidInput(fmt::format("unknown mode '{}'", a.mode));
  }
  set_observer(s, kind);
  const auto* tuning = std::get_if<RiccatiTuning>(&s.observer.gain);
  if (tuning == nullptr || (kind != ObserverKind::Ekf && kind != ObserverKind::Iekf)) {
    throw InvalidInput("riccati needs an ekf or iekf scenario with a Riccati gain");
  }
  const std::size_t n = s.truth.landmarks.size();
  const std::size_t steps = step_count(s.horizon, s.dt);
  const Matrix C_fixed = iekf_output_matrix(n);
  const LinearizationSource source = kind == ObserverKind::Iekf
                                         ? fixed_linearization(C_fixed)
                                         : trajectory_linearization(s.estimate, s.profile, s.dt, steps);
  const fs::path dir = prepare_out(a.common.out);

  json manifest = manifest_base("riccati", s.noise.seed, scenario_hash(s));
  manifest["scenario"] = to_json(s);
  manifest["mode"] = to_string(kind);
  manifest["outputs"] = json::array({"riccati.csv"});

  const Eigen::Index dim = state_dim(n);
  const Eigen::Index out = 2 * static_cast<Eigen::Index>(n);
  std::string header = "t";
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < out; ++c) header += fmt::format(",L_{}_{}", r, c);
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = r; c < dim; ++c) header += fmt::format(",P_{}_{}", r, c);
  header += ",observable_residual\n";

  RiccatiSeries series;
  std::string diagnostic;
  try {
    series = integrate_riccati({tuning->P0, tuning->M, tuning->N}, source, s.dt, steps);
  } catch (const RiccatiDivergence& e) {
    diagnostic = e.what();
  }

  std::string csv = header;
  double final_residual = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < series.t.size(); ++k) {
    const Matrix C = source(series.t[k]).C;
    const double residual = steady_residual_observable(series.P[k], C, tuning->M, tuning->N);
    final_residual = residual;
    if (k % s.log_every != 0 && k + 1 != series.t.size()) continue;
    csv += fmt17(series.t[k]);
    const Matrix& L = series.L[k];
    for (Eigen::Index r = 0; r < dim; ++r)
      for (Eigen::Index c = 0; c < out; ++c) csv += "," + fmt17(L(r, c));
    for (Eigen::Index r = 0; r < dim; ++r)
      for (Eigen::Index c = r; c < dim; ++c) csv += "," + fmt17(series.P[k](r, c));
    csv += "," + fmt17(residual) + "\n";
  }
  write_file(dir / "riccati.csv", csv);

  const bool pass = diagnostic.empty();
  manifest["status"] = pass ? "pass" : "fail";
  if (pass) {
    manifest["final_observable_residual"] = final_residual;
  } else {
    manifest["diagnostic"] = diagnostic;
  }
  write_manifest(dir, manifest);
  std::cout << fmt::format("riccati {} mode={} steps={} final_observable_residual={:.6g} {}\n", s.name,
                           to_string(kind), steps, final_residual, pass ? "PASS" : "FAIL");
  if (!pass) std::cout << "  " << diagnostic << "\n";
  return pass ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Invariant EKF SLAM simulator and property checks", "invslam"};
  app.set_version_flag("--version", std::string(INVSLAM_VERSION));
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run one scenario and write its log");
  add_common(simulate, sim.common, true);
  simulate->add_option("--observer", sim.observer, "Override the observer (ekf, inv-ekf, prop1, iekf)");

  CompareArgs cmp;
  auto* compare_cmd = app.add_subcommand("compare", "Run several scenarios and tabulate their metrics");
  compare_cmd->add_option("--scenarios,--scenario", cmp.scenarios, "Scenario files")->required()->expected(1, -1);
  compare_cmd->add_option("--out", cmp.out, "Output directory")->required();
  compare_cmd->add_option("--seed", cmp.seed, "Override the seed of every scenario");
  compare_cmd->add_option("--observers", cmp.observers, "Run each scenario once per observer kind");
  compare_cmd->add_option("--workers", cmp.workers, "Worker threads (0 = hardware concurrency)");

  AutonomyArgs aut;
  auto* autonomy = app.add_subcommand("autonomy-check", "Check that the invariant error ignores the trajectory");
  add_common(autonomy, aut.common, false);
  autonomy->add_option("--observer", aut.observer, "Observer kind (default iekf, or the scenario's)");
  autonomy->add_option("--landmarks", aut.landmarks, "Landmark count of the built-in setup")->capture_default_str();
  autonomy->add_option("--horizon", aut.horizon, "Horizon override (s)");
  autonomy->add_option("--dt", aut.dt, "Step override (s)");
  autonomy->add_option("--tolerance", aut.tolerance, "Pass threshold on the sup deviation")->capture_default_str();
  autonomy->add_option("--log-every", aut.log_every, "Row stride of autonomy.csv")->capture_default_str();

  EquivarianceArgs eqv;
  auto* equivariance = app.add_subcommand("equivariance-check", "Check invariance of outputs and dynamics");
  add_common(equivariance, eqv.common, false);
  equivariance->add_option("--action", eqv.action, "left, right or both")->capture_default_str();
  equivariance->add_option("--samples", eqv.samples, "Sample count")->capture_default_str();

  RiccatiArgs ric;
  auto* riccati = app.add_subcommand("riccati", "Integrate the Riccati equation of a scenario on its own");
  add_common(riccati, ric.common, true);
  riccati->add_option("--mode", ric.mode, "auto (from the scenario), ekf or iekf")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*compare_cmd) return cmd_compare(cmp);
    if (*autonomy) return cmd_autonomy(aut);
    if (*equivariance) return cmd_equivariance(eqv);
    if (*riccati) return cmd_riccati(ric);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "run aborted: " << e.what() << "\n";
    return kFail;
  }
  return kInvalid;
}
