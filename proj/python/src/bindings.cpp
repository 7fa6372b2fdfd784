#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fmt/format.h>

#include "invslam/checks.hpp"
#include "invslam/invariance.hpp"
#include "invslam/metrics.hpp"
#include "invslam/run.hpp"
#include "invslam/scenario.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace invslam;

namespace {

py::dict metrics_dict(const RunMetrics& m)
{
  py::dict d;
  d["aligned_rms"] = m.aligned_rms;
  d["alignment_angle"] = m.alignment_angle;
  d["gain_variation_sup"] = m.gain_variation_sup;
  d["gain_variation_min"] = m.gain_variation_min;
  d["gain_variation_sup_after_transient"] = m.gain_variation_sup_after_transient;
  d["gain_settle_time"] = m.gain_settle_time ? py::object(py::float_(*m.gain_settle_time)) : py::object(py::none());
  d["output_error_rms"] = m.output_error_rms;
  d["final_output_error"] = m.final_output_error;
  d["final_heading_variance"] =
      m.final_heading_variance ? py::object(py::float_(*m.final_heading_variance)) : py::object(py::none());
  return d;
}

py::dict series_dict(const RiccatiSeries& s)
{
  py::dict d;
  d["t"] = s.t;
  d["P"] = s.P;
  d["L"] = s.L;
  return d;
}

GainSpec gain_from_python(ObserverKind kind, const py::object& gain)
{
  if (kind == ObserverKind::Prop1) {
    return Prop1Gain{gain.cast<std::vector<double>>()};
  }
  return ConstantGain{gain.cast<Matrix>()};
}

std::vector<Vec2> rows_to_points(const Eigen::Ref<const Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>>& m)
{
  std::vector<Vec2> out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.emplace_back(m(i, 0), m(i, 1));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
  m.doc() = "Invariant EKF SLAM models, observers and property checks";
  m.attr("__version__") = INVSLAM_VERSION;

  py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_ValueError);
  py::register_exception<RiccatiDivergence>(m, "RiccatiDivergence", PyExc_RuntimeError);

  // --- state and geometry ---------------------------------------------------

  py::class_<Inputs>(m, "Inputs")
      .def(py::init([](double u, double v) { return Inputs{u, v}; }), "u"_a = 0.0, "v"_a = 0.0)
      .def_readwrite("u", &Inputs::u)
      .def_readwrite("v", &Inputs::v)
      .def("__repr__", [](const Inputs& in) { return fmt::format("Inputs(u={}, v={})", in.u, in.v); });

  py::class_<SlamState>(m, "SlamState")
      .def(py::init([](const Vec2& x, double theta, const std::vector<Vec2>& landmarks) {
             SlamState s;
             s.x = x;
             s.theta = theta;
             s.landmarks = landmarks;
             return s;
           }),
           "x"_a = Vec2::Zero(), "theta"_a = 0.0, "landmarks"_a = std::vector<Vec2>{})
      .def_readwrite("x", &SlamState::x)
      .def_readwrite("theta", &SlamState::theta)
      .def_readwrite("landmarks", &SlamState::landmarks)
      .def_property_readonly("dim", [](const SlamState& s) { return s.dim(); })
      .def("to_vector", &SlamState::to_vector)
      .def_static("from_vector", [](const Vector& v) { return SlamState::from_vector(v); }, "v"_a)
      .def("__repr__", [](const SlamState& s) {
        return fmt::format("SlamState(x=({}, {}), theta={}, landmarks={})", s.x.x(), s.x.y(), s.theta,
                           s.landmarks.size());
      });

  py::class_<SE2Element>(m, "SE2Element")
      .def(py::init<double, Vec2>(), "angle"_a = 0.0, "translation"_a = Vec2::Zero())
      .def_property_readonly("angle", [](const SE2Element& g) { return g.rotation.angle(); })
      .def_readonly("translation", &SE2Element::translation)
      .def("matrix", &SE2Element::matrix)
      .def("inverse", &SE2Element::inverse)
      .def("act", &SE2Element::act, "point"_a)
      .def("__mul__", [](const SE2Element& a, const SE2Element& b) { return a * b; })
      .def_static("identity", &SE2Element::identity)
      .def_static("from_matrix", &SE2Element::from_matrix, "m"_a);

  m.def("wrap_angle", &wrap_angle, "angle"_a);

  // --- model ------------------------------------------------------------------

  py::class_<InputProfile>(m, "InputProfile")
      .def_static("constant", &InputProfile::constant, "u"_a, "v"_a)
      .def_static("straight", &InputProfile::straight, "u"_a)
      .def_static("circle", &InputProfile::circle, "u"_a, "radius"_a)
      .def_static(
          "piecewise",
          [](const std::vector<std::tuple<double, double, double, double>>& segs) {
            std::vector<ProfileSegment> out;
            for (const auto& [t0, t1, u, v] : segs) out.push_back({t0, t1, Inputs{u, v}});
            return InputProfile::piecewise(std::move(out));
          },
          "segments"_a, "List of (t0, t1, u, v) with contiguous, increasing times.")
      .def("eval", &InputProfile::eval, "t"_a)
      .def_property_readonly("start", &InputProfile::start)
      .def_property_readonly("end", &InputProfile::end);

  m.def("dynamics", &dynamics, "state"_a, "inputs"_a);
  m.def("observe", &observe, "state"_a);
  m.def(
      "noisy_observe",
      [](const SlamState& s, double relative_std, std::uint64_t seed, std::uint64_t step) {
        return noisy_observe(s, NoiseConfig{relative_std, seed}, step);
      },
      "state"_a, "relative_std"_a, "seed"_a, "step"_a);
  m.def("simulate_plant", &simulate_plant, "initial"_a, "profile"_a, "dt"_a, "steps"_a,
        py::call_guard<py::gil_scoped_release>());

  // --- observers --------------------------------------------------------------

  py::enum_<ObserverKind>(m, "ObserverKind")
      .value("EKF", ObserverKind::Ekf)
      .value("INV_EKF", ObserverKind::InvariantizedEkf)
      .value("PROP1", ObserverKind::Prop1)
      .value("IEKF", ObserverKind::Iekf);
  m.def("parse_observer_kind", &parse_observer_kind, "name"_a);

  m.def("output_error", &output_error, "estimate"_a, "observations"_a);
  m.def(
      "ekf_jacobians",
      [](const Estimate& est, const Inputs& in) {
        const Linearization lin = ekf_jacobians(est, in);
        return py::make_tuple(lin.A, lin.C);
      },
      "estimate"_a, "inputs"_a, "Returns (A, C).");
  m.def("iekf_output_matrix", &iekf_output_matrix, "n_landmarks"_a);
  m.def("ekf_step", &ekf_step, "estimate"_a, "inputs"_a, "observations"_a, "gain"_a);
  m.def("invariantized_step", &invariantized_step, "estimate"_a, "inputs"_a, "observations"_a, "gain"_a);
  m.def(
      "prop1_step",
      [](const Estimate& est, const Inputs& in, const Observations& z, const std::vector<double>& k) {
        return prop1_step(est, in, z, k);
      },
      "estimate"_a, "inputs"_a, "observations"_a, "k"_a);
  m.def("iekf_step", &iekf_step, "estimate"_a, "inputs"_a, "observations"_a, "gain"_a);

  // --- riccati ----------------------------------------------------------------

  m.def("riccati_rhs", &riccati_rhs, "P"_a, "A"_a, "C"_a, "M"_a, "N"_a);
  m.def("gain_from_P", &gain_from_P, "P"_a, "C"_a, "N"_a);
  m.def("steady_residual", &steady_residual, "P"_a, "C"_a, "M"_a, "N"_a);
  m.def("steady_residual_observable", &steady_residual_observable, "P"_a, "C"_a, "M"_a, "N"_a);
  m.def(
      "integrate_riccati",
      [](const Matrix& P0, const Matrix& M, const Matrix& N, const Matrix& C, double dt, std::size_t steps) {
        RiccatiSeries s;
        {
          py::gil_scoped_release release;
          s = integrate_riccati({P0, M, N}, fixed_linearization(C), dt, steps);
        }
        return series_dict(s);
      },
      "P0"_a, "M"_a, "N"_a, "C"_a, "dt"_a, "steps"_a, "Stationary mode (A = 0, fixed C). Returns {'t', 'P', 'L'}.");
  m.def(
      "integrate_riccati_along",
      [](const SlamState& initial, const InputProfile& profile, const Matrix& P0, const Matrix& M, const Matrix& N,
         double dt, std::size_t steps) {
        RiccatiSeries s;
        {
          py::gil_scoped_release release;
          s = integrate_riccati({P0, M, N}, trajectory_linearization(initial, profile, dt, steps), dt, steps);
        }
        return series_dict(s);
      },
      "initial"_a, "profile"_a, "P0"_a, "M"_a, "N"_a, "dt"_a, "steps"_a,
      "EKF mode: (A, C) re-linearized along the dead-reckoned trajectory.");

  // --- invariance -------------------------------------------------------------

  py::enum_<GroupActionKind>(m, "GroupAction")
      .value("LEFT", GroupActionKind::Left)
      .value("RIGHT", GroupActionKind::Right);
  py::enum_<ErrorSide>(m, "ErrorSide").value("LEFT", ErrorSide::Left).value("RIGHT", ErrorSide::Right);

  m.def(
      "invariant_state_error",
      [](const Estimate& est, const SlamState& truth) { return invariant_state_error(est, truth).to_vector(); },
      "estimate"_a, "truth"_a, "Stacked (theta~, x~, p~_1, ...).");
  m.def(
      "estimate_from_error",
      [](const Vector& eta, const SlamState& truth) {
        return estimate_from_error(InvariantError::from_vector(eta), truth);
      },
      "eta"_a, "truth"_a);
  m.def("apply_action", &apply_action, "kind"_a, "g"_a, "state"_a);
  m.def("group_error", &group_error, "estimate"_a, "truth"_a, "side"_a);

  m.def("autonomy_gain", &autonomy_gain, "n_landmarks"_a);
  m.def(
      "autonomy_check",
      [](ObserverKind kind, const py::object& gain, const InputProfile& a, const InputProfile& b,
         const SlamState& truth, const Vector& eta0, double horizon, double dt) {
        const ObserverConfig cfg{kind, gain_from_python(kind, gain)};
        const InvariantError e = InvariantError::from_vector(eta0);
        py::gil_scoped_release release;
        return autonomy_check(cfg, {a, b}, truth, e, horizon, dt);
      },
      "kind"_a, "gain"_a, "profile_a"_a, "profile_b"_a, "truth"_a, "eta0"_a, "horizon"_a, "dt"_a,
      "Sup deviation between the invariant-error trajectories under two profiles. `gain` is a matrix, or the "
      "list of k_i for PROP1.");
  m.def(
      "default_autonomy_check",
      [](ObserverKind kind, std::size_t n_landmarks, std::uint64_t seed) {
        const AutonomySetup setup = default_autonomy_setup(kind, n_landmarks, seed);
        AutonomyResult r;
        {
          py::gil_scoped_release release;
          r = run_autonomy(setup);
        }
        return py::make_tuple(r.deviation, r.diagnostic);
      },
      "kind"_a, "n_landmarks"_a = 2, "seed"_a = 0, "Built-in setup; returns (deviation, diagnostic).");
  m.def(
      "equivariance_check",
      [](GroupActionKind kind, std::size_t samples, std::uint64_t seed) {
        const EquivarianceReport r = equivariance_check(kind, samples, seed);
        py::dict d;
        d["output_residual"] = r.output_residual;
        d["dynamics_residual"] = r.dynamics_residual;
        d["dynamics_fd_residual"] = r.dynamics_fd_residual;
        return d;
      },
      "kind"_a, "samples"_a = 100, "seed"_a = 0);

  // --- scenarios, runs, metrics -----------------------------------------------

  py::class_<Scenario>(m, "Scenario")
      .def_readwrite("name", &Scenario::name)
      .def_readonly("horizon", &Scenario::horizon)
      .def_readonly("dt", &Scenario::dt)
      .def_readonly("transient", &Scenario::transient)
      .def_readonly("truth", &Scenario::truth)
      .def_readonly("estimate", &Scenario::estimate)
      .def_property_readonly("seed", [](const Scenario& s) { return s.noise.seed; })
      .def_property_readonly("observer", [](const Scenario& s) { return s.observer.kind; })
      .def("set_seed", &set_seed, "seed"_a)
      .def("set_observer", &set_observer, "kind"_a)
      .def("to_json", [](const Scenario& s) { return to_json(s).dump(); })
      .def("hash", &scenario_hash)
      .def("__copy__", [](const Scenario& s) { return s; })
      .def("__repr__", [](const Scenario& s) {
        return fmt::format("Scenario(name='{}', observer={}, horizon={}, dt={})", s.name, to_string(s.observer.kind),
                           s.horizon, s.dt);
      });
  m.def("load_scenario", [](const std::string& path) { return load_scenario(path); }, "path"_a);
  m.def("parse_scenario", [](const std::string& text) { return parse_scenario(nlohmann::json::parse(text)); },
        "text"_a);

  py::class_<RunLog>(m, "RunLog")
      .def_readonly("columns", &RunLog::columns)
      .def("table", &run_table, "Records as a (rows x columns) array.")
      .def("to_csv", &to_csv)
      .def("__len__", [](const RunLog& l) { return l.records.size(); });
  m.def("run_scenario", &run_scenario, "scenario"_a, py::call_guard<py::gil_scoped_release>());
  m.def(
      "compute_metrics",
      [](const RunLog& log, double transient) { return metrics_dict(compute_metrics(log, transient)); }, "log"_a,
      "transient"_a);
  m.def(
      "compare",
      [](const std::vector<Scenario>& scenarios, std::size_t workers) {
        Comparison c;
        {
          py::gil_scoped_release release;
          c = compare(scenarios, workers);
        }
        std::ostringstream out;
        write_comparison_csv(c, out);
        py::list entries;
        for (const auto& e : c.entries) {
          entries.append(py::make_tuple(e.name, metrics_dict(e.metrics)));
        }
        return py::make_tuple(entries, out.str());
      },
      "scenarios"_a, "workers"_a = 0, "Returns ([(name, metrics)], comparison_csv).");
  m.def(
      "aligned_rms",
      [](const Eigen::Ref<const Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>>& estimated,
         const Eigen::Ref<const Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>>& truth) {
        const auto e = rows_to_points(estimated);
        const auto t = rows_to_points(truth);
        const Alignment a = aligned_rms(e, t);
        return py::make_tuple(a.transform, a.rms);
      },
      "estimated"_a, "truth"_a, "Rigid alignment of (n x 2) point sets; returns (SE2Element, rms).");
}
