import math
import os
from pathlib import Path

import numpy as np
import pytest

import invslam as m

SCENARIOS = Path(os.environ.get("INVSLAM_SCENARIO_DIR", Path(__file__).resolve().parents[2] / "scenarios"))


def two_landmarks():
    return m.SlamState(x=[1.0, 2.0], theta=0.3, landmarks=[[3.0, 1.0], [-1.0, 4.0]])


def test_state_round_trip():
    s = two_landmarks()
    v = s.to_vector()
    assert v.shape == (7,)
    assert v[0] == pytest.approx(0.3)
    back = m.SlamState.from_vector(v)
    assert np.allclose(back.to_vector(), v)
    assert s.dim == 7


def test_observation_and_output_error():
    s = two_landmarks()
    z = m.observe(s)
    R = np.array([[math.cos(0.3), -math.sin(0.3)], [math.sin(0.3), math.cos(0.3)]])
    assert np.allclose(R @ z[0], np.array([3.0, 1.0]) - np.array([1.0, 2.0]))
    errs = m.output_error(s, z)
    assert max(np.linalg.norm(e) for e in errs) < 1e-12


def test_group_element():
    g = m.SE2Element(0.5, [1.0, -2.0])
    h = g * g.inverse()
    assert abs(h.angle) < 1e-15
    assert np.allclose(h.translation, 0.0)
    assert np.allclose(m.SE2Element.from_matrix(g.matrix()).matrix(), g.matrix())


def test_invariant_error_round_trip():
    truth = two_landmarks()
    est = m.SlamState(x=[0.5, 2.5], theta=0.1, landmarks=[[2.0, 1.0], [0.0, 3.0]])
    eta = m.invariant_state_error(est, truth)
    back = m.estimate_from_error(eta, truth)
    assert np.allclose(back.to_vector(), est.to_vector())


def test_riccati_stationary():
    C = m.iekf_output_matrix(2)
    n = C.shape[1]
    out = m.integrate_riccati(np.eye(n), np.eye(n), 0.25 * np.eye(4), C, 0.01, 200)
    assert len(out["P"]) == 201
    P = out["P"][-1]
    assert np.allclose(P, P.T)
    assert np.allclose(out["L"][-1], m.gain_from_P(P, C, 0.25 * np.eye(4)))


def test_riccati_divergence_raises():
    C = m.iekf_output_matrix(1)
    with pytest.raises(m.RiccatiDivergence):
        m.integrate_riccati(-np.eye(5), np.eye(5), np.eye(2), C, 0.01, 10)


def test_autonomy_and_equivariance():
    dev, _ = m.default_autonomy_check(m.ObserverKind.IEKF)
    assert dev < 1e-6
    dev_ekf, _ = m.default_autonomy_check(m.ObserverKind.EKF)
    assert dev_ekf > 1e-2
    rep = m.equivariance_check(m.GroupAction.LEFT, samples=10, seed=3)
    assert rep["output_residual"] < 1e-10
    assert rep["dynamics_residual"] < 1e-10


def test_scenario_run_and_metrics():
    s = m.load_scenario(str(SCENARIOS / "circle_riccati.json"))
    assert len(s.hash()) == 64
    s2 = m.parse_scenario(s.to_json())
    assert s2.hash() == s.hash()
    log = m.run_scenario(s)
    table = log.table()
    assert table.shape == (len(log), len(log.columns))
    assert log.columns[0] == "t"
    metrics = m.compute_metrics(log, s.transient)
    assert metrics["aligned_rms"] < 0.2
    assert log.to_csv() == m.run_scenario(s).to_csv()


def test_compare_and_alignment():
    s = m.load_scenario(str(SCENARIOS / "circle_riccati.json"))
    e = m.parse_scenario(s.to_json())
    e.set_observer(m.ObserverKind.EKF)
    entries, csv = m.compare([s, e], workers=2)
    assert [name for name, _ in entries] == ["circle", "circle#2"]
    assert "delta." in csv
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]])
    g = m.SE2Element(0.4, [1.0, 1.0])
    moved = np.array([g.act(p) for p in pts])
    _, rms = m.aligned_rms(moved, pts)
    assert rms < 1e-12


def test_invalid_scenario_raises_value_error():
    with pytest.raises(ValueError):
        m.parse_scenario('{"horizon": -1}')
