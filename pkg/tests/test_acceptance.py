"""End-to-end acceptance checks, one test per criterion.

The verdict lines are printed in the ``acceptance criteria`` section of the
pytest terminal summary.
"""

import dataclasses
import math
import time

import numpy as np
import pytest

from dadsim.analysis import dads_certificate, drift_metric, regulation_dichotomy, tail_stats
from dadsim.baseline import c1_certificate
from dadsim.clf import check_assumption_A, check_assumption_B, double_integrator_clf
from dadsim.config import PRESETS, parse_scenario, run_preset, write_scenario
from dadsim.dads import DadsParams, chi, dads_control, gain_simplified
from dadsim.output import csv_header, emit_csv
from dadsim.sim import Scenario, integrate, refine_check
from dadsim.systems import ConstantSignal, DisturbanceProfile, PlantModel, ZeroSignal, double_integrator_plant

EPS = 0.005
DADS_PRESETS = ("dads-0", "dads-sin")
C1_PRESETS = ("c1-noleak-0", "c1-leak-0", "c1-noleak-sin", "c1-leak-sin")


def regulation_scenario():
    prof = DisturbanceProfile(d=(ZeroSignal(),), theta=(ZeroSignal(), ZeroSignal()), b=(ConstantSignal(1.0),))
    return dataclasses.replace(run_preset("dads-0"), disturbance=prof, rho0=1.0, name="regulation")


def test_criterion_01_assumption_tightness():
    start = time.perf_counter()
    plant, clf = double_integrator_plant(), double_integrator_clf(0.5)
    a = check_assumption_A(plant, clf, box_radius=5.0)
    b = check_assumption_B(plant, clf, box_radius=5.0)
    weak_s = dataclasses.replace(clf, s=lambda y: 0.9 * clf.s(y))
    weak_mu = dataclasses.replace(clf, mu=lambda y: 0.9 * clf.mu(y))
    a_weak = check_assumption_A(plant, weak_s, box_radius=5.0)
    b_weak = check_assumption_B(plant, weak_mu, box_radius=5.0)
    elapsed = time.perf_counter() - start
    assert a.max_violation <= 1e-9
    assert b.max_violation <= 1e-9
    assert a_weak.max_violation > 0
    assert b_weak.max_violation > 0
    assert elapsed < 5.0


def test_criterion_02_formula_oracles():
    plant, clf = double_integrator_plant(), double_integrator_clf(0.5)
    params = DadsParams(EPS, 20.0, 1.0, 0.1, "simplified")
    y = np.array([1.0, 0.0])
    assert gain_simplified(plant, clf, params, y, 0.11)[0] == pytest.approx(0.240915, abs=1e-5)
    assert dads_control(plant, clf, params, y, 0.11)[0] == pytest.approx(-0.120458, abs=1e-5)
    assert chi(0.0, 0.5, 2.0, 1.0, 1, 0.0, 0.0, 1.0, 0.5) == pytest.approx(0.0, rel=1e-2, abs=0.0)
    assert chi(2.0, 0.0, 1.0, 0.0, 1, 0.0, 0.0, 1.0, 1.0) == pytest.approx(1.0, rel=1e-2)
    assert chi(2.0, math.sqrt(2), 0.01, 0.01, 1, 0.0, 0.0, 1.0, 0.1) == pytest.approx(466.50, rel=1e-2)


def test_criterion_03_residual_set(preset_run):
    for name in DADS_PRESETS:
        traj = preset_run(name)
        assert traj.scenario.T == 100.0 and traj.scenario.dt == 1e-4
        assert tail_stats(traj, 0.25).max_V <= 1.5 * EPS, name


def test_criterion_04_monotone_bounded_gain(preset_run):
    for name in DADS_PRESETS:
        traj = preset_run(name)
        assert np.all(np.diff(traj.rho) >= 0), name
        assert math.isfinite(traj.rho[-1])
        dm = drift_metric(traj, 0.5)
        assert dm.late_increment <= 0.01 * dm.rho_end, name


def test_criterion_05_baseline_contrast(preset_run):
    dm = drift_metric(preset_run("c1-noleak-sin"), 0.5)
    assert dm.late_increment > 0.1 * dm.rho_end
    leak = tail_stats(preset_run("c1-leak-sin"), 0.25).max_norm_y
    dads = tail_stats(preset_run("dads-sin"), 0.25).max_norm_y
    assert leak > dads


def _certificate(traj):
    return dads_certificate(traj) if traj.kind == "dads" else c1_certificate(traj)


def test_criterion_06_lyapunov_certificates(preset_run):
    for name in DADS_PRESETS + C1_PRESETS:
        coarse = _certificate(preset_run(name)).max_violation
        assert coarse <= 1e-6, name
        sc = run_preset(name)
        fine_traj = integrate(dataclasses.replace(sc, dt=sc.dt / 2))
        fine = _certificate(fine_traj).max_violation
        del fine_traj
        assert fine <= 1e-6, name
        assert fine <= 2.0 * coarse, name


def test_criterion_07_exact_regulation():
    traj = integrate(regulation_scenario())
    assert traj.t[-1] == pytest.approx(100.0)
    assert np.linalg.norm(traj.y[-1]) <= 1e-3
    assert regulation_dichotomy(traj, theta_tail=0.0, b_tail=1.0).regulated


def test_criterion_08_deadzone_exactness(preset_run):
    full = dataclasses.replace(run_preset("dads-sin"), controller=DadsParams(EPS, 20.0, 1.0, 0.5, "full"), rho0=0.51)
    runs = [preset_run(name) for name in DADS_PRESETS] + [integrate(regulation_scenario()), integrate(full)]
    for traj in runs:
        inside = traj.V <= traj.scenario.controller.epsilon
        assert inside.any()
        assert np.all(traj.rho_dot[inside] == 0.0)


def test_criterion_09_integrator_order():
    A = np.array([[0.0, 1.0], [-4.0, -0.5]])
    plant = PlantModel(
        n=2, m=1, p=0, q=0,
        f=lambda y: A @ y, g=lambda y: np.zeros((2, 1)),
        phi=lambda y: np.zeros((1, 0)), A=lambda y: np.zeros((1, 0)),
        name="linear",
    )
    sc = Scenario(
        plant=plant, clf=None, controller=None, y0=(1.0, 0.0),
        disturbance=DisturbanceProfile(d=(), theta=(), b=(ConstantSignal(1.0),)), T=2.0, dt=0.02,
    )
    assert refine_check(sc).observed_order == pytest.approx(4.0, abs=0.3)
    assert refine_check(run_preset("dads-0")).discrepancy <= 1e-6


def test_criterion_10_reproducibility(tmp_path, preset_run):
    for name in PRESETS:
        path = write_scenario(run_preset(name), tmp_path / f"{name}.ini")
        assert parse_scenario(path) == run_preset(name), name
    first = preset_run("dads-sin")
    second = integrate(run_preset("dads-sin"))
    a, _ = emit_csv(first, {}, tmp_path / "a")
    b, _ = emit_csv(second, {}, tmp_path / "b")
    assert a.read_bytes() == b.read_bytes()
    header = a.read_text().split("\n", 1)[0]
    assert header == "t,y1,y2,rho,z,u1,V,rho_dot,d1,theta1,theta2,b1"
    assert header.split(",") == csv_header(second)
