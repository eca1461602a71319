import dataclasses
import math

import numpy as np
import pytest
import scipy.linalg
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from dadsim.clf import (
    bundle_from_stabilizer,
    check_assumption_A,
    check_assumption_B,
    double_integrator_clf,
    sample_box,
)
from dadsim.errors import DomainError
from dadsim.systems import PlantModel, double_integrator_plant


def _sympy_decrease_form(c, s):
    """Hessian of grad V f + Q - s (LgV)^2 for the double integrator, built symbolically."""
    y1, y2 = sp.symbols("y1 y2")
    V = sp.Rational(1, 2) * y1**2 + sp.Rational(1, 2) * (y2 + c * y1) ** 2
    grad = [sp.diff(V, y1), sp.diff(V, y2)]
    expr = grad[0] * y2 + c * V - s * grad[1] ** 2
    return np.array(sp.hessian(expr, (y1, y2)).tolist(), dtype=float) / 2


def test_double_integrator_constants():
    clf = double_integrator_clf(0.5)
    y = np.array([1.0, 0.0])
    assert clf.s(y)[0] == pytest.approx(1.3125, abs=1e-15)
    # 2 (sqrt(4.25) + 0.5) / (0.5 sqrt(4.25) - 0.25)
    assert clf.mu(y) == pytest.approx(6.561553, abs=1e-5)
    assert clf.V(y) == pytest.approx(0.625)
    assert clf.Q(y) == pytest.approx(0.3125)
    np.testing.assert_allclose(clf.grad_V(y), [1.25, 0.5])
    assert (clf.sigma, clf.Lambda) == (0.0, 0.0)
    assert clf.delta(y)[0] == 0.0


def test_double_integrator_clf_is_cached_and_validated():
    assert double_integrator_clf(0.5) is double_integrator_clf(0.5)
    for bad in (0.0, -1.0):
        with pytest.raises(DomainError):
            double_integrator_clf(bad)


def test_gradient_matches_finite_differences():
    clf = double_integrator_clf(0.7)
    rng = np.random.default_rng(3)
    for y in rng.normal(size=(20, 2)):
        h = 1e-6
        fd = [(clf.V(y + h * e) - clf.V(y - h * e)) / (2 * h) for e in np.eye(2)]
        np.testing.assert_allclose(clf.grad_V(y), fd, rtol=1e-7, atol=1e-8)


def test_decrease_form_oracle_threshold():
    # the s of the bundle is exactly where the symbolic quadratic form turns semidefinite
    c = 0.5
    s = double_integrator_clf(c).s(np.zeros(2))[0]
    assert np.linalg.eigvalsh(_sympy_decrease_form(c, s)).max() == pytest.approx(0.0, abs=1e-12)
    assert np.linalg.eigvalsh(_sympy_decrease_form(c, 0.9 * s)).max() > 1e-3


def test_assumption_A_holds_and_is_tight():
    plant, clf = double_integrator_plant(), double_integrator_clf(0.5)
    rep = check_assumption_A(plant, clf, 5.0, 101, 10_000)
    assert rep.max_violation <= 1e-9
    assert rep.samples_checked == 101 * 101 + 10_000
    assert rep.seed == 0 and rep.passed
    weak = dataclasses.replace(clf, s=lambda y: 0.9 * clf.s(y))
    rep = check_assumption_A(plant, weak, 5.0, 101, 10_000)
    assert rep.max_violation > 0 and not rep.passed


def test_assumption_B_matches_eigen_oracle():
    c = 0.5
    clf = double_integrator_clf(c)
    M = np.array([[1 + c * c, c], [c, 1.0]])
    sup_ratio = 2.0 / np.linalg.eigvalsh(M).min()
    assert clf.mu(np.zeros(2)) * c == pytest.approx(sup_ratio, rel=1e-12)
    assert sup_ratio == pytest.approx(3.28079, abs=1e-4)
    plant = double_integrator_plant()
    assert check_assumption_B(plant, clf).max_violation <= 1e-9
    half = dataclasses.replace(clf, mu=lambda y: 0.5 * clf.mu(y))
    rep = check_assumption_B(plant, half)
    assert rep.max_violation > 0
    # the worst direction is the small-eigenvalue eigenvector of M
    vec = np.linalg.eigh(M)[1][:, 0]
    w = rep.worst_point / np.linalg.norm(rep.worst_point)
    assert abs(abs(w @ vec) - 1.0) < 0.05


def test_origin_only():
    plant, clf = double_integrator_plant(), double_integrator_clf(0.5)
    assert check_assumption_A(plant, clf, points=[[0.0, 0.0]]).max_violation == 0.0
    assert check_assumption_B(plant, clf, points=[[0.0, 0.0]]).max_violation == 0.0


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 5.0))
def test_mu_identity(c):
    mu = double_integrator_clf(c).mu(np.zeros(2))
    lhs = mu * c * (2 + c * c - c * math.sqrt(c * c + 4)) / 2
    assert lhs == pytest.approx(2.0, rel=1e-10)


def test_rate_lb_compatibility():
    clf = double_integrator_clf(0.5)
    pts = sample_box(2, 5.0, 41, 1000, seed=1)
    assert np.min(clf.Q(pts) - 2 * clf.rate_lb(clf.V(pts))) >= -1e-12


def test_positive_definiteness_sampled():
    clf = double_integrator_clf(1.3)
    pts = sample_box(2, 5.0, 21, 500, seed=2)
    pts = pts[np.linalg.norm(pts, axis=1) > 0]
    assert np.all(clf.V(pts) > 0) and np.all(clf.Q(pts) > 0)
    assert clf.V(np.zeros(2)) == 0 and clf.Q(np.zeros(2)) == 0


def test_sample_box_is_seeded():
    a = sample_box(2, 1.0, 3, 10, seed=5)
    b = sample_box(2, 1.0, 3, 10, seed=5)
    assert np.array_equal(a, b)
    assert a.shape == (19, 2)
    assert np.abs(a).max() <= 1.0


# stabilizer-derived bundles


def linear_example():
    """y' = A y + B (b u + phi' theta + d), stabilized by u = -K y."""
    A = np.array([[0.0, 1.0], [2.0, -1.0]])
    Bm = np.array([[0.0], [1.0]])
    K = np.array([[6.0, 3.0]])
    Acl = A - Bm @ K
    # (Acl + I/2)' P + P (Acl + I/2) = -I  gives  dV/dt <= -V for V = y'Py
    P = scipy.linalg.solve_continuous_lyapunov((Acl + 0.5 * np.eye(2)).T, -np.eye(2))
    plant = PlantModel(
        n=2, m=1, p=2, q=1,
        f=lambda y: A @ y,
        g=lambda y: Bm,
        phi=lambda y: np.asarray(y, dtype=float)[None, :],
        A=lambda y: np.ones((1, 1)),
        name="linear",
    )
    clf = bundle_from_stabilizer(
        V=lambda y: float(y @ P @ y),
        grad_V=lambda y: 2.0 * P @ y,
        k=lambda y: -K @ y,
        phi=plant.phi,
        Lambda=1.0,
    )
    return plant, clf, P, A, Bm, K


def test_stabilizer_bundle_fields():
    plant, clf, *_ = linear_example()
    y = np.array([0.3, -0.2])
    assert clf.sigma == -1.0
    assert np.array_equal(clf.s(y), np.zeros(1))
    assert clf.Q(y) == clf.V(y)
    np.testing.assert_allclose(clf.delta(y), -np.array([[6.0, 3.0]]) @ y)
    assert clf.rate_lb(2.0) == 1.0


def test_stabilizer_bundle_mu_examples():
    zero = bundle_from_stabilizer(lambda y: float(y @ y), lambda y: 2 * y, lambda y: np.zeros(1),
                                  lambda y: np.zeros((1, 2)), 1.0)
    for y in np.random.default_rng(0).normal(size=(5, 2)):
        assert zero.mu(y) == 1.0
    # |phi|^2 = V  ->  mu = 1 + V/(V+1)
    same = bundle_from_stabilizer(lambda y: float(y @ y), lambda y: 2 * y, lambda y: np.zeros(1),
                                  lambda y: np.asarray(y)[None, :], 1.0)
    for y in np.random.default_rng(1).normal(size=(20, 2)) * 3:
        v = float(y @ y)
        assert same.mu(y) == pytest.approx(1 + v / (v + 1))
        assert 1.0 <= same.mu(y) < 2.0
    with pytest.raises(DomainError):
        bundle_from_stabilizer(lambda y: 0.0, lambda y: y, lambda y: y, lambda y: y, 0.0)


def test_stabilizer_bundle_passes_both_checks():
    plant, clf, P, A, Bm, K = linear_example()
    rep_a = check_assumption_A(plant, clf, 3.0, 21, 500)
    rep_b = check_assumption_B(plant, clf, 3.0, 21, 500)
    assert rep_a.passed and rep_b.passed
    # same check done directly on the closed-loop inequality
    pts = sample_box(2, 3.0, 21, 500)
    direct = [2 * y @ P @ ((A - Bm @ K) @ y) + y @ P @ y for y in pts]
    assert max(direct) <= 1e-9
