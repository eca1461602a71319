"""Lyapunov design data for the DADS controller and sampled checks of it.

A :class:`CLFBundle` packages ``V``, its gradient and the functions that
certify the two structural inequalities the controller relies on:

* decrease:   grad V f <= -Q + sigma * sum delta_i LgV_i + sum s_i LgV_i**2
* regressor:  sum |phi_i|**2 <= mu (Q + Lambda)

where ``LgV_i = grad V(y) . g_i(y)``. Per-channel functions ``s`` and
``delta`` return arrays of shape ``(m,)``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError
from .systems import PlantModel

__all__ = [
    "CLFBundle",
    "AssumptionReport",
    "double_integrator_clf",
    "bundle_from_stabilizer",
    "check_assumption_A",
    "check_assumption_B",
    "sample_box",
    "PASS_TOLERANCE",
]

# absorbs rounding on inequalities that hold with equality somewhere
PASS_TOLERANCE = 1e-9


@dataclass(frozen=True)
class CLFBundle:
    V: Callable
    grad_V: Callable
    Q: Callable
    s: Callable
    delta: Callable
    mu: Callable
    sigma: float
    Lambda: float
    rate_lb: Callable
    name: str = "custom"
    params: tuple = field(default=())
    vectorized: bool = False

    def lgv(self, plant: PlantModel, y):
        """``grad V(y) g_i(y)`` for every channel."""
        return np.einsum("...n,...ni->...i", np.asarray(self.grad_V(y), dtype=float), plant.g(y))


@dataclass(frozen=True)
class AssumptionReport:
    max_violation: float
    worst_point: np.ndarray
    samples_checked: int
    seed: int | None = None
    box_radius: float | None = None

    @property
    def passed(self) -> bool:
        return self.max_violation <= PASS_TOLERANCE


def _di_constants(c):
    root = math.sqrt(c * c + 4.0)
    s = ((1.0 - c * c) ** 2 + 3.0 * c * c) / (2.0 * c)
    mu = 2.0 * (root + c) / (c * root - c * c)
    return s, mu


@functools.lru_cache(maxsize=None)
def _double_integrator_clf(c: float) -> CLFBundle:
    s_val, mu_val = _di_constants(c)

    def V(y):
        y = np.asarray(y, dtype=float)
        w = y[..., 1] + c * y[..., 0]
        return 0.5 * y[..., 0] ** 2 + 0.5 * w * w

    def grad_V(y):
        y = np.asarray(y, dtype=float)
        w = y[..., 1] + c * y[..., 0]
        return np.stack([y[..., 0] + c * w, w], axis=-1)

    def Q(y):
        return c * V(y)

    def s(y):
        return np.full(np.shape(y)[:-1] + (1,), s_val)

    def delta(y):
        return np.zeros(np.shape(y)[:-1] + (1,))

    def mu(y):
        return np.full(np.shape(y)[:-1], mu_val)

    def rate_lb(v):
        return 0.5 * c * np.asarray(v, dtype=float)

    return CLFBundle(
        V=V, grad_V=grad_V, Q=Q, s=s, delta=delta, mu=mu,
        sigma=0.0, Lambda=0.0, rate_lb=rate_lb,
        name="double_integrator", params=(("c", c),), vectorized=True,
    )


def double_integrator_clf(c: float) -> CLFBundle:
    """Bundle for the double integrator with ``V = y1**2/2 + (y2 + c y1)**2/2``.

    Bundles are cached per ``c`` so equal slopes give the identical object.
    """
    c = float(c)
    if not c > 0:
        raise DomainError(f"CLF slope c must be positive, got {c}")
    return _double_integrator_clf(c)


def bundle_from_stabilizer(V, grad_V, k, phi, Lambda, vectorized=False) -> CLFBundle:
    """Build a bundle from a Lyapunov function of a known-parameter stabilizer.

    ``k(y)`` returns the ``(m,)`` stabilizing feedback and ``phi(y)`` the
    ``(m, p)`` regressor. The caller is responsible for
    ``grad V f + sum k_i grad V g_i <= -V``; :func:`check_assumption_A`
    verifies it on samples.
    """
    Lambda = float(Lambda)
    if not Lambda > 0:
        raise DomainError(f"Lambda must be positive for a stabilizer-derived bundle, got {Lambda}")

    def s(y):
        return np.zeros(np.shape(k(y)))

    def mu(y):
        phi_sq = np.sum(np.asarray(phi(y), dtype=float) ** 2, axis=(-2, -1))
        return Lambda + phi_sq / (np.asarray(V(y), dtype=float) + Lambda)

    def rate_lb(v):
        return 0.5 * np.asarray(v, dtype=float)

    return CLFBundle(
        V=V, grad_V=grad_V, Q=V, s=s, delta=k, mu=mu,
        sigma=-1.0, Lambda=Lambda, rate_lb=rate_lb,
        name="stabilizer", vectorized=vectorized,
    )


def sample_box(n: int, box_radius: float, grid_pts: int, random_pts: int, seed: int = 0) -> np.ndarray:
    """Uniform grid (``grid_pts`` per axis) plus seeded uniform points in the box."""
    if not box_radius > 0:
        raise DomainError("box_radius must be positive")
    if grid_pts < 1 or random_pts < 0:
        raise DomainError("grid_pts must be >= 1 and random_pts >= 0")
    axis = np.linspace(-box_radius, box_radius, grid_pts) if grid_pts > 1 else np.zeros(1)
    grid = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1).reshape(-1, n)
    rng = np.random.default_rng(seed)
    rand = rng.uniform(-box_radius, box_radius, size=(random_pts, n))
    return np.concatenate([grid, rand])


def _eval(fn, points, vectorized):
    if vectorized:
        return np.asarray(fn(points), dtype=float)
    return np.array([fn(y) for y in points], dtype=float)


def _report(values, points, seed, radius):
    viol = np.maximum(values, 0.0)
    k = int(np.argmax(viol))
    return AssumptionReport(
        max_violation=float(viol[k]),
        worst_point=points[k].copy(),
        samples_checked=len(points),
        seed=seed,
        box_radius=radius,
    )


def _points(plant, box_radius, grid_pts, random_pts, seed, points):
    if points is not None:
        return np.atleast_2d(np.asarray(points, dtype=float)), None, None
    return sample_box(plant.n, box_radius, grid_pts, random_pts, seed), seed, box_radius


def check_assumption_A(plant, clf, box_radius=5.0, grid_pts=101, random_pts=10_000, seed=0, points=None):
    """Worst sampled violation of the decrease inequality."""
    pts, seed, radius = _points(plant, box_radius, grid_pts, random_pts, seed, points)
    vec = plant.vectorized and clf.vectorized
    grad = _eval(clf.grad_V, pts, vec)
    f = _eval(plant.f, pts, vec)
    g = _eval(plant.g, pts, vec)
    lgv = np.einsum("kn,kni->ki", grad, g)
    values = (
        np.einsum("kn,kn->k", grad, f)
        + _eval(clf.Q, pts, vec)
        - clf.sigma * np.sum(_eval(clf.delta, pts, vec) * lgv, axis=-1)
        - np.sum(_eval(clf.s, pts, vec) * lgv**2, axis=-1)
    )
    return _report(values, pts, seed, radius)


def check_assumption_B(plant, clf, box_radius=5.0, grid_pts=101, random_pts=10_000, seed=0, points=None):
    """Worst sampled violation of the regressor bound."""
    pts, seed, radius = _points(plant, box_radius, grid_pts, random_pts, seed, points)
    vec = plant.vectorized and clf.vectorized
    phi_sq = np.sum(_eval(plant.phi, pts, vec) ** 2, axis=(-2, -1))
    values = phi_sq - _eval(clf.mu, pts, vec) * (_eval(clf.Q, pts, vec) + clf.Lambda)
    return _report(values, pts, seed, radius)
