"""Post-hoc checks on simulated trajectories.

Asymptotic statements are approximated on finite horizons: limits become
tail-window statistics and Lyapunov decrease is checked pointwise with the
exact derivative of ``V`` along the recorded closed loop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .systems import plant_rhs

__all__ = [
    "CertificateReport",
    "TailStats",
    "DeadzoneReport",
    "DriftMetric",
    "RegulationVerdict",
    "dads_certificate",
    "dads_bound",
    "tail_stats",
    "deadzone_check",
    "drift_metric",
    "regulation_dichotomy",
]


@dataclass(frozen=True)
class CertificateReport:
    max_violation: float
    violation_time: float
    samples_checked: int
    bound_descriptor: str

    def passed(self, tol: float = 1e-6) -> bool:
        return self.max_violation <= tol


def _tail_start(n, fraction):
    if not 0 < fraction < 1:
        raise DomainError(f"window fraction must lie in (0, 1), got {fraction}")
    return min(n - 1, int(np.floor((1.0 - fraction) * (n - 1))))


def _require_dads(traj, what):
    if traj.kind != "dads":
        raise ConfigurationError(f"{what} needs a DADS trajectory, got {traj.kind!r}")


def _batched(fn, Y, vectorized):
    if vectorized:
        return np.asarray(fn(Y), dtype=float)
    return np.array([fn(y) for y in Y], dtype=float)


def _vdot(traj, plant, clf):
    """Exact ``grad V(y) . y'`` at every sample."""
    Y = traj.y
    if plant.vectorized and clf.vectorized:
        ydot = plant_rhs(plant, Y, traj.u, traj.theta, traj.d, traj.b)
        return np.einsum("kn,kn->k", np.asarray(clf.grad_V(Y), dtype=float), ydot)
    return np.array([
        float(np.dot(clf.grad_V(y), plant_rhs(plant, y, u, th, d, b)))
        for y, u, th, d, b in zip(Y, traj.u, traj.theta, traj.d, traj.b)
    ])


def dads_bound(V, rho, d_norm, theta_norm, B, m, clf, params):
    """Pointwise upper bound on dV/dt for the DADS closed loop.

    ``-rate_lb(V) + [m|d|^2 + m sigma^2 + m((|theta| - rho)^+)^2
    + 2 C kappa Lambda + 2 m B ((1/B - rho)^+)^2] / (4 C rho)``
    """
    C, kappa = params.C, params.kappa
    level = (
        m * d_norm**2
        + m * clf.sigma**2
        + m * np.maximum(theta_norm - rho, 0.0) ** 2
        + 2.0 * C * kappa * clf.Lambda
        + 2.0 * m * B * np.maximum(1.0 / B - rho, 0.0) ** 2
    ) / (4.0 * C * rho)
    return -np.asarray(clf.rate_lb(V), dtype=float) + level


def dads_certificate(traj, clf=None, params=None, B=None) -> CertificateReport:
    """Largest pointwise excess of dV/dt over the closed-loop decrease bound.

    ``B`` is a positive lower bound of every input coefficient over the run;
    by default it is taken from the scenario's disturbance profile.
    """
    _require_dads(traj, "dads_certificate")
    sc = traj.scenario
    clf = clf or sc.clf
    params = params or sc.controller
    if B is None:
        B = sc.disturbance.b_floor()
    if not B > 0:
        raise DomainError(f"input-coefficient floor B must be positive, got {B}")
    vdot = _vdot(traj, sc.plant, clf)
    V = _batched(clf.V, traj.y, clf.vectorized)
    bound = dads_bound(
        V, traj.rho,
        np.linalg.norm(traj.d, axis=1),
        np.linalg.norm(traj.theta, axis=1),
        B, sc.plant.m, clf, params,
    )
    excess = np.maximum(vdot - bound, 0.0)
    k = int(np.argmax(excess))
    return CertificateReport(
        max_violation=float(excess[k]),
        violation_time=float(traj.t[k]),
        samples_checked=len(traj.t),
        bound_descriptor=f"dV/dt <= -rate_lb(V) + level(d, theta, rho; B={B!r})",
    )


@dataclass(frozen=True)
class TailStats:
    max_V: float
    max_norm_y: float
    mean_V: float


def tail_stats(traj, tail_fraction: float = 0.25) -> TailStats:
    k0 = _tail_start(len(traj.t), tail_fraction)
    V = traj.V[k0:]
    return TailStats(
        max_V=float(np.max(V)),
        max_norm_y=float(np.max(np.linalg.norm(traj.y[k0:], axis=1))),
        mean_V=float(np.mean(V)),
    )


@dataclass(frozen=True)
class DeadzoneReport:
    activity_fraction: float
    max_rate_in_deadzone: float
    first_window_activity: float
    tail_window_activity: float


def deadzone_check(traj, epsilon=None, window_fraction: float = 0.25) -> DeadzoneReport:
    """Where adaptation is active, and whether it is frozen inside the deadzone."""
    _require_dads(traj, "deadzone_check")
    eps = traj.scenario.controller.epsilon if epsilon is None else epsilon
    active = traj.V > eps
    inside = ~active
    rate_inside = float(np.max(np.abs(traj.rho_dot[inside]))) if inside.any() else 0.0
    n = len(traj.t)
    k_first = max(1, n - _tail_start(n, window_fraction))
    k_tail = _tail_start(n, window_fraction)
    return DeadzoneReport(
        activity_fraction=float(np.mean(active)),
        max_rate_in_deadzone=rate_inside,
        first_window_activity=float(np.mean(active[:k_first])),
        tail_window_activity=float(np.mean(active[k_tail:])),
    )


@dataclass(frozen=True)
class DriftMetric:
    rho_end: float
    late_increment: float

    @property
    def relative_increment(self) -> float:
        return self.late_increment / abs(self.rho_end) if self.rho_end else 0.0


def drift_metric(traj, split: float = 0.5) -> DriftMetric:
    """Final gain level and its growth after ``split * T``."""
    if traj.rho is None:
        raise ConfigurationError("drift_metric needs a trajectory with an adapted gain")
    k = _tail_start(len(traj.t), 1.0 - split)
    return DriftMetric(rho_end=float(traj.rho[-1]), late_increment=float(traj.rho[-1] - traj.rho[k]))


@dataclass(frozen=True)
class RegulationVerdict:
    regulated: bool
    gain_bounded: bool
    final_norm_y: float
    threshold: float
    max_rho: float

    @property
    def holds(self) -> bool:
        return self.regulated or self.gain_bounded


def regulation_dichotomy(traj, theta_tail, b_tail, kappa=None, regulation_tol=1e-3, d_tol=1e-9):
    """Check that the run either regulates ``y`` or keeps ``rho`` below ``max(theta_tail, 1/b_tail)``.

    Only meaningful for bundles with ``sigma = Lambda = 0`` and a vanishing
    disturbance; other inputs are rejected.
    """
    _require_dads(traj, "regulation_dichotomy")
    sc = traj.scenario
    kappa = sc.controller.kappa if kappa is None else kappa
    if sc.clf.sigma != 0 or sc.clf.Lambda != 0:
        raise ConfigurationError("regulation dichotomy needs a bundle with sigma = Lambda = 0")
    if not b_tail > 0:
        raise DomainError("b_tail must be positive")
    k0 = _tail_start(len(traj.t), 0.25)
    if traj.d.size and np.max(np.abs(traj.d[k0:])) > d_tol:
        raise ConfigurationError("regulation dichotomy needs a vanishing disturbance")
    final = float(np.linalg.norm(traj.y[-1]))
    M = max(theta_tail, 1.0 / b_tail)
    max_rho = float(np.max(traj.rho))
    return RegulationVerdict(
        regulated=final <= regulation_tol,
        gain_bounded=bool(M > kappa and max_rho < M),
        final_norm_y=final,
        threshold=M,
        max_rho=max_rho,
    )
