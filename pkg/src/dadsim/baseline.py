"""Sigma-modification adaptive controller for the uncertain double integrator.

With ``w = y2 + c y1`` the controller is::

    u        = -rho (y1 + c y2) - c rho w - rho (th1 y1 + th2 y2)
    th1'     = Gamma y1 w - Gamma sbar th1
    th2'     = Gamma y2 w - Gamma sbar th2
    rho'     = Gamma w ((1 + c^2 + th1) y1 + (2c + th2) y2) - Gamma sbar rho

``sbar = 0`` is the plain certainty-equivalence design. The functions accept
arrays so a whole trajectory can be processed at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .systems import ConstantSignal, ZeroSignal

__all__ = [
    "SigmaModParams",
    "SigmaModState",
    "c1_control",
    "c1_update",
    "c1_lyapunov",
    "c1_lyapunov_rate",
    "c1_bound",
    "c1_certificate",
]


@dataclass(frozen=True)
class SigmaModParams:
    sigma_bar: float
    gamma: float
    c: float

    def __post_init__(self):
        if self.sigma_bar < 0:
            raise ConfigurationError(f"leakage sigma_bar must be >= 0, got {self.sigma_bar}")
        if not self.gamma > 0 or not self.c > 0:
            raise ConfigurationError("gamma and c must be positive")


@dataclass
class SigmaModState:
    thetahat1: float
    thetahat2: float
    rho: float


def _split(y):
    y = np.asarray(y, dtype=float)
    return y[..., 0], y[..., 1]


def c1_control(params, y, st):
    y1, y2 = _split(y)
    c = params.c
    w = y2 + c * y1
    return -st.rho * (y1 + c * y2) - c * st.rho * w - st.rho * (st.thetahat1 * y1 + st.thetahat2 * y2)


def c1_update(params, y, st):
    """Return ``(thetahat1', thetahat2', rho')``."""
    y1, y2 = _split(y)
    c, G, sb = params.c, params.gamma, params.sigma_bar
    w = y2 + c * y1
    dth1 = G * y1 * w - G * sb * st.thetahat1
    dth2 = G * y2 * w - G * sb * st.thetahat2
    drho = G * w * ((1 + c * c + st.thetahat1) * y1 + (2 * c + st.thetahat2) * y2) - G * sb * st.rho
    return dth1, dth2, drho


def c1_lyapunov(params, y, st, theta, b):
    """Composite Lyapunov function using the true ``theta`` and ``b``."""
    y1, y2 = _split(y)
    c, G = params.c, params.gamma
    w = y2 + c * y1
    return (
        0.5 * y1**2
        + 0.5 * w**2
        + (st.thetahat1 - theta[0]) ** 2 / (2 * G)
        + (st.thetahat2 - theta[1]) ** 2 / (2 * G)
        + b / (2 * G) * (st.rho - 1.0 / b) ** 2
    )


def c1_lyapunov_rate(params, y, st, theta, b, d):
    """Time derivative of :func:`c1_lyapunov` along the closed loop (chain rule)."""
    y1, y2 = _split(y)
    c, G = params.c, params.gamma
    w = y2 + c * y1
    u = c1_control(params, y, st)
    dy1 = y2
    dy2 = theta[0] * y1 + theta[1] * y2 + b * u + d
    dth1, dth2, drho = c1_update(params, y, st)
    return (
        y1 * dy1
        + w * (dy2 + c * dy1)
        + (st.thetahat1 - theta[0]) * dth1 / G
        + (st.thetahat2 - theta[1]) * dth2 / G
        + b * (st.rho - 1.0 / b) * drho / G
    )


def c1_bound(params, y, st, theta, b, d):
    """Right-hand side of the differential inequality the design guarantees."""
    y1, y2 = _split(y)
    c, G, sb = params.c, params.gamma, params.sigma_bar
    d = np.asarray(d, dtype=float)
    if sb == 0:
        w = y2 + c * y1
        return -c * y1**2 - 0.5 * c * w**2 + d**2 / (2 * c)
    rate = min(c, sb * G)
    return (
        -rate * c1_lyapunov(params, y, st, theta, b)
        + d**2 / (2 * c)
        + 0.5 * sb * (theta[0] ** 2 + theta[1] ** 2 + 1.0 / b)
    )


def _constant_level(signal, label):
    if isinstance(signal, ConstantSignal):
        return signal.level
    if isinstance(signal, ZeroSignal):
        return 0.0
    raise ConfigurationError(f"the sigma-modification certificate needs constant {label}, got {signal.descriptor()!r}")


def c1_certificate(traj, theta_true=None, b_true=None, params=None):
    """Largest violation of the design inequality along a C1 trajectory.

    ``theta_true`` and ``b_true`` default to the constants of the trajectory's
    disturbance profile; time-varying profiles are rejected.
    """
    from .analysis import CertificateReport

    scenario = traj.scenario
    if traj.thetahat is None:
        raise ConfigurationError("c1_certificate needs a sigma-modification trajectory")
    params = params or scenario.controller
    prof = scenario.disturbance
    if theta_true is None:
        theta_true = [_constant_level(s, "theta") for s in prof.theta]
    if b_true is None:
        b_true = _constant_level(prof.b[0], "b")
    if not b_true > 0:
        raise DomainError("b must be positive")
    theta_true = np.asarray(theta_true, dtype=float)
    st = SigmaModState(traj.thetahat[:, 0], traj.thetahat[:, 1], traj.rho)
    d = traj.d[:, 0]
    vdot = c1_lyapunov_rate(params, traj.y, st, theta_true, b_true, d)
    bound = c1_bound(params, traj.y, st, theta_true, b_true, d)
    excess = np.maximum(vdot - bound, 0.0)
    k = int(np.argmax(excess))
    label = "noleak: -c y1^2 - (c/2) w^2 + d^2/(2c)" if params.sigma_bar == 0 else (
        "leak: -min(c, sbar Gamma) V + d^2/(2c) + (sbar/2)(|theta|^2 + 1/b)"
    )
    return CertificateReport(
        max_violation=float(excess[k]),
        violation_time=float(traj.t[k]),
        samples_checked=len(traj.t),
        bound_descriptor=label,
    )
