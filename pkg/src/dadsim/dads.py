"""Deadzone-adapted disturbance suppression (DADS) controller.

The controller has a single adapted gain ``rho = kappa + exp(z)``::

    u_i    = -r_i(y, rho) * LgV_i(y)
    rho'   = Gamma * max(V(y) - epsilon, 0)

Three gain laws are available. ``full`` works for any bundle provided
``2 C kappa >= 1``; ``simplified`` needs ``sigma = Lambda = 0``; ``matched``
additionally needs a vanishing regressor ``phi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError

__all__ = [
    "VARIANTS",
    "DadsParams",
    "DadsState",
    "gain_full",
    "gain_simplified",
    "gain_matched",
    "gain",
    "dads_control",
    "adaptation_rate",
    "chi",
]

VARIANTS = ("full", "simplified", "matched")


@dataclass(frozen=True)
class DadsParams:
    epsilon: float
    gamma: float
    C: float
    kappa: float
    variant: str = "full"

    def __post_init__(self):
        for key in ("epsilon", "gamma", "C", "kappa"):
            if not getattr(self, key) > 0:
                raise ConfigurationError(f"DADS parameter {key} must be positive, got {getattr(self, key)}")
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"unknown DADS variant {self.variant!r}; choose from {VARIANTS}")
        if self.variant == "full":
            _require_full(self)


def _require_full(params):
    if 2.0 * params.C * params.kappa < 1.0:
        raise ConfigurationError(
            f"variant 'full' requires 2Cκ ≥ 1, got 2*{params.C}*{params.kappa} = {2 * params.C * params.kappa}"
        )


@dataclass
class DadsState:
    """Adapted gain ``rho``; ``z = ln(rho - kappa)`` is derived."""

    rho: float
    kappa: float

    def __post_init__(self):
        if not self.rho > self.kappa:
            raise DomainError(f"adapted gain must satisfy ρ > κ, got rho={self.rho}, kappa={self.kappa}")

    @property
    def z(self) -> float:
        return math.log(self.rho - self.kappa)


def _check_rho(params, rho):
    if (rho <= params.kappa) if isinstance(rho, float) else np.any(np.asarray(rho) <= params.kappa):
        raise DomainError(f"gain rho={rho} must exceed kappa={params.kappa}")


def _channels(plant, clf, y):
    y = np.asarray(y, dtype=float)
    lgv = clf.lgv(plant, y)
    phi_sq = np.sum(np.asarray(plant.phi(y), dtype=float) ** 2, axis=-1)
    a_sq = np.sum(np.asarray(plant.A(y), dtype=float) ** 2, axis=-1)
    s = np.asarray(clf.s(y), dtype=float)
    mu = np.asarray(clf.mu(y), dtype=float)[..., None]
    return lgv, phi_sq, a_sq, s, mu


def _require_sigma_lambda_zero(clf, variant):
    if clf.sigma != 0 or clf.Lambda != 0:
        raise ConfigurationError(
            f"variant {variant!r} requires a bundle with sigma = Lambda = 0, "
            f"got sigma={clf.sigma}, Lambda={clf.Lambda}"
        )


def gain_full(plant, clf, params, y, rho):
    """Gains ``r_i`` of the general law; valid for any bundle when ``2 C kappa >= 1``."""
    _require_full(params)
    _check_rho(params, rho)
    lgv, phi_sq, a_sq, s, mu = _channels(plant, clf, y)
    delta = np.asarray(clf.delta(y), dtype=float)
    C, E = params.C, np.asarray(rho, dtype=float)[..., None]
    L2 = lgv**2
    P = phi_sq + a_sq + E**2 * mu + delta**2
    return C * E * s**2 * L2 + E * s + C**3 * E**3 * P**2 * L2 + C * E**2 * P


def gain_simplified(plant, clf, params, y, rho):
    _require_sigma_lambda_zero(clf, "simplified")
    _check_rho(params, rho)
    lgv, phi_sq, a_sq, s, mu = _channels(plant, clf, y)
    C, E = params.C, np.asarray(rho, dtype=float)[..., None]
    P = s + 0.5 * mu * E**2 + C * E * (a_sq + phi_sq)
    return E * P * (1.0 + C * P * lgv**2)


def gain_matched(plant, clf, params, y, rho):
    _require_sigma_lambda_zero(clf, "matched")
    _check_rho(params, rho)
    if np.any(np.asarray(plant.phi(y)) != 0):
        raise ConfigurationError(f"variant 'matched' requires phi ≡ 0, found nonzero phi at y={y!r}")
    lgv, _, a_sq, s, _ = _channels(plant, clf, y)
    C, E = params.C, np.asarray(rho, dtype=float)[..., None]
    P = s + C * E * a_sq
    return E * P * (1.0 + C * P * lgv**2)


_GAINS = {"full": gain_full, "simplified": gain_simplified, "matched": gain_matched}


def gain(plant, clf, params, y, rho):
    """Gains of the variant configured in ``params``."""
    return _GAINS[params.variant](plant, clf, params, y, rho)


def dads_control(plant, clf, params, y, rho):
    """Control input ``u_i = -r_i(y, rho) LgV_i(y)``."""
    return -gain(plant, clf, params, y, rho) * clf.lgv(plant, y)


def adaptation_rate(clf, params, y, rho=None):
    """``d rho/dt = Gamma * max(V(y) - epsilon, 0)``; exactly zero inside the deadzone."""
    if rho is not None:
        _check_rho(params, rho)
    return params.gamma * np.maximum(np.asarray(clf.V(y), dtype=float) - params.epsilon, 0.0)


def chi(s1, s2, s3, s4, m, sigma, Lambda, C, kappa):
    """Disturbance level entering the gain bound of the closed loop.

    ``s1``: disturbance bound, ``s2``: parameter bound, ``s3``: lower bound of
    the input coefficients, ``s4``: gain level ``exp(z)``.
    """
    if not s3 > 0:
        raise DomainError(f"input-coefficient lower bound s3 must be positive, got {s3}")
    if s1 < 0 or s2 < 0 or s4 < 0:
        raise DomainError("s1, s2 and s4 must be nonnegative")
    level = kappa + s4
    num = (
        m * s1**2
        + m * sigma**2
        + m * max(s2 - level, 0.0) ** 2
        + 2.0 * C * kappa * Lambda
        + 2.0 * m * s3 * max(1.0 / s3 - level, 0.0) ** 2
    )
    return num / (4.0 * C * level)
