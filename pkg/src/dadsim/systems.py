"""Control-affine plants with matched uncertainty, and disturbance signals.

A plant has the form::

    dy/dt = f(y) + sum_i g_i(y) * (b_i u_i + phi_i(y)' theta + A_i(y)' d)

The per-channel maps are stored as matrices so that the whole right-hand side
is a couple of tensor contractions:

* ``g(y)``   -> ``(n, m)``, column ``i`` is ``g_i(y)``
* ``phi(y)`` -> ``(m, p)``, row ``i`` is ``phi_i(y)``
* ``A(y)``   -> ``(m, q)``, row ``i`` is ``A_i(y)``

Evaluators flagged ``vectorized=True`` also accept a stack of states with
shape ``(..., n)`` and broadcast over the leading axes.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .errors import ContractError, DomainError, ModelError

__all__ = [
    "PlantModel",
    "ZeroSignal",
    "ConstantSignal",
    "SinusoidSignal",
    "PiecewiseConstantSignal",
    "DisturbanceProfile",
    "plant_rhs",
    "double_integrator_plant",
    "signal_eval",
    "parse_signal",
    "parse_vector_signal",
    "format_vector_signal",
]


@dataclass(frozen=True, eq=True)
class PlantModel:
    n: int
    m: int
    p: int
    q: int
    f: Callable
    g: Callable
    phi: Callable
    A: Callable
    name: str = "custom"
    vectorized: bool = False

    def __post_init__(self):
        for key in ("n", "m", "p", "q"):
            if getattr(self, key) < 0 or (key in ("n", "m") and getattr(self, key) < 1):
                raise ContractError(f"plant dimension {key}={getattr(self, key)} is invalid")

    def evaluate(self, y):
        """Return ``(f, g, phi, A)`` at ``y``, finite-checked."""
        out = (
            np.asarray(self.f(y), dtype=float),
            np.asarray(self.g(y), dtype=float),
            np.asarray(self.phi(y), dtype=float),
            np.asarray(self.A(y), dtype=float),
        )
        for label, arr in zip(("f", "g", "phi", "A"), out):
            if not np.all(np.isfinite(arr)):
                raise ModelError(f"plant evaluator {label} returned a non-finite value at y={y!r}")
        return out


def _check_vector(name, arr, size):
    if arr.shape[-1:] != (size,):
        raise ContractError(f"{name} must have trailing dimension {size}, got shape {arr.shape}")


def plant_rhs(plant: PlantModel, y, u, theta, d, b) -> np.ndarray:
    """State velocity of the plant for input ``u`` and disturbances ``theta, d, b``.

    All arguments may carry matching leading batch axes when the plant is
    vectorized.
    """
    y = np.asarray(y, dtype=float)
    u = np.asarray(u, dtype=float)
    theta = np.asarray(theta, dtype=float)
    d = np.asarray(d, dtype=float)
    b = np.asarray(b, dtype=float)
    _check_vector("y", y, plant.n)
    _check_vector("u", u, plant.m)
    _check_vector("b", b, plant.m)
    if plant.p:
        _check_vector("theta", theta, plant.p)
    if plant.q:
        _check_vector("d", d, plant.q)
    if np.any(b <= 0):
        raise DomainError("input coefficients b_i must be positive")

    f, g, phi, A = plant.evaluate(y)
    coef = b * u
    if plant.p:
        coef = coef + np.einsum("...ip,...p->...i", phi, theta)
    if plant.q:
        coef = coef + np.einsum("...iq,...q->...i", A, d)
    out = f + np.einsum("...ni,...i->...n", g, coef)
    if not np.all(np.isfinite(out)):
        raise ModelError(f"plant right-hand side is not finite at y={y!r}")
    return out


def _di_f(y):
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    out[..., 0] = y[..., 1]
    return out


def _di_g(y):
    y = np.asarray(y, dtype=float)
    out = np.zeros(y.shape[:-1] + (2, 1))
    out[..., 1, 0] = 1.0
    return out


def _di_phi(y):
    return np.asarray(y, dtype=float)[..., None, :].copy()


def _di_A(y):
    return np.ones(np.shape(y)[:-1] + (1, 1))


@functools.lru_cache(maxsize=None)
def double_integrator_plant() -> PlantModel:
    """Uncertain double integrator: y1' = y2, y2' = theta1 y1 + theta2 y2 + b u + d."""
    return PlantModel(
        n=2, m=1, p=2, q=1,
        f=_di_f, g=_di_g, phi=_di_phi, A=_di_A,
        name="double_integrator",
        vectorized=True,
    )


# Signals -------------------------------------------------------------------


def _check_time(t):
    if (t < 0) if isinstance(t, (int, float)) else np.any(np.asarray(t) < 0):
        raise DomainError(f"signals are defined for t >= 0, got t={t!r}")


@dataclass(frozen=True)
class ZeroSignal:
    def value(self, t):
        _check_time(t)
        return np.zeros(np.shape(t)) if np.ndim(t) else 0.0

    def lower_bound(self):
        return 0.0

    def sup_abs(self):
        return 0.0

    def descriptor(self):
        return "zero"


@dataclass(frozen=True)
class ConstantSignal:
    level: float

    def value(self, t):
        _check_time(t)
        return np.full(np.shape(t), self.level) if np.ndim(t) else float(self.level)

    def lower_bound(self):
        return float(self.level)

    def sup_abs(self):
        return abs(float(self.level))

    def descriptor(self):
        return f"const {_fmt(self.level)}"


@dataclass(frozen=True)
class SinusoidSignal:
    """``offset + amplitude * sin(omega * t + phase)``."""

    amplitude: float
    omega: float = 1.0
    phase: float = 0.0
    offset: float = 0.0

    def value(self, t):
        _check_time(t)
        if np.ndim(t):
            return self.offset + self.amplitude * np.sin(self.omega * np.asarray(t) + self.phase)
        return self.offset + self.amplitude * math.sin(self.omega * t + self.phase)

    def lower_bound(self):
        return float(self.offset - abs(self.amplitude))

    def sup_abs(self):
        return float(abs(self.offset) + abs(self.amplitude))

    def descriptor(self):
        parts = [self.amplitude, self.omega, self.phase, self.offset]
        return "sin " + " ".join(_fmt(v) for v in parts)


@dataclass(frozen=True)
class PiecewiseConstantSignal:
    """Holds ``values[j]`` on ``[times[j], times[j+1])``; ``times[0]`` must be 0."""

    times: tuple
    values: tuple

    def __post_init__(self):
        times = tuple(float(v) for v in self.times)
        values = tuple(float(v) for v in self.values)
        if not times or len(times) != len(values):
            raise DomainError("piecewise signal needs equally many breakpoints and values")
        if times[0] != 0.0:
            raise DomainError("piecewise signal must start at t=0")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise DomainError("piecewise breakpoints must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def value(self, t):
        _check_time(t)
        idx = np.searchsorted(self.times, t, side="right") - 1
        vals = np.asarray(self.values)[idx]
        return vals if np.ndim(t) else float(vals)

    def lower_bound(self):
        return min(self.values)

    def sup_abs(self):
        return max(abs(v) for v in self.values)

    def descriptor(self):
        return "pwc " + " ".join(f"{_fmt(a)}:{_fmt(v)}" for a, v in zip(self.times, self.values))


Signal = Union[ZeroSignal, ConstantSignal, SinusoidSignal, PiecewiseConstantSignal]


def signal_eval(signal, t):
    """Evaluate a scalar signal, or a tuple of them as a vector, at time ``t``."""
    if isinstance(signal, (tuple, list)):
        return np.array([s.value(t) for s in signal], dtype=float)
    return signal.value(t)


def _fmt(x):
    return repr(float(x))


def parse_signal(text: str) -> Signal:
    """Parse a scalar signal descriptor such as ``sin 2 1 0 0`` or ``pwc 0:1 5:2``."""
    tokens = text.split()
    if not tokens:
        raise DomainError("empty signal descriptor")
    kind, args = tokens[0].lower(), tokens[1:]
    try:
        if kind == "zero" and not args:
            return ZeroSignal()
        if kind == "const" and len(args) == 1:
            return ConstantSignal(float(args[0]))
        if kind == "sin" and 1 <= len(args) <= 4:
            return SinusoidSignal(*(float(a) for a in args))
        if kind == "pwc" and args:
            pairs = [a.split(":") for a in args]
            if any(len(pair) != 2 for pair in pairs):
                raise ValueError("breakpoints must look like t:v")
            return PiecewiseConstantSignal(
                tuple(float(p[0]) for p in pairs), tuple(float(p[1]) for p in pairs)
            )
    except (ValueError, IndexError) as exc:
        raise DomainError(f"malformed signal descriptor {text!r}: {exc}") from None
    raise DomainError(
        f"malformed signal descriptor {text!r}; expected 'zero', 'const v', "
        "'sin amp [omega [phase [offset]]]' or 'pwc t0:v0 t1:v1 ...'"
    )


def parse_vector_signal(text: str) -> tuple:
    return tuple(parse_signal(part) for part in text.split(","))


def format_vector_signal(signals: Sequence[Signal]) -> str:
    return ", ".join(s.descriptor() for s in signals)


@dataclass(frozen=True)
class DisturbanceProfile:
    """Time-varying ``d(t)``, ``theta(t)`` and input coefficients ``b(t)``."""

    d: tuple
    theta: tuple
    b: tuple

    def __post_init__(self):
        for key in ("d", "theta", "b"):
            object.__setattr__(self, key, tuple(getattr(self, key)))
        if not self.b:
            raise DomainError("at least one input coefficient signal is required")
        for i, sig in enumerate(self.b):
            if sig.lower_bound() <= 0:
                raise DomainError(f"input coefficient b{i + 1} must stay positive, got {sig.descriptor()!r}")

    def d_at(self, t):
        return signal_eval(self.d, t)

    def theta_at(self, t):
        return signal_eval(self.theta, t)

    def b_at(self, t):
        return signal_eval(self.b, t)

    def b_floor(self) -> float:
        """Lower bound of ``min_i inf_t b_i(t)``."""
        return min(sig.lower_bound() for sig in self.b)

    def check_dimensions(self, plant: PlantModel):
        sizes = {"d": plant.q, "theta": plant.p, "b": plant.m}
        for key, size in sizes.items():
            if len(getattr(self, key)) != size:
                raise ContractError(f"disturbance {key} has {len(getattr(self, key))} components, plant needs {size}")
