"""Fixed-step closed-loop simulation of plant, controller and disturbances."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from . import _kernels
from .baseline import SigmaModParams, SigmaModState, c1_control, c1_update
from .clf import CLFBundle, _di_constants, sample_box
from .dads import DadsParams, adaptation_rate, dads_control
from .errors import BlowupError, ConfigurationError, ContractError, IntegrationError, ModelError
from .systems import DisturbanceProfile, PlantModel, plant_rhs

__all__ = [
    "Scenario",
    "Trajectory",
    "RefineReport",
    "rk4_step",
    "integrate",
    "refine_check",
    "max_abs",
]

Controller = Union[DadsParams, SigmaModParams, None]


def _as_tuple(v):
    return None if v is None else tuple(float(x) for x in np.atleast_1d(v))


@dataclass(frozen=True)
class Scenario:
    """Everything needed to reproduce one closed-loop run.

    ``controller=None`` runs the plant open loop with ``u = 0``.
    """

    plant: PlantModel
    clf: Optional[CLFBundle]
    controller: Controller
    y0: tuple
    disturbance: DisturbanceProfile
    rho0: Optional[float] = None
    thetahat0: Optional[tuple] = None
    T: float = 100.0
    dt: float = 1e-4
    blowup_threshold: float = 1e8
    seed: int = 0
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "y0", _as_tuple(self.y0))
        object.__setattr__(self, "thetahat0", _as_tuple(self.thetahat0))
        if self.rho0 is not None:
            object.__setattr__(self, "rho0", float(self.rho0))
        self.validate()

    @property
    def kind(self) -> str:
        if isinstance(self.controller, DadsParams):
            return "dads"
        if isinstance(self.controller, SigmaModParams):
            return "sigma_mod"
        if self.controller is None:
            return "open_loop"
        raise ConfigurationError(f"unknown controller configuration {self.controller!r}")

    @property
    def n_steps(self) -> int:
        return _n_steps(self.T, self.dt)

    def validate(self):
        if not self.T > 0:
            raise ConfigurationError(f"horizon T must be positive, got {self.T}")
        if not self.dt > 0:
            raise ConfigurationError(f"step dt must be positive, got {self.dt}")
        if self.dt > self.T:
            raise ConfigurationError(f"step dt={self.dt} exceeds horizon T={self.T}")
        if not self.blowup_threshold > 0:
            raise ConfigurationError("blowup_threshold must be positive")
        if len(self.y0) != self.plant.n:
            raise ContractError(f"y0 has {len(self.y0)} components, plant state has {self.plant.n}")
        self.disturbance.check_dimensions(self.plant)
        kind = self.kind
        if kind == "dads":
            ctrl = self.controller
            if self.clf is None:
                raise ConfigurationError("a DADS scenario needs a CLF bundle")
            if self.rho0 is None or not self.rho0 > ctrl.kappa:
                raise ConfigurationError(f"initial gain must satisfy ρ₀ > κ, got rho0={self.rho0}, kappa={ctrl.kappa}")
            if ctrl.variant in ("simplified", "matched") and (self.clf.sigma != 0 or self.clf.Lambda != 0):
                raise ConfigurationError(f"variant {ctrl.variant!r} requires a bundle with sigma = Lambda = 0")
            if ctrl.variant == "matched":
                pts = sample_box(self.plant.n, 5.0, 5, 50, self.seed)
                if any(np.any(np.asarray(self.plant.phi(y)) != 0) for y in pts):
                    raise ConfigurationError("variant 'matched' requires phi ≡ 0")
        elif kind == "sigma_mod":
            if self.plant.name != "double_integrator":
                raise ConfigurationError("the sigma-modification controller is defined for the double integrator only")
            if self.rho0 is None or self.thetahat0 is None or len(self.thetahat0) != 2:
                raise ConfigurationError("sigma-modification scenario needs rho0 and a 2-vector thetahat0")


def _n_steps(T, dt):
    ratio = T / dt
    nearest = round(ratio)
    if abs(ratio - nearest) <= 1e-9 * max(1.0, ratio):
        return int(nearest)
    return int(math.floor(ratio))


@dataclass(eq=False)
class Trajectory:
    """Uniformly sampled record of a closed-loop run.

    Arrays have one row per sample; ``rho`` and ``rho_dot`` are ``None`` for
    open-loop runs and ``thetahat`` is set only for sigma-modification runs.
    """

    scenario: Scenario
    t: np.ndarray
    y: np.ndarray
    u: np.ndarray
    V: np.ndarray
    d: np.ndarray
    theta: np.ndarray
    b: np.ndarray
    rho: Optional[np.ndarray] = None
    rho_dot: Optional[np.ndarray] = None
    thetahat: Optional[np.ndarray] = None

    @property
    def kind(self) -> str:
        return self.scenario.kind

    @property
    def z(self):
        if self.kind != "dads":
            return None
        return np.log(self.rho - self.scenario.controller.kappa)

    def __len__(self):
        return len(self.t)

    def states(self) -> np.ndarray:
        """Combined plant and controller state, one row per sample."""
        cols = [self.y]
        if self.thetahat is not None:
            cols.append(self.thetahat)
        if self.rho is not None:
            cols.append(self.rho[:, None])
        return np.hstack(cols)


def rk4_step(rhs: Callable, t: float, x, dt: float) -> np.ndarray:
    """One classical Runge-Kutta step of ``x' = rhs(t, x)``."""
    x = np.asarray(x, dtype=float)
    h = 0.5 * dt

    def stage(ts, xs):
        try:
            k = np.asarray(rhs(ts, xs), dtype=float)
        except ModelError as exc:
            raise IntegrationError(f"model error at t={ts}: {exc}", time=ts, state=xs) from exc
        if not np.all(np.isfinite(k)):
            raise IntegrationError(f"non-finite right-hand side at t={ts}", time=ts, state=xs)
        return k

    k1 = stage(t, x)
    k2 = stage(t + h, x + h * k1)
    k3 = stage(t + h, x + h * k2)
    k4 = stage(t + dt, x + dt * k3)
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# generic route ---------------------------------------------------------------


def _initial_state(sc: Scenario) -> np.ndarray:
    parts = [np.asarray(sc.y0)]
    if sc.kind == "dads":
        parts.append([sc.rho0])
    elif sc.kind == "sigma_mod":
        parts.append(list(sc.thetahat0) + [sc.rho0])
    return np.concatenate(parts).astype(float)


def _generic_model(sc: Scenario):
    """Return ``(rhs, observe)`` for the combined state of scenario ``sc``.

    ``observe(t, x)`` yields ``(u, V, rho_dot, d, theta, b)`` at a sample.
    """
    plant, clf, ctrl, prof = sc.plant, sc.clf, sc.controller, sc.disturbance
    n, kind = plant.n, sc.kind

    def V_of(y):
        if clf is not None:
            return float(clf.V(y))
        return 0.5 * float(np.dot(y, y))

    if kind == "dads":
        def control(x):
            return dads_control(plant, clf, ctrl, x[:n], x[n])

        def ctrl_rate(x):
            return np.atleast_1d(adaptation_rate(clf, ctrl, x[:n], x[n]))

    elif kind == "sigma_mod":
        def _st(x):
            return SigmaModState(x[n], x[n + 1], x[n + 2])

        def control(x):
            return np.atleast_1d(c1_control(ctrl, x[:n], _st(x)))

        def ctrl_rate(x):
            return np.array(c1_update(ctrl, x[:n], _st(x)), dtype=float)

    else:
        def control(x):
            return np.zeros(plant.m)

        def ctrl_rate(x):
            return np.zeros(0)

    def rhs(t, x):
        u = control(x)
        ydot = plant_rhs(plant, x[:n], u, prof.theta_at(t), prof.d_at(t), prof.b_at(t))
        return np.concatenate([ydot, ctrl_rate(x)])

    def observe(t, x):
        rate = ctrl_rate(x)
        return (
            control(x),
            V_of(x[:n]),
            rate[-1] if rate.size else np.nan,
            prof.d_at(t),
            prof.theta_at(t),
            prof.b_at(t),
        )

    return rhs, observe


def _check_state(x, thr, last_t, last_x):
    if not np.all(np.isfinite(x)):
        raise IntegrationError(f"non-finite state after t={last_t}", time=last_t, state=last_x)
    if np.max(np.abs(x)) > thr:
        raise BlowupError(
            f"state exceeded blowup threshold {thr:g} after t={last_t:g}", time=last_t, state=last_x
        )


def _run_generic(sc: Scenario, dt: float, every: int):
    rhs, observe = _generic_model(sc)
    n_steps = _n_steps(sc.T, dt)
    x = _initial_state(sc)
    _check_state(x, sc.blowup_threshold, 0.0, x)
    rec = []
    obs = []
    for k in range(n_steps + 1):
        t = k * dt
        if k % every == 0:
            rec.append(x.copy())
            obs.append(observe(t, x))
        if k == n_steps:
            break
        xn = rk4_step(rhs, t, x, dt)
        _check_state(xn, sc.blowup_threshold, t, x)
        x = xn
    X = np.array(rec)
    cols = list(zip(*obs))
    return {
        "X": X,
        "U": np.array(cols[0], dtype=float).reshape(len(X), sc.plant.m),
        "V": np.array(cols[1], dtype=float),
        "RD": np.array(cols[2], dtype=float),
        "D": np.array(cols[3], dtype=float).reshape(len(X), sc.plant.q),
        "TH": np.array(cols[4], dtype=float).reshape(len(X), sc.plant.p),
        "B": np.array(cols[5], dtype=float).reshape(len(X), sc.plant.m),
    }


# compiled route --------------------------------------------------------------


def _compilable(sc: Scenario) -> bool:
    if sc.plant.name != "double_integrator" or sc.clf is None or sc.clf.name != "double_integrator":
        return False
    if sc.kind == "dads":
        return sc.controller.variant in ("full", "simplified")
    return sc.kind == "sigma_mod"


def _run_compiled(sc: Scenario, dt: float, every: int):
    prof = sc.disturbance
    enc = _kernels.encode_signals(prof.d + prof.theta + prof.b)
    n_steps = _n_steps(sc.T, dt)
    c = dict(sc.clf.params)["c"]
    x0 = _initial_state(sc)
    _check_state(x0, sc.blowup_threshold, 0.0, x0)
    if sc.kind == "dads":
        s, mu = _di_constants(c)
        p = sc.controller
        out = _kernels.dads_double_integrator(
            x0, dt, n_steps, every, c, s, mu, p.epsilon, p.gamma, p.C,
            p.variant == "full", sc.blowup_threshold, *enc,
        )
    else:
        p = sc.controller
        out = _kernels.c1_double_integrator(
            x0, dt, n_steps, every, p.c, p.gamma, p.sigma_bar, sc.blowup_threshold, *enc,
        )
    status, k, last, X, U, V, RD, SIG = out
    if status == _kernels.NONFINITE:
        raise IntegrationError(f"non-finite state after t={k * dt}", time=k * dt, state=last)
    if status == _kernels.BLOWUP:
        raise BlowupError(
            f"state exceeded blowup threshold {sc.blowup_threshold:g} after t={k * dt:g}",
            time=k * dt, state=last,
        )
    return {
        "X": X, "U": U[:, None], "V": V, "RD": RD,
        "D": SIG[:, :1], "TH": SIG[:, 1:3], "B": SIG[:, 3:],
    }


def _run(sc: Scenario, dt: float, every: int = 1, backend: str = "auto"):
    if backend not in ("auto", "compiled", "generic"):
        raise ConfigurationError(f"unknown backend {backend!r}")
    if backend == "compiled" and not _compilable(sc):
        raise ConfigurationError("no compiled kernel for this scenario; use backend='generic'")
    if backend == "compiled" or (backend == "auto" and _compilable(sc)):
        return _run_compiled(sc, dt, every)
    return _run_generic(sc, dt, every)


def integrate(scenario: Scenario, backend: str = "auto") -> Trajectory:
    """Integrate the closed loop over ``[0, T]`` with fixed-step RK4.

    ``backend='auto'`` uses the compiled kernel for the built-in double
    integrator and the generic composition otherwise.
    """
    sc = scenario
    raw = _run(sc, sc.dt, 1, backend)
    X, n = raw["X"], sc.plant.n
    traj = Trajectory(
        scenario=sc,
        t=np.arange(len(X)) * sc.dt,
        y=X[:, :n].copy(),
        u=raw["U"],
        V=raw["V"],
        d=raw["D"],
        theta=raw["TH"],
        b=raw["B"],
    )
    if sc.kind == "dads":
        traj.rho = X[:, n].copy()
        traj.rho_dot = raw["RD"]
    elif sc.kind == "sigma_mod":
        traj.thetahat = X[:, n:n + 2].copy()
        traj.rho = X[:, n + 2].copy()
        traj.rho_dot = raw["RD"]
    return traj


def max_abs(diff: np.ndarray) -> float:
    return float(np.max(np.abs(diff))) if diff.size else 0.0


@dataclass(frozen=True)
class RefineReport:
    dt: float
    discrepancy: float
    discrepancy_fine: float
    observed_order: float


def refine_check(scenario: Scenario, norm: Callable = max_abs, backend: str = "auto") -> RefineReport:
    """Self-convergence of the integrator at ``dt``, ``dt/2`` and ``dt/4``.

    States are compared on the coarse ``dt`` grid. ``discrepancy`` is
    ``norm(x_dt - x_dt/2)``; the observed order is
    ``log2(discrepancy / norm(x_dt/2 - x_dt/4))``.
    """
    dt = scenario.dt
    runs = [_run(scenario, dt / 2**j, 2**j, backend)["X"] for j in range(3)]
    e1 = norm(runs[0] - runs[1])
    e2 = norm(runs[1] - runs[2])
    if e1 == 0.0 and e2 == 0.0:
        order = math.inf
    elif e2 == 0.0:
        order = math.inf
    else:
        order = math.log2(e1 / e2) if e1 > 0 else -math.inf
    return RefineReport(dt=dt, discrepancy=e1, discrepancy_fine=e2, observed_order=order)
