"""Compiled closed loops for the double integrator.

These duplicate the generic composition in :mod:`dadsim.sim` with scalar
arithmetic so a 10**6-step run takes well under a second. The test suite
checks both routes against each other.
"""

import math

import numpy as np
from numba import njit

from .systems import ConstantSignal, PiecewiseConstantSignal, SinusoidSignal, ZeroSignal

OK, BLOWUP, NONFINITE = 0, 1, 2


def encode_signals(signals):
    """Pack scalar signal descriptors into flat arrays for the kernels."""
    k = len(signals)
    kinds = np.zeros(k, dtype=np.int64)
    par = np.zeros((k, 4))
    start = np.zeros(k, dtype=np.int64)
    length = np.zeros(k, dtype=np.int64)
    tab_t, tab_v = [], []
    for j, sig in enumerate(signals):
        if isinstance(sig, ZeroSignal):
            kinds[j] = 0
        elif isinstance(sig, ConstantSignal):
            kinds[j] = 1
            par[j, 0] = sig.level
        elif isinstance(sig, SinusoidSignal):
            kinds[j] = 2
            par[j] = (sig.amplitude, sig.omega, sig.phase, sig.offset)
        elif isinstance(sig, PiecewiseConstantSignal):
            kinds[j] = 3
            start[j] = len(tab_t)
            length[j] = len(sig.times)
            tab_t.extend(sig.times)
            tab_v.extend(sig.values)
        else:
            raise TypeError(f"cannot compile signal {sig!r}")
    return kinds, par, start, length, np.array(tab_t + [0.0]), np.array(tab_v + [0.0])


@njit(cache=True)
def _sig(j, t, kinds, par, start, length, tab_t, tab_v):
    kind = kinds[j]
    if kind == 0:
        return 0.0
    if kind == 1:
        return par[j, 0]
    if kind == 2:
        return par[j, 3] + par[j, 0] * math.sin(par[j, 1] * t + par[j, 2])
    s = start[j]
    v = tab_v[s]
    for i in range(1, length[j]):
        if tab_t[s + i] <= t:
            v = tab_v[s + i]
        else:
            break
    return v


@njit(cache=True)
def _dads_u(y1, y2, rho, c, s, mu, C, full):
    w = y2 + c * y1
    L2 = w * w
    E = rho
    if full:
        P = (y1 * y1 + y2 * y2) + 1.0 + E * E * mu
        r = C * E * s * s * L2 + E * s + C**3 * E**3 * P * P * L2 + C * E * E * P
    else:
        P = s + 0.5 * mu * E * E + C * E * (1.0 + (y1 * y1 + y2 * y2))
        r = E * P * (1.0 + C * P * L2)
    return -r * w


@njit(cache=True)
def _dads_rhs(t, y1, y2, rho, c, s, mu, eps, G, C, full, kinds, par, st, ln, tt, tv):
    u = _dads_u(y1, y2, rho, c, s, mu, C, full)
    d = _sig(0, t, kinds, par, st, ln, tt, tv)
    th1 = _sig(1, t, kinds, par, st, ln, tt, tv)
    th2 = _sig(2, t, kinds, par, st, ln, tt, tv)
    b = _sig(3, t, kinds, par, st, ln, tt, tv)
    w = y2 + c * y1
    V = 0.5 * y1 * y1 + 0.5 * w * w
    return y2, b * u + (y1 * th1 + y2 * th2) + d, G * max(V - eps, 0.0)


@njit(cache=True)
def dads_double_integrator(x0, dt, n_steps, every, c, s, mu, eps, G, C, full, thr,
                           kinds, par, st, ln, tt, tv):
    n_rec = n_steps // every + 1
    X = np.empty((n_rec, 3))
    U = np.empty(n_rec)
    V = np.empty(n_rec)
    RD = np.empty(n_rec)
    SIG = np.empty((n_rec, 4))
    y1, y2, rho = x0[0], x0[1], x0[2]
    h = 0.5 * dt
    for k in range(n_steps + 1):
        t = k * dt
        if k % every == 0:
            i = k // every
            X[i, 0] = y1
            X[i, 1] = y2
            X[i, 2] = rho
            U[i] = _dads_u(y1, y2, rho, c, s, mu, C, full)
            w = y2 + c * y1
            V[i] = 0.5 * y1 * y1 + 0.5 * w * w
            RD[i] = G * max(V[i] - eps, 0.0)
            for j in range(4):
                SIG[i, j] = _sig(j, t, kinds, par, st, ln, tt, tv)
        if k == n_steps:
            break
        a1, a2, a3 = _dads_rhs(t, y1, y2, rho, c, s, mu, eps, G, C, full, kinds, par, st, ln, tt, tv)
        b1, b2, b3 = _dads_rhs(t + h, y1 + h * a1, y2 + h * a2, rho + h * a3,
                               c, s, mu, eps, G, C, full, kinds, par, st, ln, tt, tv)
        c1, c2, c3 = _dads_rhs(t + h, y1 + h * b1, y2 + h * b2, rho + h * b3,
                               c, s, mu, eps, G, C, full, kinds, par, st, ln, tt, tv)
        d1, d2, d3 = _dads_rhs(t + dt, y1 + dt * c1, y2 + dt * c2, rho + dt * c3,
                               c, s, mu, eps, G, C, full, kinds, par, st, ln, tt, tv)
        n1 = y1 + dt / 6.0 * (a1 + 2.0 * b1 + 2.0 * c1 + d1)
        n2 = y2 + dt / 6.0 * (a2 + 2.0 * b2 + 2.0 * c2 + d2)
        n3 = rho + dt / 6.0 * (a3 + 2.0 * b3 + 2.0 * c3 + d3)
        if not (math.isfinite(n1) and math.isfinite(n2) and math.isfinite(n3)):
            return NONFINITE, k, np.array([y1, y2, rho]), X, U, V, RD, SIG
        if abs(n1) > thr or abs(n2) > thr or abs(n3) > thr:
            return BLOWUP, k, np.array([y1, y2, rho]), X, U, V, RD, SIG
        y1, y2, rho = n1, n2, n3
    return OK, n_steps, np.array([y1, y2, rho]), X, U, V, RD, SIG


@njit(cache=True)
def _c1_u(y1, y2, h1, h2, rho, c):
    w = y2 + c * y1
    return -rho * (y1 + c * y2) - c * rho * w - rho * (h1 * y1 + h2 * y2)


@njit(cache=True)
def _c1_rhs(t, y1, y2, h1, h2, rho, c, G, sb, kinds, par, st, ln, tt, tv):
    u = _c1_u(y1, y2, h1, h2, rho, c)
    d = _sig(0, t, kinds, par, st, ln, tt, tv)
    th1 = _sig(1, t, kinds, par, st, ln, tt, tv)
    th2 = _sig(2, t, kinds, par, st, ln, tt, tv)
    b = _sig(3, t, kinds, par, st, ln, tt, tv)
    w = y2 + c * y1
    return np.array((
        y2,
        b * u + (y1 * th1 + y2 * th2) + d,
        G * y1 * w - G * sb * h1,
        G * y2 * w - G * sb * h2,
        G * w * ((1 + c * c + h1) * y1 + (2 * c + h2) * y2) - G * sb * rho,
    ))


@njit(cache=True)
def c1_double_integrator(x0, dt, n_steps, every, c, G, sb, thr, kinds, par, st, ln, tt, tv):
    n_rec = n_steps // every + 1
    X = np.empty((n_rec, 5))
    U = np.empty(n_rec)
    V = np.empty(n_rec)
    RD = np.empty(n_rec)
    SIG = np.empty((n_rec, 4))
    x = x0.copy()
    h = 0.5 * dt
    for k in range(n_steps + 1):
        t = k * dt
        if k % every == 0:
            i = k // every
            X[i] = x
            U[i] = _c1_u(x[0], x[1], x[2], x[3], x[4], c)
            w = x[1] + c * x[0]
            V[i] = 0.5 * x[0] * x[0] + 0.5 * w * w
            RD[i] = G * w * ((1 + c * c + x[2]) * x[0] + (2 * c + x[3]) * x[1]) - G * sb * x[4]
            for j in range(4):
                SIG[i, j] = _sig(j, t, kinds, par, st, ln, tt, tv)
        if k == n_steps:
            break
        k1 = _c1_rhs(t, x[0], x[1], x[2], x[3], x[4], c, G, sb, kinds, par, st, ln, tt, tv)
        z = x + h * k1
        k2 = _c1_rhs(t + h, z[0], z[1], z[2], z[3], z[4], c, G, sb, kinds, par, st, ln, tt, tv)
        z = x + h * k2
        k3 = _c1_rhs(t + h, z[0], z[1], z[2], z[3], z[4], c, G, sb, kinds, par, st, ln, tt, tv)
        z = x + dt * k3
        k4 = _c1_rhs(t + dt, z[0], z[1], z[2], z[3], z[4], c, G, sb, kinds, par, st, ln, tt, tv)
        xn = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        for j in range(5):
            if not math.isfinite(xn[j]):
                return NONFINITE, k, x, X, U, V, RD, SIG
        for j in range(5):
            if abs(xn[j]) > thr:
                return BLOWUP, k, x, X, U, V, RD, SIG
        x = xn
    return OK, n_steps, x, X, U, V, RD, SIG
