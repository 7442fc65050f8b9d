"""Characteristic function of the diffusion-type equation.

The characteristic equation is the linear second-order ODE

    mu'' - tau(t) mu' - 4 sigma(t) mu = 0,    mu(t0) = 0,  mu'(t0) = 2 a(t0)

whose solution ``mu(t, t0)`` determines every coefficient of the heat kernel.
It is integrated with an embedded Dormand-Prince 4(5) pair under PI step
control.  Between nodes the solution is represented by quintic Hermite
polynomials matching ``(mu, mu', mu'')`` at every node; ``mu''`` is exact
from the ODE, so no accuracy is lost relative to the integrator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, NamedTuple

import numpy as np
from scipy.interpolate import BPoly

from .coeffs import CoefficientSet
from .errors import (
    CoefficientDomainError,
    DegenerateSetError,
    InvalidInitialDataError,
    NumericalError,
    StiffnessError,
)
from .expr import CoeffExpr, differentiate

DEFAULT_SPAN = 10.0

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_E = (
    71 / 57600,
    0.0,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)


@dataclass(frozen=True, eq=False)
class CharacteristicSolution:
    """Sampled solution ``(t, mu, mu', mu'')`` with a piecewise-quintic interpolant."""

    t0: float
    ts: np.ndarray
    mu_nodes: np.ndarray
    dmu_nodes: np.ndarray
    ddmu_nodes: np.ndarray
    source: str = "numeric"
    tol: float | None = None

    @property
    def t_end(self) -> float:
        return float(self.ts[-1])

    @cached_property
    def _poly(self):
        data = np.column_stack([self.mu_nodes, self.dmu_nodes, self.ddmu_nodes])
        return BPoly.from_derivatives(self.ts, data[:, None, :].reshape(len(self.ts), 3), extrapolate=False)

    @cached_property
    def _dpoly(self):
        return self._poly.derivative()

    @cached_property
    def _ddpoly(self):
        return self._poly.derivative(2)

    def _check_range(self, t):
        t = np.asarray(t, dtype=float)
        span = self.t_end - self.t0
        slack = 1e-13 * max(1.0, abs(self.t0), abs(self.t_end))
        if np.any(t < self.t0 - slack) or np.any(t > self.t_end + slack) or span < 0:
            raise NumericalError(
                f"t outside the solved interval [{self.t0}, {self.t_end}]"
            )
        return np.clip(t, self.t0, self.t_end)

    def mu(self, t):
        t = self._check_range(t)
        return self._poly(t)[()] if np.ndim(t) == 0 else self._poly(t)

    def dmu(self, t):
        t = self._check_range(t)
        return self._dpoly(t)[()] if np.ndim(t) == 0 else self._dpoly(t)

    def ddmu(self, t):
        t = self._check_range(t)
        return self._ddpoly(t)[()] if np.ndim(t) == 0 else self._ddpoly(t)

    def __call__(self, t):
        return self.mu(t), self.dmu(t)

    @cached_property
    def first_zero(self) -> float:
        """First root of ``mu`` after ``t0`` (``inf`` if none on the interval)."""
        return _first_mu_zero(self)


def _rhs(cs: CoefficientSet, t: float, mu: float, nu: float):
    tau, sigma = cs.tau_sigma_scalar(t)
    return nu, tau * nu + 4.0 * sigma * mu


def integrate_characteristic(
    cs: CoefficientSet,
    t0: float,
    t_end: float,
    mu0: float,
    dmu0: float,
    tol: float = 1e-10,
    max_step: float | None = None,
    first_step: float | None = None,
    max_steps: int = 1_000_000,
) -> CharacteristicSolution:
    """Integrate the characteristic ODE from arbitrary data ``(mu0, dmu0)``."""
    t0, t_end = float(t0), float(t_end)
    if not t_end > t0:
        raise ValueError("t_end must exceed t0")
    if not 0.0 < tol <= 1e-2:
        raise ValueError("tol must lie in (0, 1e-2]")
    span = t_end - t0
    max_step = span / 8.0 if max_step is None else float(max_step)
    a_sign = math.copysign(1.0, cs.a_at(t0))

    t, y0, y1 = t0, float(mu0), float(dmu0)
    k_first = _rhs(cs, t, y0, y1)
    ts, mus, nus, dds = [t], [y0], [y1], [k_first[1]]
    h = first_step if first_step is not None else min(max_step, 1e-3 * span, 0.1 * tol ** 0.2)
    err_prev = 1e-4
    rejected = False
    for _ in range(max_steps):
        if t >= t_end:
            break
        h = min(h, max_step, t_end - t)
        if h <= 16 * np.finfo(float).eps * max(1.0, abs(t)):
            raise StiffnessError("step size underflow in characteristic integrator", t)
        k = [k_first]
        for s in range(1, 7):
            row = _A[s]
            m = y0 + h * sum(row[j] * k[j][0] for j in range(s))
            n = y1 + h * sum(row[j] * k[j][1] for j in range(s))
            if s == 6:
                ynew0, ynew1 = m, n
            try:
                k.append(_rhs(cs, t + _C[s] * h, m, n))
            except CoefficientDomainError:
                # a singular coefficient inside the step: retreat and retry
                k = None
                break
        if k is None:
            h *= 0.25
            rejected = True
            continue
        e0 = h * sum(_E[j] * k[j][0] for j in range(7))
        e1 = h * sum(_E[j] * k[j][1] for j in range(7))
        sc0 = tol * (1.0 + max(abs(y0), abs(ynew0)))
        sc1 = tol * (1.0 + max(abs(y1), abs(ynew1)))
        err = max(abs(e0) / sc0, abs(e1) / sc1)
        if not math.isfinite(err):
            h *= 0.25
            rejected = True
            continue
        if err <= 1.0:
            t_new = t + h if t_end - (t + h) > 1e-14 * span else t_end
            a_new = cs.a_at(t_new)
            if a_new == 0.0 or math.copysign(1.0, a_new) != a_sign:
                raise CoefficientDomainError("diffusion coefficient a(t) vanishes", t_new)
            t, y0, y1 = t_new, ynew0, ynew1
            k_first = k[6]
            ts.append(t)
            mus.append(y0)
            nus.append(y1)
            dds.append(k_first[1])
            err = max(err, 1e-10)
            fac = 0.9 * err ** (-0.7 / 5) * err_prev ** (0.4 / 5)
            fac = min(1.0 if rejected else 5.0, max(0.2, fac))
            h *= fac
            err_prev = err
            rejected = False
        else:
            h *= max(0.2, 0.9 * err ** (-1 / 5))
            rejected = True
    else:
        raise StiffnessError("maximum number of steps exceeded", t)

    return CharacteristicSolution(
        t0, np.array(ts), np.array(mus), np.array(nus), np.array(dds), "numeric", tol
    )


def solve_characteristic(
    cs: CoefficientSet,
    t0: float = 0.0,
    t_end: float | None = None,
    tol: float = 1e-10,
    max_step: float | None = None,
) -> CharacteristicSolution:
    """Characteristic function ``mu(t, t0)`` with ``mu(t0) = 0``, ``mu'(t0) = 2 a(t0)``.

    Parameters
    ----------
    cs : CoefficientSet
    t0 : float
        Anchor time.
    t_end : float, optional
        End of the integration interval, ``t0 + 10`` by default.
    tol : float
        Local error tolerance per step, in ``(0, 1e-2]``.
    max_step : float, optional
        Upper bound on the step size.
    """
    t0 = float(t0)
    t_end = t0 + DEFAULT_SPAN if t_end is None else float(t_end)
    try:
        a0 = cs.a_at(t0)
    except CoefficientDomainError as exc:
        raise InvalidInitialDataError(f"a(t0) undefined at t0={t0}") from exc
    if a0 == 0.0:
        raise InvalidInitialDataError(f"a(t0) = 0 at t0={t0}: degenerate characteristic data")
    return integrate_characteristic(cs, t0, t_end, 0.0, 2.0 * a0, tol, max_step)


def characteristic_from_expr(
    mu: CoeffExpr, t0: float, t_end: float, n: int = 2001, source: str = "analytic-preset"
) -> CharacteristicSolution:
    """Sample a closed-form characteristic function onto a node grid."""
    ts = np.linspace(float(t0), float(t_end), n)
    d1 = differentiate(mu)
    d2 = differentiate(d1)
    return CharacteristicSolution(float(t0), ts, mu(ts), d1(ts), d2(ts), source)


# ---------------------------------------------------------------------------
# fundamental sets


def _values(m, t):
    """(m, m', m'') of a closed-form or sampled solution at ``t``."""
    if isinstance(m, CharacteristicSolution):
        return m.mu(t), m.dmu(t), m.ddmu(t)
    d1 = differentiate(m)
    return m(t), d1(t), differentiate(d1)(t)


@dataclass(frozen=True)
class FundamentalSet:
    """Two independent solutions of the characteristic equation.

    ``mu1`` and ``mu2`` are closed-form expressions or sampled solutions;
    ``a`` is the diffusion coefficient needed to normalise the recombination.
    """

    mu1: object
    mu2: object
    a: CoeffExpr

    def wronskian(self, t0: float) -> float:
        m1, d1, _ = _values(self.mu1, t0)
        m2, d2, _ = _values(self.mu2, t0)
        return float(m1 * d2 - d1 * m2)


def numerical_fundamental_set(
    cs: CoefficientSet, t_anchor: float, t_end: float, tol: float = 1e-10
) -> FundamentalSet:
    """Fundamental pair with data (1, 0) and (0, 1) at ``t_anchor``."""
    s1 = integrate_characteristic(cs, t_anchor, t_end, 1.0, 0.0, tol)
    s2 = integrate_characteristic(cs, t_anchor, t_end, 0.0, 1.0, tol)
    return FundamentalSet(s1, s2, cs.a)


def mu_from_fundamental(fs: FundamentalSet, t0: float, t) -> tuple:
    """``(mu(t, t0), mu'(t, t0))`` recombined from a fundamental set."""
    w = fs.wronskian(t0)
    if w == 0.0 or not math.isfinite(w):
        raise DegenerateSetError(f"Wronskian vanishes at t0={t0}")
    scale = 2.0 * fs.a(float(t0)) / w
    m1_0, _, _ = _values(fs.mu1, t0)
    m2_0, _, _ = _values(fs.mu2, t0)
    m1, d1, _ = _values(fs.mu1, t)
    m2, d2, _ = _values(fs.mu2, t)
    mu = scale * (m1_0 * m2 - m1 * m2_0)
    dmu = scale * (m1_0 * d2 - d1 * m2_0)
    return mu, dmu


def characteristic_from_fundamental(
    fs: FundamentalSet, t0: float, t_end: float, n: int = 2001
) -> CharacteristicSolution:
    """Characteristic solution anchored at ``t0`` built from a fundamental set."""
    ts = np.linspace(float(t0), float(t_end), n)
    w = fs.wronskian(t0)
    if w == 0.0:
        raise DegenerateSetError(f"Wronskian vanishes at t0={t0}")
    scale = 2.0 * fs.a(float(t0)) / w
    m1_0 = _values(fs.mu1, t0)[0]
    m2_0 = _values(fs.mu2, t0)[0]
    v1, v2 = _values(fs.mu1, ts), _values(fs.mu2, ts)
    mu, dmu, ddmu = (scale * (m1_0 * b - a * m2_0) for a, b in zip(v1, v2))
    # the anchor is exact by construction
    mu[0], dmu[0] = 0.0, 2.0 * fs.a(float(t0))
    return CharacteristicSolution(float(t0), ts, mu, dmu, ddmu, "fundamental")


# ---------------------------------------------------------------------------
# roots and horizons


def bisect_newton(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    df: Callable[[float], float] | None = None,
    tol: float = 1e-10,
) -> float:
    """Root of ``f`` in a sign-changing bracket: bisection, then Newton polish."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise ValueError("bracket does not change sign")
    target = tol if df is None else max(tol, 1e-6 * (hi - lo))
    while hi - lo > target:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    if df is None:
        return x
    for _ in range(30):
        d = df(x)
        if d == 0.0:
            break
        step = f(x) / d
        x_new = x - step
        if not lo <= x_new <= hi:
            break
        x = x_new
        if abs(step) < 1e-15 * max(1.0, abs(x)):
            break
    return x


def _first_mu_zero(sol: CharacteristicSolution) -> float:
    sign0 = np.sign(sol.dmu_nodes[0])
    after = sol.mu_nodes[1:] * sign0
    idx = np.flatnonzero(after <= 0.0)
    if idx.size == 0:
        return math.inf
    i = idx[0] + 1
    lo, hi = sol.ts[i - 1], sol.ts[i]
    if i == 1:
        # root inside the first step: interpolant vanishes at t0 itself
        lo = lo + 1e-3 * (hi - lo)
    return bisect_newton(lambda s: float(sol.mu(s)), lo, hi, lambda s: float(sol.dmu(s)))


class Horizon(NamedTuple):
    t_mu_zero: float
    t_gamma_zero: float
    gamma_checked: bool


def validity_horizon(sol: CharacteristicSolution, gamma_track=None, n_scan: int = 101) -> Horizon:
    """First zero of ``mu`` and first sign change of ``gamma`` after ``t0``.

    ``gamma_track`` may be a pair of sample arrays ``(ts, gammas)`` (the root
    is located by linear interpolation between bracketing samples) or a
    callable ``gamma(t)`` (sampled on ``n_scan`` points, then refined by
    bisection).  Missing roots are reported as ``inf``; ``gamma_checked`` is
    False when no gamma data was given.
    """
    t_mu = sol.first_zero
    if gamma_track is None:
        return Horizon(t_mu, math.inf, False)
    if callable(gamma_track):
        hi_end = min(sol.t_end, t_mu)
        grid = np.linspace(sol.t0, hi_end, n_scan + 1)[1:]
        if math.isfinite(t_mu):
            grid = grid[:-1]
        prev_t, prev_g = None, None
        for s in grid:
            try:
                gs = gamma_track(float(s))
            except NumericalError:
                break
            if prev_g is not None and np.sign(gs) != np.sign(prev_g):
                root = bisect_newton(gamma_track, prev_t, float(s), tol=1e-11)
                return Horizon(t_mu, root, True)
            prev_t, prev_g = float(s), gs
        return Horizon(t_mu, math.inf, True)
    ts, gs = (np.asarray(v, dtype=float) for v in gamma_track)
    change = np.flatnonzero(np.sign(gs[1:]) != np.sign(gs[:-1]))
    if change.size == 0:
        return Horizon(t_mu, math.inf, True)
    i = change[0]
    t_root = ts[i] - gs[i] * (ts[i + 1] - ts[i]) / (gs[i + 1] - gs[i])
    return Horizon(t_mu, float(t_root), True)
