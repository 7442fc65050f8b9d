"""Heat kernel of the diffusion-type equation.

The kernel is a Gaussian in ``(x, y)``,

    K(x, y, t, t0) = (2 pi mu)^(-1/2) exp(alpha x^2 + beta x y + gamma y^2
                                          + delta x + epsilon y + kappa),

whose six coefficients follow from the characteristic function ``mu``.  With
``h(t) = int_t0^t (c - 2d)`` and ``G = mu delta e^(-h)``:

    alpha   = -mu' / (4 a mu) - d / (2a)
    beta    = e^h / mu
    gamma   = -a e^(2h) / (mu mu') - 4 int a sigma e^(2h) / mu'^2 + d0 / (2 a0)
    delta   = e^h / mu * int e^(-h) ((f + d g / a) mu + g mu' / (2a))
    epsilon = -2 a delta e^h / mu' - 8 int a sigma e^h (mu delta) / mu'^2
              + 2 int e^h (a f + d g) / mu'
    kappa   = -a mu delta^2 / mu' - 4 int a sigma (mu delta)^2 / mu'^2
              + 2 int (mu delta) (a f + d g) / mu'

All integrals run from ``t0`` and have integrands that stay bounded at
``t0`` because ``mu'(t0) = 2 a(t0) != 0``; the singular ``1/mu`` behaviour
is carried entirely by the boundary terms.

The constant ``d0 / (2 a0)`` (values at ``t0``) in ``gamma`` is fixed by the
initial condition.  The boundary term has a finite part at ``t0``; without
the constant, ``alpha + beta + gamma -> -d0 / (2 a0)`` and the kernel tends
to ``exp(-d0 y^2 / (2 a0)) delta(x - y)`` instead of ``delta(x - y)``.  The
constant vanishes whenever ``d(t0) = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .characteristic import CharacteristicSolution, bisect_newton, solve_characteristic
from .coeffs import CoefficientSet
from .errors import (
    CoefficientDomainError,
    HorizonError,
    KernelOverflowError,
    NumericalError,
    ResolvedFormError,
)
from .quadrature import panel

# below this distance from t0 the delta quotient is 0/0 and its limit is used
DELTA_GUARD = 1e-8
_PANEL_WIDTH = 0.125


@dataclass(frozen=True)
class KernelCoefficients:
    t: float
    t0: float
    alpha: float
    beta: float
    gamma: float
    delta: float
    epsilon: float
    kappa: float
    h: float
    mu: float
    dmu: float

    def as_dict(self) -> dict:
        return {
            "t": self.t,
            "t0": self.t0,
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
            "delta": self.delta,
            "epsilon": self.epsilon,
            "kappa": self.kappa,
        }

    def kernel(self) -> "HeatKernel":
        return HeatKernel(self)


@dataclass(frozen=True)
class HeatKernel:
    """Point evaluator of the kernel; all arithmetic goes through the log form."""

    kc: KernelCoefficients

    @cached_property
    def log_norm(self) -> float:
        return -0.5 * math.log(2.0 * math.pi * self.kc.mu)

    def log_eval(self, x, y):
        k = self.kc
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = (
            self.log_norm
            + x * (k.alpha * x + k.beta * y + k.delta)
            + y * (k.gamma * y + k.epsilon)
            + k.kappa
        )
        return out[()] if np.ndim(out) == 0 else out

    def eval(self, x, y):
        s = self.log_eval(x, y)
        with np.errstate(over="ignore"):
            out = np.exp(s)
        if not np.all(np.isfinite(out)):
            raise KernelOverflowError("kernel exponent overflows; use log_eval")
        return out

    __call__ = eval


def eval_kernel(hk: HeatKernel, x, y):
    """``K(x, y)``; raises :class:`KernelOverflowError` for huge exponents."""
    return hk.eval(x, y)


def log_kernel(hk: HeatKernel, x, y):
    """``log K(x, y)``, finite for any finite ``x, y``."""
    return hk.log_eval(x, y)


def kernel_coeffs_initial(cs: CoefficientSet, t0: float) -> tuple[float, float, float]:
    """Limits of ``(delta, epsilon, kappa)`` as ``t -> t0+``."""
    a0 = cs.a_at(t0)
    if a0 == 0.0:
        raise CoefficientDomainError("a(t0) = 0", t0)
    d0 = cs.g_at(t0) / (2.0 * a0)
    return d0, -d0, 0.0


# ---------------------------------------------------------------------------
# integration sweep

# state layout: h, G, I_gamma, I_eps1, I_eps2, I_kappa1, I_kappa2
_N_STATE = 7


def _integrands(cs, sol, x, state, S, sign0):
    v = cs.values(x)
    _, sigma = cs.tau_sigma_array(x)
    mu = sol.mu(x)
    dmu = sol.dmu(x)
    flipped = np.flatnonzero(dmu * sign0 <= 0.0)
    if flipped.size:
        raise ResolvedFormError("mu' vanishes inside the integration interval", float(x[flipped[0]]))
    h_rate = v.c - 2.0 * v.d
    hh = state[0] + S @ h_rate
    eh = np.exp(hh)
    afdg = v.a * v.f + v.d * v.g
    g_rate = (afdg * mu + 0.5 * v.g * dmu) / v.a / eh
    mu_delta = (state[1] + S @ g_rate) * eh
    asd = v.a * sigma / dmu**2
    return np.stack(
        [
            h_rate,
            g_rate,
            asd * eh**2,
            asd * eh * mu_delta,
            afdg * eh / dmu,
            asd * mu_delta**2,
            afdg * mu_delta / dmu,
        ]
    )


def _panel_step(cs, sol, lo, hi, state, sign0):
    x, wk, wg, S = panel(lo, hi)
    rates = _integrands(cs, sol, x, state, S, sign0)
    k = rates @ wk
    return state + k, np.abs(k - rates @ wg)


def _check_dmu(sol: CharacteristicSolution, t_hi: float) -> float:
    sign0 = np.sign(sol.dmu_nodes[0])
    inside = sol.ts <= t_hi
    bad = np.flatnonzero(sol.dmu_nodes[inside] * sign0 <= 0.0)
    if bad.size:
        i = bad[0]
        lo, hi = sol.ts[i - 1], sol.ts[i]
        t_zero = bisect_newton(lambda s: float(sol.dmu(s)), lo, hi) if sol.dmu_nodes[i] != 0 else hi
        raise ResolvedFormError("mu' vanishes inside the integration interval", t_zero)
    return sign0


def _finish(cs, sol, t, state, a0, g0, d0):
    t0 = sol.t0
    v = cs.values(t)
    a, d = float(v.a), float(v.d)
    mu, dmu = float(sol.mu(t)), float(sol.dmu(t))
    if not mu > 0.0:
        raise HorizonError("characteristic function is not positive", t)
    h, G, i_g, i_e1, i_e2, i_k1, i_k2 = (float(s) for s in state)
    eh = math.exp(h)
    alpha = -dmu / (4.0 * a * mu) - d / (2.0 * a)
    beta = eh / mu
    gamma = -a * eh * eh / (mu * dmu) - 4.0 * i_g + d0 / (2.0 * a0)
    if t - t0 < DELTA_GUARD:
        delta = g0 / (2.0 * a0)
    else:
        delta = G * eh / mu
    epsilon = -2.0 * a * delta * eh / dmu - 8.0 * i_e1 + 2.0 * i_e2
    kappa = -a * mu * delta * delta / dmu - 4.0 * i_k1 + 2.0 * i_k2
    return KernelCoefficients(
        float(t), t0, alpha, beta, gamma, delta, epsilon, kappa, float(h), mu, dmu
    )


def kernel_coeffs_trajectory(
    cs: CoefficientSet,
    sol: CharacteristicSolution,
    ts,
    qtol: float = 1e-11,
    max_depth: int = 30,
) -> list[KernelCoefficients]:
    """Kernel coefficients at every time in ``ts`` from a single sweep.

    One adaptive Gauss-Kronrod partition of ``[t0, max(ts)]``, with the
    targets as breakpoints, is shared by all integrands.  Within a panel the
    running values of ``h`` and ``G`` at the Kronrod nodes are taken from the
    cumulative rule, so the chained integrands for ``epsilon`` and ``kappa``
    reuse them instead of re-integrating.
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    t0 = sol.t0
    if ts.size == 0:
        return []
    if np.any(ts <= t0):
        raise ValueError("kernel coefficients need t > t0")
    t_hi = float(ts.max())
    if t_hi > sol.t_end * (1 + 1e-15) + 1e-15:
        raise NumericalError(f"t={t_hi} beyond the characteristic solution (t_end={sol.t_end})")
    horizon = sol.first_zero
    if t_hi >= horizon:
        raise HorizonError(f"past the first zero of mu at {horizon:.12g}", float(ts[ts >= horizon].min()))
    sign0 = _check_dmu(sol, t_hi)
    a0, g0 = cs.a_at(t0), cs.g_at(t0)
    d0 = float(cs.d(float(t0)))

    total = t_hi - t0
    state = np.zeros(_N_STATE)
    found = {}
    left = t0
    for target in np.unique(ts):
        n0 = max(1, int(math.ceil((target - left) / _PANEL_WIDTH)))
        edges = np.linspace(left, target, n0 + 1)
        stack = [(edges[i], edges[i + 1], 0) for i in range(n0 - 1, -1, -1)]
        while stack:
            lo, hi, depth = stack.pop()
            new_state, err = _panel_step(cs, sol, lo, hi, state, sign0)
            budget = qtol * (hi - lo) / total * np.maximum(1.0, np.abs(new_state))
            if np.any(err > budget) and depth < max_depth:
                mid = 0.5 * (lo + hi)
                stack.append((mid, hi, depth + 1))
                stack.append((lo, mid, depth + 1))
                continue
            state = new_state
        found[float(target)] = _finish(cs, sol, float(target), state, a0, g0, d0)
        left = float(target)
    return [found[float(t)] for t in ts]


def compute_kernel_coeffs(
    cs: CoefficientSet, sol: CharacteristicSolution, t: float, qtol: float = 1e-11
) -> KernelCoefficients:
    """Kernel coefficients ``(alpha, ..., kappa)`` at a single time ``t > t0``."""
    return kernel_coeffs_trajectory(cs, sol, [float(t)], qtol)[0]


def heat_kernel(
    cs: CoefficientSet,
    t: float,
    t0: float = 0.0,
    tol: float = 1e-10,
    qtol: float = 1e-11,
) -> HeatKernel:
    """Solve the characteristic equation on ``[t0, t]`` and build the kernel."""
    sol = solve_characteristic(cs, t0, t, tol)
    return HeatKernel(compute_kernel_coeffs(cs, sol, t, qtol))


def asymptotic_kernel(cs: CoefficientSet, x, y, t: float, t0: float = 0.0):
    """Small-time form of the kernel as ``t -> t0+``."""
    a0 = cs.a_at(t0)
    if not a0 > 0.0:
        raise CoefficientDomainError("asymptotic kernel needs a(t0) > 0", t0)
    if not t > t0:
        raise ValueError("asymptotic kernel needs t > t0")
    g0 = cs.g_at(t0)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = 4.0 * a0 * (t - t0)
    out = np.exp(-((x - y) ** 2) / s + g0 * (x - y) / (2.0 * a0)) / np.sqrt(math.pi * s)
    return out[()] if np.ndim(out) == 0 else out


def gamma_function(
    cs: CoefficientSet, t0: float, t_end: float, tol: float = 1e-10, qtol: float = 1e-11
):
    """``t -> gamma(t, t0)`` backed by one characteristic solve on ``[t0, t_end]``."""
    sol = solve_characteristic(cs, t0, t_end, tol)

    def gamma(t):
        return compute_kernel_coeffs(cs, sol, t, qtol).gamma

    gamma.solution = sol
    return gamma


class KernelField:
    """``(x, t) -> K(x, y, t, t0)`` for a fixed source point ``y``.

    Coefficients for all distinct times in a call come from one sweep.
    """

    def __init__(self, cs, y=0.0, t0=0.0, t_max=1.0, tol=1e-10, qtol=1e-11):
        self.cs = cs
        self.y = float(y)
        self.sol = solve_characteristic(cs, t0, t_max, tol)
        self.qtol = qtol

    def __call__(self, x, t):
        x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
        uniq, inv = np.unique(t, return_inverse=True)
        kcs = kernel_coeffs_trajectory(self.cs, self.sol, uniq, self.qtol)
        out = np.empty(x.shape)
        inv = inv.reshape(x.shape)
        for i, kc in enumerate(kcs):
            mask = inv == i
            out[mask] = HeatKernel(kc).eval(x[mask], self.y)
        return out
