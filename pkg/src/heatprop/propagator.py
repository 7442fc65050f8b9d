"""Propagation of initial data through the heat kernel.

``u(x, t) = int K(x, y, t, t0) u0(y) dy``.  For ``gamma < 0`` the kernel is
a Gaussian in ``y``; completing the square puts the integral in
Gauss-Hermite form centred on the Gaussian's mode, which is exact for
polynomial data and spectrally accurate for smooth data.  Sampled data
(``GridField``) is integrated cell by cell instead.  Non-homogeneous
problems are handled with the Duhamel formula.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

import numpy as np

from .coeffs import CoefficientSet
from .errors import DivergentIntegralError, KernelOverflowError, NumericalError, UsageError
from .kernel import HeatKernel, KernelCoefficients, heat_kernel
from .quadrature import KRONROD_WEIGHTS, NODES, adaptive_gk15, gauss_legendre_panels


@dataclass(frozen=True, eq=False)
class GridField:
    """Samples of ``u(x, t)`` on a uniform grid; zero outside the grid."""

    t: float
    xs: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "values", values)
        if xs.ndim != 1 or xs.size < 3:
            raise UsageError("grid needs at least 3 points")
        if values.shape != xs.shape:
            raise UsageError("values must match the grid")
        steps = np.diff(xs)
        if np.any(steps <= 0) or np.ptp(steps) > 1e-9 * max(1.0, abs(steps.mean()) * xs.size):
            raise UsageError("grid must be uniform and strictly increasing")
        if not np.all(np.isfinite(values)):
            raise UsageError("grid values must be finite")

    @classmethod
    def uniform(cls, x_min, x_max, n, values=None, t=0.0):
        xs = np.linspace(float(x_min), float(x_max), int(n))
        if values is None:
            values = np.zeros_like(xs)
        elif callable(values):
            values = values(xs)
        return cls(float(t), xs, values)

    @property
    def x_min(self) -> float:
        return float(self.xs[0])

    @property
    def x_max(self) -> float:
        return float(self.xs[-1])

    @property
    def n(self) -> int:
        return self.xs.size

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        return np.interp(y, self.xs, self.values, left=0.0, right=0.0)


def read_field_csv(path, t: float = 0.0) -> GridField:
    """Read a two-column ``x,u`` CSV file (header optional) into a field."""
    xs, us = [], []
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().startswith("#"):
                    continue
                try:
                    xs.append(float(row[0]))
                    us.append(float(row[1]))
                except (ValueError, IndexError):
                    if xs:
                        raise UsageError(f"bad row in {path}: {row}") from None
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    return GridField(t, np.array(xs), np.array(us))


@dataclass(frozen=True)
class Constant:
    value: float


@dataclass(frozen=True)
class Delta:
    x0: float


@dataclass(frozen=True)
class Function:
    """Callable initial data; ``support=(lo, hi)`` declares compact support."""

    func: Callable
    support: tuple | None = None

    def __call__(self, y):
        return self.func(y)


InitialData = Union[Constant, Delta, Function, GridField]


def as_initial_data(u0) -> InitialData:
    if isinstance(u0, (Constant, Delta, Function, GridField)):
        return u0
    if isinstance(u0, (int, float)) and not isinstance(u0, bool):
        return Constant(float(u0))
    if callable(u0):
        return Function(u0)
    raise TypeError(f"cannot interpret {u0!r} as initial data")


@lru_cache(maxsize=16)
def _hermite(order: int):
    return np.polynomial.hermite.hermgauss(order)


def _finite_exp(logs):
    with np.errstate(over="ignore"):
        out = np.exp(logs)
    if not np.all(np.isfinite(out)):
        raise KernelOverflowError("propagated solution overflows")
    return out


def _gauss_hermite(kc: KernelCoefficients, data, x, order, tail_tol):
    z, w = _hermite(order)
    A = -kc.gamma
    B = 0.5 * (kc.beta * x + kc.epsilon)
    centre = B / A
    ys = centre[..., None] + z / math.sqrt(A)
    if isinstance(data, Constant):
        vals = np.full(ys.shape, data.value)
    else:
        with np.errstate(all="ignore"):
            vals = np.broadcast_to(np.asarray(data(ys), dtype=float), ys.shape)
    if not np.all(np.isfinite(vals)):
        raise DivergentIntegralError("initial data not finite on the quadrature support")
    contrib = w * vals
    log_pref = (
        -0.5 * math.log(2.0 * math.pi * kc.mu)
        + x * (kc.alpha * x + kc.delta)
        + kc.kappa
        + B * B / A
        - 0.5 * math.log(A)
    )
    # tails are judged against the largest contribution over the whole batch
    with np.errstate(divide="ignore"):
        log_peak = np.log(np.max(np.abs(contrib), axis=-1)) + log_pref
        log_tail = np.log(np.maximum(np.abs(contrib[..., 0]), np.abs(contrib[..., -1]))) + log_pref
    ref = np.max(log_peak) if log_peak.size else -np.inf
    if np.isfinite(ref) and np.any(log_tail > ref + math.log(tail_tol)):
        raise DivergentIntegralError("integrand does not decay: initial data grows too fast")
    return _finite_exp(log_pref) * contrib.sum(axis=-1)


def _cellwise(hk: HeatKernel, field: GridField, x):
    kc = hk.kc
    # sub-panels must resolve the kernel width in y
    width = 1.0 / math.sqrt(2.0 * abs(kc.gamma)) if kc.gamma != 0 else np.inf
    sub = int(min(64, max(1, math.ceil(2.0 * field.dx / width))))
    edges = np.linspace(field.x_min, field.x_max, (field.n - 1) * sub + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    ys = (mid[:, None] + half[:, None] * NODES[None, :]).ravel()
    ws = (half[:, None] * KRONROD_WEIGHTS[None, :]).ravel()
    data = field(ys) * ws
    flat = x.reshape(-1)
    out = np.empty(flat.shape)
    for i in range(0, flat.size, 256):
        chunk = flat[i : i + 256]
        out[i : i + 256] = _finite_exp(hk.log_eval(chunk[:, None], ys[None, :])) @ data
    return out.reshape(x.shape)


def _compact(hk: HeatKernel, data: Function, x):
    lo, hi = data.support
    flat = x.reshape(-1)
    out = np.empty(flat.shape)
    for i, xi in enumerate(flat):
        def integrand(y, xi=xi):
            return _finite_exp(hk.log_eval(xi, y)) * np.asarray(data(y), dtype=float)

        out[i] = adaptive_gk15(integrand, lo, hi, atol=1e-13, rtol=1e-11)[0]
    return out.reshape(x.shape)


def apply_propagator(hk: HeatKernel, u0, x, order: int = 64, tail_tol: float = 1e-10):
    """Propagate initial data: ``int K(x, y) u0(y) dy`` at the points ``x``.

    Parameters
    ----------
    hk : HeatKernel
        Kernel for the time pair ``(t, t0)``.
    u0 : InitialData, float or callable
        Initial data at ``t0``.  Callables must accept numpy arrays.
    x : array_like
        Evaluation points.
    order : int
        Gauss-Hermite order.
    tail_tol : float
        Largest admissible ratio of the outermost quadrature contribution to
        the peak one; larger ratios mean the integral does not converge.

    Raises
    ------
    DivergentIntegralError
        When ``gamma >= 0`` and the data has no compact support, or when the
        data grows too fast for the Gaussian to dominate.
    """
    data = as_initial_data(u0)
    x_arr = np.asarray(x, dtype=float)
    if isinstance(data, Delta):
        return hk.eval(x_arr, data.x0)
    if isinstance(data, GridField):
        out = _cellwise(hk, data, x_arr)
    elif hk.kc.gamma < 0.0:
        out = _gauss_hermite(hk.kc, data, x_arr, order, tail_tol)
    elif isinstance(data, Function) and data.support is not None:
        out = _compact(hk, data, x_arr)
    else:
        raise DivergentIntegralError(
            f"gamma = {hk.kc.gamma:.6g} >= 0 at t={hk.kc.t:.12g}: the propagator integral diverges"
        )
    return out[()] if out.ndim == 0 else out


def solve_constant_data(kc: KernelCoefficients, u0: float) -> Callable:
    """Closed-form evolution of constant initial data; needs ``gamma < 0``."""
    al, be, ga, de, ep, ka, mu = kc.alpha, kc.beta, kc.gamma, kc.delta, kc.epsilon, kc.kappa, kc.mu
    if not ga < 0.0:
        raise DivergentIntegralError(f"gamma = {ga:.6g} >= 0: constant data does not propagate")
    pref = u0 / math.sqrt(-2.0 * mu * ga)

    def u(x):
        x = np.asarray(x, dtype=float)
        expo = ((4 * al * ga - be**2) * x**2 + 2 * (2 * ga * de - be * ep) * x + 4 * ga * ka - ep**2) / (4 * ga)
        out = pref * _finite_exp(expo)
        return out[()] if out.ndim == 0 else out

    return u


def duhamel_solve(
    cs: CoefficientSet,
    u0,
    source,
    xs,
    t: float,
    n_slices: int = 8,
    t0: float = 0.0,
    order: int = 4,
    tol: float = 1e-10,
    qtol: float = 1e-11,
    gh_order: int = 64,
) -> GridField:
    """Solve ``u_t - Q u = F(t, x)`` with ``u(t0) = u0`` on the grid ``xs``.

    ``u = H(t, t0) u0 + int_t0^t H(t, s) F(s, .) ds`` with the time integral
    done by ``order``-point Gauss-Legendre on ``n_slices`` equal panels.  Every
    slice re-anchors the characteristic function at its node ``s``.
    ``u0=None`` means zero data; ``source(s, x)`` must accept arrays in ``x``.
    """
    if n_slices < 2:
        raise ValueError("n_slices must be at least 2")
    xs = np.asarray(xs, dtype=float)
    total = np.zeros_like(xs)
    if u0 is not None:
        total += apply_propagator(heat_kernel(cs, t, t0, tol, qtol), u0, xs, gh_order)
    nodes, weights = gauss_legendre_panels(float(t0), float(t), n_slices, order)
    for s, w in zip(nodes, weights):
        def slice_data(y, s=s):
            vals = np.broadcast_to(np.asarray(source(s, y), dtype=float), np.shape(y))
            if not np.all(np.isfinite(vals)):
                raise NumericalError(f"source not finite at s={s!r}")
            return vals

        hk_s = heat_kernel(cs, t, s, tol, qtol)
        total += w * apply_propagator(hk_s, Function(slice_data), xs, gh_order)
    return GridField(float(t), xs, total)
