"""Independent checks: PDE residuals, a Crank-Nicolson reference solver and
the transcendental validity horizons of the cosh/cos models."""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy.linalg import solve_banded

from .characteristic import bisect_newton
from .coeffs import CoefficientSet
from .errors import NumericalError, UsageError
from .propagator import GridField


class TruncationWarning(UserWarning):
    """The truncated domain is too narrow for the Dirichlet reference solver."""


@dataclass(frozen=True)
class ResidualReport:
    max_residual: float
    scale: float
    probe_count: int
    grid_steps: tuple

    @property
    def normalized(self) -> float:
        return self.max_residual / self.scale if self.scale > 0 else self.max_residual

    def as_dict(self) -> dict:
        out = asdict(self)
        out["grid_steps"] = list(self.grid_steps)
        out["normalized"] = self.normalized
        return out


def pde_residual(field_sampler, cs: CoefficientSet, probes, h: float, ht: float | None = None) -> ResidualReport:
    """Finite-difference residual of the equation for a sampled solution.

    ``field_sampler(x, t)`` must accept equal-shape arrays.  Space
    derivatives use fourth-order central stencils of step ``h``, the time
    derivative a second-order central stencil of step ``ht`` (default
    ``h``).  The residual is reported raw together with the scale
    ``max |u_t|`` over the probes.
    """
    probes = np.asarray(probes, dtype=float).reshape(-1, 2)
    if h <= 0:
        raise ValueError("step must be positive")
    ht = h if ht is None else float(ht)
    x, t = probes[:, 0], probes[:, 1]
    shifts = np.array([-2, -1, 0, 1, 2], dtype=float)
    xx = x[:, None] + h * shifts[None, :]
    tt = np.broadcast_to(t[:, None], xx.shape)
    try:
        u_space = np.asarray(field_sampler(xx, tt), dtype=float)
        u_minus = np.asarray(field_sampler(x, t - ht), dtype=float)
        u_plus = np.asarray(field_sampler(x, t + ht), dtype=float)
    except NumericalError as exc:
        raise NumericalError(f"field sampler failed on the probe set: {exc}") from exc
    um2, um1, u, up1, up2 = u_space.T
    u_x = (um2 - 8 * um1 + 8 * up1 - up2) / (12 * h)
    u_xx = (-um2 + 16 * um1 - 30 * u + 16 * up1 - up2) / (12 * h * h)
    u_t = (u_plus - u_minus) / (2 * ht)
    v = cs.values(t)
    rhs = v.a * u_xx - v.b * x**2 * u + v.c * x * u_x + v.d * u + v.f * x * u - v.g * u_x
    res = np.abs(u_t - rhs)
    return ResidualReport(float(res.max()), float(np.abs(u_t).max()), len(probes), (h, ht))


def crank_nicolson(
    cs: CoefficientSet, u0: GridField, t_end: float, nt: int, boundary_tol: float = 1e-12
) -> GridField:
    """Crank-Nicolson solution on the truncated domain of ``u0``.

    Homogeneous Dirichlet conditions at both ends; coefficients frozen at
    each step's midpoint.  A :class:`TruncationWarning` is issued if the two
    nodes next to either boundary ever exceed ``boundary_tol`` times the
    solution's maximum.
    """
    if not isinstance(u0, GridField):
        raise UsageError("crank_nicolson needs GridField initial data")
    if nt < 1:
        raise UsageError("nt must be at least 1")
    xs = u0.xs
    dx = u0.dx
    dt = (float(t_end) - u0.t) / nt
    if dt <= 0:
        raise UsageError("t_end must exceed the initial time")
    xi = xs[1:-1]
    u = u0.values.copy()
    u[0] = u[-1] = 0.0
    worst = 0.0
    for step in range(nt):
        tm = u0.t + (step + 0.5) * dt
        v = cs.values(tm)
        a, b, c, d, f, g = (float(q) for q in v)
        drift = (c * xi - g) / (2 * dx)
        lower = a / dx**2 - drift
        upper = a / dx**2 + drift
        diag = -2 * a / dx**2 + (-b * xi**2 + d + f * xi)
        inner = u[1:-1]
        lu = diag * inner
        lu[1:] += lower[1:] * inner[:-1]
        lu[:-1] += upper[:-1] * inner[1:]
        rhs = inner + 0.5 * dt * lu
        ab = np.zeros((3, xi.size))
        ab[0, 1:] = -0.5 * dt * upper[:-1]
        ab[1] = 1.0 - 0.5 * dt * diag
        ab[2, :-1] = -0.5 * dt * lower[1:]
        u[1:-1] = solve_banded((1, 1), ab, rhs)
        peak = np.abs(u).max()
        if peak > 0:
            edge = max(np.abs(u[1:3]).max(), np.abs(u[-3:-1]).max())
            worst = max(worst, edge / peak)
    if not np.all(np.isfinite(u)):
        raise NumericalError("Crank-Nicolson solution is not finite")
    if worst > boundary_tol:
        warnings.warn(
            f"solution reaches {worst:.2e} of its peak next to the boundary; widen the domain",
            TruncationWarning,
            stacklevel=2,
        )
    return GridField(float(t_end), xs, u)


def _bracket_roots(f, lo, hi, n=4000):
    grid = np.linspace(lo, hi, n)
    vals = f(grid)
    idx = np.flatnonzero(np.sign(vals[1:]) != np.sign(vals[:-1]))
    return [(grid[i], grid[i + 1]) for i in idx]


def find_transcendental_roots() -> tuple[float, float]:
    """First positive roots of ``tanh t = cot t`` and ``tanh t = -cot t``.

    Both equations are multiplied through by ``cosh t sin t`` (positive on
    ``(0, pi)``), giving the smooth forms ``sinh sin -+ cosh cos = 0``.
    """
    def p1(t):
        return np.sinh(t) * np.sin(t) - np.cosh(t) * np.cos(t)

    def dp1(t):
        return 2 * np.cosh(t) * np.sin(t)

    def p2(t):
        return np.sinh(t) * np.sin(t) + np.cosh(t) * np.cos(t)

    def dp2(t):
        return 2 * np.sinh(t) * np.cos(t)

    eps = 1e-9
    roots = []
    for f, df in ((p1, dp1), (p2, dp2)):
        lo, hi = _bracket_roots(f, eps, math.pi - eps)[0]
        roots.append(bisect_newton(lambda s: float(f(s)), lo, hi, lambda s: float(df(s)), tol=1e-12))
    return roots[0], roots[1]


def convergence_order(errors, refinements) -> np.ndarray:
    """Observed orders ``log(e_i / e_{i+1}) / log(r_{i+1} / r_i)``."""
    e = np.asarray(errors, dtype=float)
    r = np.asarray(refinements, dtype=float)
    return np.log(e[:-1] / e[1:]) / np.log(r[1:] / r[:-1])


# ---------------------------------------------------------------------------
# per-preset check battery (used by the ``verify`` command)

#: evaluation time used for each preset's closed-form comparison
REFERENCE_TIMES = {
    "classical": 0.25,
    "linear_potential": 0.5,
    "hyperbolic": 0.5,
    "hyperbolic_half": 1.0,
    "oscillator": 0.7,
    "cosh_model": 0.5,
    "cos_model": 1.5,
}

RESIDUAL_STEP = 1e-3
RESIDUAL_TIME_STEP = 1e-4


def residual_probes(window, n_x: int = 9, n_t: int = 10, margin: float = 0.01) -> np.ndarray:
    """Probe set on ``[-1, 1] x [max(lo, 0.1), min(hi, 1 + margin) - margin]``."""
    lo, hi = window
    t_lo = max(lo, 0.1)
    t_hi = min(hi, 1.0 + margin) - margin
    X, T = np.meshgrid(np.linspace(-1.0, 1.0, n_x), np.linspace(t_lo, t_hi, n_t))
    return np.column_stack([X.ravel(), T.ravel()])


def kernel_grid_error(preset, t: float, tol: float = 1e-10, qtol: float = 1e-11) -> float:
    """Max relative error of the numerical kernel vs the closed form on [-2, 2]^2."""
    from .kernel import heat_kernel

    g = np.linspace(-2.0, 2.0, 21)
    X, Y = np.meshgrid(g, g, indexing="ij")
    hk = heat_kernel(preset.coeffs, t, 0.0, tol, qtol)
    exact = preset.analytic_kernel(X, Y, t)
    return float(np.max(np.abs(hk.eval(X, Y) / exact - 1.0)))


def run_preset_checks(name: str, params: dict | None = None, tol: float = 1e-10, qtol: float = 1e-11) -> list[dict]:
    """Run the verification battery for one preset.

    Returns one dict per check with keys ``check``, ``passed``,
    ``tolerance`` and either ``report`` (a residual report) or ``value``.
    """
    from .kernel import KernelField, gamma_function, heat_kernel, kernel_coeffs_initial
    from .characteristic import validity_horizon
    from .presets import get_preset

    preset = get_preset(name, **(params or {}))
    results = []
    h, ht = RESIDUAL_STEP, RESIDUAL_TIME_STEP
    bound = 10.0 * h * h
    probes = residual_probes(preset.window)
    y_src = 0.3
    analytic_norm = None
    if preset.analytic_kernel is not None:
        rep = pde_residual(lambda x, t: preset.analytic_kernel(x, y_src, t), preset.coeffs, probes, h, ht)
        analytic_norm = rep.normalized
        results.append({"check": "analytic_kernel_residual", "passed": rep.normalized <= bound,
                        "tolerance": bound, "report": rep.as_dict()})
    field = KernelField(preset.coeffs, y=y_src, t_max=float(probes[:, 1].max()) + 2 * ht, tol=tol, qtol=qtol)
    rep = pde_residual(field, preset.coeffs, probes, h, ht)
    limit = bound if analytic_norm is None else min(bound, 10.0 * max(analytic_norm, 1e-12))
    results.append({"check": "pipeline_kernel_residual", "passed": rep.normalized <= limit,
                    "tolerance": limit, "report": rep.as_dict()})
    if preset.analytic_kernel is not None:
        t_ref = REFERENCE_TIMES.get(name, 0.5 * sum(preset.window))
        err = kernel_grid_error(preset, t_ref, tol, qtol)
        results.append({"check": "closed_form_kernel", "passed": err <= 1e-6, "tolerance": 1e-6,
                        "value": err, "t": t_ref})
    # initial-data limits
    t0 = 0.0
    kc = heat_kernel(preset.coeffs, t0 + 1e-6, t0, tol, qtol).kc
    expected = kernel_coeffs_initial(preset.coeffs, t0)
    got = (kc.delta, kc.epsilon, kc.kappa)
    err = max(abs(u - v) for u, v in zip(got, expected))
    results.append({"check": "initial_limits", "passed": err <= 1e-4, "tolerance": 1e-4, "value": err})
    if name == "cosh_model":
        t1, t2 = find_transcendental_roots()
        results.append({"check": "root_T1", "passed": abs(t1 - 0.9375520344) <= 1e-8, "tolerance": 1e-8, "value": t1})
        results.append({"check": "root_T2", "passed": abs(t2 - 2.347045566) <= 1e-8, "tolerance": 1e-8, "value": t2})
        gamma = gamma_function(preset.coeffs, 0.0, 1.3, tol, qtol)
        hz = validity_horizon(gamma.solution, gamma)
        results.append({"check": "gamma_sign_change", "passed": abs(hz.t_gamma_zero - t1) <= 1e-6,
                        "tolerance": 1e-6, "value": hz.t_gamma_zero})
    return results
