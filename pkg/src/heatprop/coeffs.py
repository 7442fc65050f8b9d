"""Time-dependent coefficients of the diffusion-type equation.

The equation handled throughout the package is

    u_t = a(t) u_xx - b(t) x^2 u + c(t) x u_x + d(t) u + f(t) x u - g(t) u_x

Sign registry: ``b`` and ``g`` are stored *with the minus signs above
factored out*.  A potential term ``+x^2 u`` therefore means ``b = -1`` and a
drift term ``+w u_x`` means ``g = -w``.

Smoothness assumption: ``a`` and ``d`` are continuously differentiable on the
working interval and ``a`` does not vanish there.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import CoefficientDomainError, UsageError
from .expr import (
    MATH_NAMESPACE,
    NUMPY_NAMESPACE,
    CoeffExpr,
    as_expr,
    compile_source,
    differentiate,
    to_python,
)

NAMES = ("a", "b", "c", "d", "f", "g")


class CoefficientValues(NamedTuple):
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    f: np.ndarray
    g: np.ndarray


def _fused_tau_sigma(exprs: dict, namespace: dict):
    # one generated function evaluates all coefficients once and combines them
    lines = [f"    {name} = {to_python(exprs[name].node)}" for name in ("a", "b", "c", "d", "da", "dd")]
    body = "\n".join(lines)
    code = (
        "def _tau_sigma(_v_t):\n"
        f"{body}\n"
        "    tau = da / a + 2.0 * c - 4.0 * d\n"
        "    sigma = a * b + c * d - d * d + d * da / (2.0 * a) - 0.5 * dd\n"
        "    return tau, sigma\n"
    )
    scope = dict(namespace)
    exec(compile(code, "<heatprop:tau_sigma>", "exec"), scope)
    return scope["_tau_sigma"]


@dataclass(frozen=True)
class CoefficientSet:
    """The six coefficient functions ``a, b, c, d, f, g`` of time.

    ``da`` and ``dd`` (the derivatives of ``a`` and ``d``) are obtained
    symbolically at construction.
    """

    a: CoeffExpr
    b: CoeffExpr
    c: CoeffExpr
    d: CoeffExpr
    f: CoeffExpr
    g: CoeffExpr
    da: CoeffExpr = field(init=False, repr=False)
    dd: CoeffExpr = field(init=False, repr=False)

    def __post_init__(self):
        for name in NAMES:
            object.__setattr__(self, name, as_expr(getattr(self, name)))
            if getattr(self, name).variables != ("t",):
                raise UsageError(f"coefficient {name} must be a function of t only")
        object.__setattr__(self, "da", differentiate(self.a))
        object.__setattr__(self, "dd", differentiate(self.d))
        exprs = {n: getattr(self, n) for n in NAMES + ("da", "dd")}
        object.__setattr__(self, "_ts_scalar", _fused_tau_sigma(exprs, MATH_NAMESPACE))
        object.__setattr__(self, "_ts_vector", _fused_tau_sigma(exprs, NUMPY_NAMESPACE))
        body = "(" + ", ".join(to_python(exprs[n].node) for n in NAMES) + ")"
        object.__setattr__(self, "_all_vector", compile_source(body, ("t",), NUMPY_NAMESPACE))

    @classmethod
    def from_strings(cls, a="1", b="0", c="0", d="0", f="0", g="0") -> "CoefficientSet":
        return cls(*(as_expr(s) for s in (a, b, c, d, f, g)))

    def as_strings(self) -> dict:
        return {name: str(getattr(self, name)) for name in NAMES}

    def values(self, t) -> CoefficientValues:
        """All six coefficients at ``t`` (scalar or array), as arrays."""
        t = np.asarray(t, dtype=float)
        with np.errstate(all="ignore"):
            raw = self._all_vector(t)
        out = [np.broadcast_to(np.asarray(v, dtype=float), t.shape).copy() for v in raw]
        for name, v in zip(NAMES, out):
            if not np.all(np.isfinite(v)):
                bad = float(t.flat[np.flatnonzero(~np.isfinite(v))[0]])
                raise CoefficientDomainError(f"coefficient {name} is not finite", bad)
        return CoefficientValues(*out)

    def a_at(self, t: float) -> float:
        return self.a(float(t))

    def g_at(self, t: float) -> float:
        return self.g(float(t))

    def tau_sigma_scalar(self, t: float):
        """Fast scalar path used inside the characteristic integrator."""
        try:
            tau, sigma = self._ts_scalar(t)
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise CoefficientDomainError(f"coefficients not defined: {exc}", t) from exc
        return tau, sigma

    def tau_sigma_array(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(all="ignore"):
            tau, sigma = self._ts_vector(t)
        tau = np.broadcast_to(np.asarray(tau, dtype=float), t.shape)
        sigma = np.broadcast_to(np.asarray(sigma, dtype=float), t.shape)
        if not (np.all(np.isfinite(tau)) and np.all(np.isfinite(sigma))):
            bad = ~(np.isfinite(tau) & np.isfinite(sigma))
            raise CoefficientDomainError("coefficients not defined", float(t.flat[np.flatnonzero(bad)[0]]))
        return tau.copy(), sigma.copy()

    def check_diffusion(self, ts) -> None:
        """Raise unless ``a`` is nonzero and of one sign at every point of ``ts``."""
        a = self.values(ts).a
        if np.any(a == 0.0) or (np.any(a > 0) and np.any(a < 0)):
            idx = np.flatnonzero(np.sign(a) != np.sign(a.flat[0]))
            bad = float(np.asarray(ts, dtype=float).flat[idx[0] if idx.size else 0])
            raise CoefficientDomainError("diffusion coefficient a(t) vanishes", bad)


def tau_sigma(cs: CoefficientSet, t: float) -> tuple[float, float]:
    """Coefficients of the characteristic equation ``mu'' - tau mu' - 4 sigma mu = 0``.

    ``tau = a'/a + 2c - 4d`` and, in expanded form free of a removable
    singularity at ``d = 0``, ``sigma = ab + cd - d^2 + d a'/(2a) - d'/2``.
    """
    t = float(t)
    a = cs.a(t)
    if a == 0.0:
        raise CoefficientDomainError("a(t) = 0: characteristic equation undefined", t)
    tau, sigma = cs.tau_sigma_scalar(t)
    if not (math.isfinite(tau) and math.isfinite(sigma)):
        raise CoefficientDomainError("characteristic coefficients not finite", t)
    return tau, sigma


# ---------------------------------------------------------------------------
# problem-spec files


@dataclass(frozen=True)
class Problem:
    coeffs: CoefficientSet
    t0: float = 0.0
    preset: str | None = None


def problem_from_dict(spec: dict) -> Problem:
    """Build a problem from the JSON problem-spec layout.

    Either ``{"a": ..., "b": ..., ..., "t0": ...}`` with coefficient
    expressions (omitted ones default to ``0``, except ``a``) or
    ``{"preset": name, "params": {...}, "t0": ...}``.
    """
    if not isinstance(spec, dict):
        raise UsageError("problem spec must be a JSON object")
    t0 = float(spec.get("t0", 0.0))
    if "preset" in spec:
        if any(k in spec for k in NAMES):
            raise UsageError("problem spec gives both a preset and coefficients")
        from .presets import get_preset

        params = spec.get("params") or {}
        if not isinstance(params, dict):
            raise UsageError("preset params must be an object")
        return Problem(get_preset(spec["preset"], **params).coeffs, t0, spec["preset"])
    if "a" not in spec:
        raise UsageError("problem spec needs either 'preset' or at least coefficient 'a'")
    unknown = set(spec) - set(NAMES) - {"t0"}
    if unknown:
        raise UsageError(f"unknown problem-spec keys: {sorted(unknown)}")
    return Problem(CoefficientSet.from_strings(**{k: str(spec.get(k, "0")) for k in NAMES}), t0)


def load_problem(path) -> Problem:
    try:
        spec = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read problem file {path}: {exc}") from exc
    return problem_from_dict(spec)
