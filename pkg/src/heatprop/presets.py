"""Catalogue of exactly solvable coefficient sets.

Each preset carries its coefficients, the closed-form characteristic
function and propagator kernel for ``t0 = 0`` where known, and a fundamental
solution pair of its characteristic equation.  The closed forms are used as
oracles for the numerical pipeline, never by it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .coeffs import CoefficientSet
from .errors import UsageError
from .expr import CoeffExpr, parse_coeff_expr

PRESET_NAMES = (
    "classical",
    "linear_potential",
    "hyperbolic",
    "hyperbolic_half",
    "oscillator",
    "cosh_model",
    "cos_model",
)


@dataclass(frozen=True)
class Preset:
    name: str
    coeffs: CoefficientSet
    parameters: dict = field(default_factory=dict)
    analytic_kernel: Callable | None = None
    analytic_mu: CoeffExpr | None = None
    fundamental: tuple | None = None
    window: tuple = (0.05, 1.0)
    validity_note: str = ""


def _e(src: str) -> CoeffExpr:
    return parse_coeff_expr(src)


def _num(v: float) -> str:
    return f"({float(v)!r})"


def _classical(a=1.0):
    a = float(a)
    if a <= 0:
        raise UsageError("classical preset needs a > 0")

    def kernel(x, y, t):
        x, y, t = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, t)))
        return np.exp(-((x - y) ** 2) / (4 * a * t)) / np.sqrt(4 * np.pi * a * t)

    return Preset(
        "classical",
        CoefficientSet.from_strings(a=_num(a)),
        {"a": a},
        kernel,
        _e(f"2*{_num(a)}*t"),
        (_e("1"), _e("t")),
        (0.05, 2.0),
        "u_t = a u_xx; valid for all t > 0",
    )


def _linear_potential(a=1.0, f=1.0):
    a, f = float(a), float(f)
    if a <= 0:
        raise UsageError("linear_potential preset needs a > 0")

    def kernel(x, y, t):
        x, y, t = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, t)))
        return np.exp(
            -((x - y) ** 2) / (4 * a * t) + 0.5 * f * (x + y) * t + a * f**2 * t**3 / 12
        ) / np.sqrt(4 * np.pi * a * t)

    return Preset(
        "linear_potential",
        CoefficientSet.from_strings(a=_num(a), f=_num(f)),
        {"a": a, "f": f},
        kernel,
        _e(f"2*{_num(a)}*t"),
        (_e("1"), _e("t")),
        (0.05, 2.0),
        "u_t = a u_xx + f x u; valid for all t > 0",
    )


def _hyperbolic(a=1.0, omega=0.5):
    a, w = float(a), float(omega)
    if a <= 0:
        raise UsageError("hyperbolic preset needs a > 0")
    k = _num(2 * a - 1)

    def kernel(x, y, t):
        x, y, t = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, t)))
        s, c = np.sinh(2 * a * t), np.cosh(2 * a * t)
        h = np.sinh(t / 2)
        expo = (
            -((x**2 + y**2) * c - 2 * x * y) / (2 * s)
            + 2 * w * (x * h + y * np.sinh((2 * a - 0.5) * t)) / s * h
            - 2 * w**2 * c / s * h**4
            + 0.5 * w**2 * (t - 2 * np.sinh(t) + 0.5 * np.sinh(2 * t))
        )
        return np.exp(expo) / np.sqrt(2 * np.pi * s)

    return Preset(
        "hyperbolic",
        CoefficientSet.from_strings(
            a=_num(a),
            b=_num(a),
            f=f"{_num(w)}*cosh({k}*t)",
            g=f"-{_num(w)}*sinh({k}*t)",
        ),
        {"a": a, "omega": w},
        kernel,
        _e(f"sinh(2*{_num(a)}*t)"),
        (_e(f"cosh(2*{_num(a)}*t)"), _e(f"sinh(2*{_num(a)}*t)")),
        (0.05, 2.0),
        "u_t = a(u_xx - x^2 u) + w(cosh((2a-1)t) x u + sinh((2a-1)t) u_x); all t > 0",
    )


def _hyperbolic_half(omega=0.5):
    w = float(omega)

    def kernel(x, y, t):
        x, y, t = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, t)))
        X, Y = x - w, y - w
        expo = w**2 * t / 2 - ((X**2 + Y**2) * np.cosh(t) - 2 * X * Y) / (2 * np.sinh(t))
        return np.exp(expo) / np.sqrt(2 * np.pi * np.sinh(t))

    return Preset(
        "hyperbolic_half",
        CoefficientSet.from_strings(a="0.5", b="0.5", f=_num(w)),
        {"omega": w},
        kernel,
        _e("sinh(t)"),
        (_e("cosh(t)"), _e("sinh(t)")),
        (0.05, 2.0),
        "u_t = (u_xx - x^2 u)/2 + w x u; all t > 0",
    )


def _oscillator(omega=0.5):
    w = float(omega)

    def kernel(x, y, t):
        x, y, t = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, t)))
        X, Y = x + w, y + w
        expo = -(w**2) * t / 2 - ((X**2 + Y**2) * np.cos(t) - 2 * X * Y) / (2 * np.sin(t))
        return np.exp(expo) / np.sqrt(2 * np.pi * np.sin(t))

    return Preset(
        "oscillator",
        CoefficientSet.from_strings(a="0.5", b="-0.5", f=_num(w)),
        {"omega": w},
        kernel,
        _e("sin(t)"),
        (_e("cos(t)"), _e("sin(t)")),
        (0.05, 1.5),
        "u_t = (u_xx + x^2 u)/2 + w x u; 0 < t < pi/2",
    )


def _mu_sp(t):
    return np.cos(t) * np.sinh(t) + np.sin(t) * np.cosh(t)


def _cosh_model():
    def kernel(x, y, t):
        x, y, t = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, t)))
        m = _mu_sp(t)
        num = (y**2 - x**2) * np.sin(t) * np.sinh(t) + 2 * x * y - (x**2 + y**2) * np.cos(t) * np.cosh(t)
        return np.exp(num / (2 * m)) / np.sqrt(2 * np.pi * m)

    return Preset(
        "cosh_model",
        CoefficientSet.from_strings(
            a="cosh(t)^2", b="-sinh(t)^2", c="sinh(2*t)", d="0.5*sinh(2*t)"
        ),
        {},
        kernel,
        _e("cos(t)*sinh(t) + sin(t)*cosh(t)"),
        (_e("cos(t)*sinh(t) + sin(t)*cosh(t)"), _e("sin(t)*sinh(t) - cos(t)*cosh(t)")),
        (0.05, 0.9),
        "gamma(t) < 0 for 0 < t < T1 = 0.9375520344 (tanh t = cot t)",
    )


def _cos_model():
    def kernel(x, y, t):
        x, y, t = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, t)))
        m = _mu_sp(t)
        num = (x**2 - y**2) * np.sin(t) * np.sinh(t) + 2 * x * y - (x**2 + y**2) * np.cos(t) * np.cosh(t)
        return np.exp(num / (2 * m)) / np.sqrt(2 * np.pi * m)

    return Preset(
        "cos_model",
        CoefficientSet.from_strings(
            a="cos(t)^2", b="-sin(t)^2", c="-sin(2*t)", d="-0.5*sin(2*t)"
        ),
        {},
        kernel,
        _e("cos(t)*sinh(t) + sin(t)*cosh(t)"),
        (_e("cos(t)*sinh(t) + sin(t)*cosh(t)"), _e("sin(t)*sinh(t) + cos(t)*cosh(t)")),
        (0.05, 1.5),
        "kernel valid for 0 < t < T2 = 2.347045566 (tanh t = -cot t); "
        "a(t) vanishes at pi/2, which bounds the numerical window",
    )


_BUILDERS = {
    "classical": _classical,
    "linear_potential": _linear_potential,
    "hyperbolic": _hyperbolic,
    "hyperbolic_half": _hyperbolic_half,
    "oscillator": _oscillator,
    "cosh_model": _cosh_model,
    "cos_model": _cos_model,
}


def get_preset(name: str, **params) -> Preset:
    """Build the preset ``name`` with optional parameter overrides."""
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise UsageError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}") from None
    try:
        return builder(**params)
    except TypeError as exc:
        raise UsageError(f"bad parameters for preset {name!r}: {exc}") from None
