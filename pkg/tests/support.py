"""Helpers shared by the test modules."""

import numpy as np

from heatprop import CoefficientSet
from heatprop.kernel import kernel_coeffs_trajectory

COEFF_NAMES = ("alpha", "beta", "gamma", "delta", "epsilon", "kappa")


def random_coefficient_set(rng, amplitude=0.5):
    """Smooth trigonometric coefficients with ``a`` bounded away from zero."""

    def trig(mean, amp):
        p, q = (float(v) for v in rng.uniform(-amp, amp, 2))
        w = float(rng.uniform(0.5, 2.0))
        return f"{mean!r} + {p!r}*sin({w!r}*t) + {q!r}*cos({w!r}*t)"

    a0 = float(rng.uniform(0.5, 1.5))
    return CoefficientSet.from_strings(
        a=trig(a0, 0.2 * a0),
        b=trig(0.0, amplitude),
        c=trig(0.0, amplitude),
        d=trig(0.0, amplitude),
        f=trig(0.0, amplitude),
        g=trig(0.0, amplitude),
    )


def coefficient_ode_residuals(cs, sol, t, h=1e-3):
    """Scaled residuals of the six first-order ODEs for the kernel coefficients.

    The time derivatives come from a five-point central stencil on a
    coefficient trajectory computed by one quadrature sweep.  Each residual
    is divided by ``max(1, |terms|)``.
    """
    ts = [t - 2 * h, t - h, t, t + h, t + 2 * h]
    k2m, km, k, kp, k2p = kernel_coeffs_trajectory(cs, sol, ts)

    def rate(name):
        return (getattr(k2m, name) - 8 * getattr(km, name) + 8 * getattr(kp, name) - getattr(k2p, name)) / (12 * h)

    a, b, c, d, f, g = (float(v) for v in cs.values(t))
    al, be, de = k.alpha, k.beta, k.delta
    terms = {
        "alpha": [b, -2 * c * al, -4 * a * al**2],
        "beta": [-(c + 4 * a * al) * be],
        "gamma": [-a * be**2],
        "delta": [-(c + 4 * a * al) * de, -f, 2 * al * g],
        "epsilon": [(g - 2 * a * de) * be],
        "kappa": [g * de, -a * de**2],
    }
    out = {}
    for name in COEFF_NAMES:
        dv = rate(name)
        parts = terms[name]
        scale = max(1.0, abs(dv), *(abs(p) for p in parts))
        out[name] = abs(dv + sum(parts)) / scale
    return out


def kernel_grid(n=21, lo=-2.0, hi=2.0):
    g = np.linspace(lo, hi, n)
    return np.meshgrid(g, g, indexing="ij")
