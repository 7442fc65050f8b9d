"""Gauss-Kronrod 7/15 rules and helpers.

Besides the usual panel rule, each panel carries a *cumulative* matrix: the
interpolatory rule that integrates the degree-14 interpolant through the 15
Kronrod nodes from the panel's left end up to each node.  Chained integrals
(where one integrand depends on the running value of another) are evaluated
with it node by node inside a panel.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import legendre as L

# Kronrod abscissae on [-1, 1] (positive half, descending) and weights (QUADPACK qk15)
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# full ascending node set
NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss nodes are the odd-indexed positive-half Kronrod nodes
GAUSS_WEIGHTS = np.zeros(15)
_gauss_pos = [1, 3, 5, 7]
for _k, _i in enumerate(_gauss_pos):
    # position of +xgk[i] in NODES is 14 - i, of -xgk[i] is i
    GAUSS_WEIGHTS[14 - _i] = _WG[_k]
    GAUSS_WEIGHTS[_i] = _WG[_k]


def _cumulative_matrix(nodes):
    n = len(nodes)
    vander = L.legvander(nodes, n - 1)
    integrals = np.empty((n, n))
    for j in range(n):
        coef = np.zeros(n)
        coef[j] = 1.0
        integrals[:, j] = L.legval(nodes, L.legint(coef, lbnd=-1.0))
    return integrals @ np.linalg.inv(vander)


CUMULATIVE = _cumulative_matrix(NODES)


def panel(lo: float, hi: float):
    """Nodes, Kronrod weights, Gauss weights and cumulative matrix on ``[lo, hi]``."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    return mid + half * NODES, half * KRONROD_WEIGHTS, half * GAUSS_WEIGHTS, half * CUMULATIVE


def gk15(f, lo: float, hi: float):
    """One-panel Gauss-Kronrod estimate ``(kronrod, |kronrod - gauss|)``."""
    x, wk, wg, _ = panel(lo, hi)
    y = np.asarray(f(x), dtype=float)
    k = y @ wk
    return k, np.abs(k - y @ wg)


def adaptive_gk15(f, lo: float, hi: float, atol: float = 1e-12, rtol: float = 1e-10, max_panels: int = 2000):
    """Globally adaptive GK15 integration of a vectorised ``f`` over ``[lo, hi]``.

    ``f`` may return arrays of shape ``(..., 15)`` for a batch of integrands
    sharing the abscissae; the error test is applied to the worst component.
    Returns ``(value, error_estimate)``.
    """
    lo, hi = float(lo), float(hi)
    if hi == lo:
        shape = np.shape(f(np.full(15, lo)))[:-1]
        return np.zeros(shape)[()], np.zeros(shape)[()]
    panels = [(lo, hi) + gk15(f, lo, hi)]
    while True:
        total = sum(p[2] for p in panels)
        errs = np.array([np.max(p[3]) for p in panels])
        bound = max(atol, rtol * float(np.max(np.abs(total))))
        if errs.sum() <= bound or len(panels) >= max_panels:
            return total, sum(p[3] for p in panels)
        worst = int(np.argmax(errs))
        a, b, _, _ = panels.pop(worst)
        m = 0.5 * (a + b)
        panels.append((a, m) + gk15(f, a, m))
        panels.append((m, b) + gk15(f, m, b))


def gauss_legendre_panels(lo: float, hi: float, n_panels: int, order: int = 4):
    """Composite Gauss-Legendre nodes and weights on ``n_panels`` equal panels."""
    x, w = L.leggauss(order)
    edges = np.linspace(lo, hi, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights
