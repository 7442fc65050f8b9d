"""Characteristic function and validity horizons of the cosh^2 model.

For u_t = cosh^2 t u_xx + sinh^2 t x^2 u + sinh 2t (x u_x + u/2) the
characteristic function is mu = cos t sinh t + sin t cosh t.  The kernel's
quadratic coefficient gamma changes sign at the first root T1 of
tanh t = cot t, after which the propagator integral diverges for data that
does not decay.  T2 is the companion root of tanh t = -cot t.
"""

import math

import numpy as np

from heatprop import get_preset, solve_characteristic, validity_horizon
from heatprop.kernel import gamma_function
from heatprop.verify import find_transcendental_roots


def main():
    preset = get_preset("cosh_model")
    sol = solve_characteristic(preset.coeffs, 0.0, 1.3)
    print("   t        mu(t)         closed form")
    for t in np.linspace(0.0, 1.25, 6):
        print(f"{t:5.2f}  {float(sol.mu(t)):.12f}  {float(preset.analytic_mu(t)):.12f}")

    t1, t2 = find_transcendental_roots()
    gamma = gamma_function(preset.coeffs, 0.0, 1.3)
    horizon = validity_horizon(gamma.solution, gamma)
    print(f"\nT1 (tanh t = cot t)  = {t1:.10f}")
    print(f"T2 (tanh t = -cot t) = {t2:.10f}")
    print(f"numerical sign change of gamma = {horizon.t_gamma_zero:.10f}")
    print(f"pi/2 = {math.pi / 2:.10f}")


if __name__ == "__main__":
    main()
