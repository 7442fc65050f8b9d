"""The propagator against an independent finite-difference solver.

Crank-Nicolson on [-10, 10] with Dirichlet boundaries is compared with
the kernel solution for the cosh^2 model at t = 0.5.  Refining the grid
with the time step tied to the grid step shows second order.
"""

import numpy as np

from heatprop import GridField, apply_propagator, get_preset, heat_kernel
from heatprop.verify import convergence_order, crank_nicolson


def gaussian(y):
    return np.exp(-(y**2))


def main():
    cs = get_preset("cosh_model").coeffs
    t = 0.5
    steps = [0.1, 0.05, 0.025, 0.0125]
    errors = []
    print(f"{'dx':>8}  {'dt':>8}  {'max error on [-2, 2]':>20}")
    for dx in steps:
        u0 = GridField.uniform(-10, 10, int(round(20 / dx)) + 1, gaussian)
        out = crank_nicolson(cs, u0, t, int(round(t / (dx / 10))))
        inner = np.abs(out.xs) <= 2 + 1e-12
        ref = apply_propagator(heat_kernel(cs, t), gaussian, out.xs[inner])
        errors.append(float(np.max(np.abs(out.values[inner] - ref))))
        print(f"{dx:8.4f}  {dx / 10:8.5f}  {errors[-1]:20.3e}")
    print("observed orders:", ", ".join(f"{o:.3f}" for o in convergence_order(errors, [1, 2, 4, 8])))


if __name__ == "__main__":
    main()
