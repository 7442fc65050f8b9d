"""Propagating initial data and adding sources.

1. Gaussian data under the hyperbolic preset, computed with Gauss-Hermite
   quadrature at two orders.
2. Semigroup check: propagating to 0.3 and then on to 0.8 equals
   propagating straight to 0.8.
3. A source term F(t, x) = x^2 - 2t with zero data reproduces u = t x^2.
"""

import numpy as np

from heatprop import apply_propagator, duhamel_solve, get_preset, heat_kernel


def gaussian(y):
    return np.exp(-(y**2))


def main():
    cs = get_preset("hyperbolic").coeffs
    xs = np.linspace(-2, 2, 9)
    hk = heat_kernel(cs, 0.8)
    u64 = apply_propagator(hk, gaussian, xs, order=64)
    u128 = apply_propagator(hk, gaussian, xs, order=128)
    print("hyperbolic preset, Gaussian data, t = 0.8")
    for x, u in zip(xs, u64):
        print(f"  x = {x:5.2f}   u = {u:.12f}")
    print(f"  change when doubling the quadrature order: {np.max(np.abs(u128 - u64)):.1e}")

    first, second = heat_kernel(cs, 0.3), heat_kernel(cs, 0.8, 0.3)
    composed = apply_propagator(second, lambda y: apply_propagator(first, gaussian, y), xs)
    print(f"  semigroup composition error: {np.max(np.abs(composed - u64)):.1e}")

    classical = get_preset("classical").coeffs
    xs = np.linspace(-1, 1, 5)
    field = duhamel_solve(classical, None, lambda s, x: x**2 - 2 * s, xs, 0.5)
    print("\nclassical preset, zero data, source x^2 - 2t, t = 0.5")
    for x, u in zip(xs, field.values):
        print(f"  x = {x:5.2f}   u = {u:.12f}   t x^2 = {0.5 * x * x:.12f}")


if __name__ == "__main__":
    main()
