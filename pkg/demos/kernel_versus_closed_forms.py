"""Numerical kernels against every closed form in the preset catalog.

The pipeline never looks at the closed forms: it integrates the
characteristic equation, accumulates the coefficient integrals and
assembles K.  The table shows the worst relative error on a 21 x 21 grid
over [-2, 2]^2 and the diagonal value K(0, 0, t).
"""

from heatprop import get_preset, heat_kernel
from heatprop.presets import PRESET_NAMES
from heatprop.verify import REFERENCE_TIMES, kernel_grid_error


def main():
    print(f"{'preset':>16}  {'t':>5}  {'max rel err':>11}  {'K(0,0,t)':>14}")
    for name in PRESET_NAMES:
        preset = get_preset(name)
        t = REFERENCE_TIMES[name]
        err = kernel_grid_error(preset, t)
        k00 = heat_kernel(preset.coeffs, t)(0.0, 0.0)
        print(f"{name:>16}  {t:5.2f}  {err:11.2e}  {k00:14.10f}")


if __name__ == "__main__":
    main()
