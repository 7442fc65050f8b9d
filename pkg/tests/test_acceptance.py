"""End-to-end acceptance checks.

Each test prints one ``PASS``/``FAIL`` line naming the criterion and the
measured quantity, then asserts.  Run with ``pytest tests/test_acceptance.py -s``
to see the lines.
"""

import warnings

import numpy as np
from support import coefficient_ode_residuals, random_coefficient_set

from heatprop import (
    GridField,
    apply_propagator,
    asymptotic_kernel,
    duhamel_solve,
    get_preset,
    heat_kernel,
    kernel_coeffs_initial,
    solve_characteristic,
    solve_constant_data,
    validity_horizon,
)
from heatprop.kernel import gamma_function
from heatprop.presets import PRESET_NAMES
from heatprop.verify import (
    REFERENCE_TIMES,
    TruncationWarning,
    convergence_order,
    crank_nicolson,
    find_transcendental_roots,
    kernel_grid_error,
)

XS = np.linspace(-2, 2, 41)


def gaussian(y):
    return np.exp(-(y**2))


def report(number, ok, detail):
    print(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
    assert ok, detail


def test_criterion_1_closed_forms():
    errors = {name: kernel_grid_error(get_preset(name), REFERENCE_TIMES[name]) for name in PRESET_NAMES}
    worst = max(errors, key=errors.get)
    report(
        1,
        all(e <= 1e-6 for e in errors.values()),
        f"closed-form kernels, max relative error {errors[worst]:.2e} ({worst}) <= 1e-6",
    )


def test_criterion_2_transcendental_horizons():
    t1, t2 = find_transcendental_roots()
    cs = get_preset("cosh_model").coeffs
    gamma = gamma_function(cs, 0.0, 1.3)
    t_gamma = validity_horizon(gamma.solution, gamma).t_gamma_zero
    e1, e2, eg = abs(t1 - 0.9375520344), abs(t2 - 2.347045566), abs(t_gamma - t1)
    report(
        2,
        e1 <= 1e-8 and e2 <= 1e-8 and eg <= 1e-6,
        f"T1={t1:.10f} (err {e1:.1e}), T2={t2:.9f} (err {e2:.1e}), gamma sign change {t_gamma:.10f} (off {eg:.1e})",
    )


def test_criterion_3_initial_limits():
    cases = [(get_preset(name).coeffs, 0.0) for name in PRESET_NAMES]
    rng = np.random.default_rng(2024)
    for _ in range(20):
        cs = random_coefficient_set(rng)
        cases.append((cs, float(rng.uniform(-1.0, 1.0))))
    worst = 0.0
    for cs, t0 in cases:
        kc = heat_kernel(cs, t0 + 1e-6, t0).kc
        want = np.array(kernel_coeffs_initial(cs, t0))
        worst = max(worst, float(np.max(np.abs(np.array([kc.delta, kc.epsilon, kc.kappa]) - want))))
    report(3, worst <= 1e-4, f"(delta, epsilon, kappa) at t0+1e-6 on {len(cases)} sets, max error {worst:.2e} <= 1e-4")


def test_criterion_4_asymptotics():
    worst = 0.0
    s = 1e-4
    for name in PRESET_NAMES:
        cs = get_preset(name).coeffs
        hk = heat_kernel(cs, s)
        for y in (0.0, 0.5):
            for dx in (0.0, 0.1, -0.1):
                ratio = hk(y + dx, y) / asymptotic_kernel(cs, y + dx, y, s)
                worst = max(worst, abs(ratio - 1))
    report(4, worst <= 1e-2, f"exact/asymptotic kernel ratio at t-t0=1e-4, max |ratio-1| {worst:.2e} <= 1e-2")


def test_criterion_5_coefficient_odes():
    worst, where = 0.0, ""
    sets = [(name, get_preset(name).coeffs, get_preset(name).window) for name in PRESET_NAMES]
    rng = np.random.default_rng(55)
    for k in range(5):
        sets.append((f"random{k}", random_coefficient_set(rng), (0.05, 0.6)))
    for label, cs, (lo, hi) in sets:
        sol = solve_characteristic(cs, 0.0, hi)
        for t in np.linspace(max(lo, 0.1), hi - 0.01, 6):
            res = coefficient_ode_residuals(cs, sol, float(t))
            name = max(res, key=res.get)
            if res[name] > worst:
                worst, where = res[name], f"{label}/{name}"
    report(5, worst <= 1e-5, f"coefficient ODEs incl. Riccati, max scaled residual {worst:.2e} ({where}) <= 1e-5")


def test_criterion_6_propagator_laws():
    hk = heat_kernel(get_preset("classical").coeffs, 0.7)
    e_const = float(np.max(np.abs(apply_propagator(hk, 3.0, XS) - 3.0)))

    a, f, t = 1.0, 0.5, 1.2
    lin = heat_kernel(get_preset("linear_potential", a=a, f=f).coeffs, t)
    exact = np.exp(f * XS * t + a * f**2 * t**3 / 3)
    e_lin = max(
        float(np.max(np.abs(apply_propagator(lin, 1.0, XS) / exact - 1))),
        float(np.max(np.abs(solve_constant_data(lin.kc, 1.0)(XS) / exact - 1))),
    )

    e_semi = 0.0
    for name in ("classical", "hyperbolic"):
        cs = get_preset(name).coeffs
        direct = apply_propagator(heat_kernel(cs, 0.8, 0.0), gaussian, XS)
        first, second = heat_kernel(cs, 0.3, 0.0), heat_kernel(cs, 0.8, 0.3)
        composed = apply_propagator(second, lambda y: apply_propagator(first, gaussian, y), XS)
        e_semi = max(e_semi, float(np.max(np.abs(composed - direct))))
    report(
        6,
        e_const <= 1e-10 and e_lin <= 1e-10 and e_semi <= 1e-6,
        f"steady constant {e_const:.1e} <= 1e-10, uniform data under linear potential {e_lin:.1e} <= 1e-10, "
        f"semigroup {e_semi:.1e} <= 1e-6",
    )


def test_criterion_7_duhamel():
    cs = get_preset("classical").coeffs
    xs = np.linspace(-1, 1, 21)
    t = 0.5
    mms = duhamel_solve(cs, None, lambda s, x: x**2 - 2 * s, xs, t)
    e_mms = float(np.max(np.abs(mms.values - t * xs**2)))
    unit = duhamel_solve(cs, None, lambda s, x: np.ones_like(x), xs, t)
    e_unit = float(np.max(np.abs(unit.values - t)))
    report(
        7,
        e_mms <= 1e-4 and e_unit <= 1e-8,
        f"manufactured solution t*x^2 error {e_mms:.1e} <= 1e-4, unit source error {e_unit:.1e} <= 1e-8",
    )


def _cn_versus_propagator(dx, dt, t=0.5, half_width=10.0):
    cs = get_preset("cosh_model").coeffs
    n = int(round(2 * half_width / dx)) + 1
    u0 = GridField.uniform(-half_width, half_width, n, gaussian)
    with warnings.catch_warnings():
        warnings.simplefilter("error", TruncationWarning)
        out = crank_nicolson(cs, u0, t, int(round(t / dt)))
    inner = np.abs(out.xs) <= 2 + 1e-12
    ref = apply_propagator(heat_kernel(cs, t), gaussian, out.xs[inner])
    return float(np.max(np.abs(out.values[inner] - ref)))


def test_criterion_8_crank_nicolson_cross_check():
    err = _cn_versus_propagator(1e-2, 1e-3)
    # refinement with the time step tied to the grid step
    steps = [0.1, 0.05, 0.025, 0.0125]
    errors = [_cn_versus_propagator(dx, dx / 10) for dx in steps]
    orders = convergence_order(errors, [1, 2, 4, 8])
    ok = err <= 5e-4 and bool(np.all((orders >= 1.8) & (orders <= 2.2)))
    report(
        8,
        ok,
        f"cosh_model t=0.5 Crank-Nicolson vs propagator {err:.1e} <= 5e-4; observed orders "
        + ", ".join(f"{o:.3f}" for o in orders),
    )

