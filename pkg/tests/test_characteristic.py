import math

import numpy as np
import pytest

from heatprop import (
    CoefficientSet,
    FundamentalSet,
    get_preset,
    mu_from_fundamental,
    solve_characteristic,
    validity_horizon,
)
from heatprop.characteristic import (
    bisect_newton,
    characteristic_from_fundamental,
    integrate_characteristic,
    numerical_fundamental_set,
)
from heatprop.errors import DegenerateSetError, InvalidInitialDataError, StiffnessError
from heatprop.expr import parse_coeff_expr
from heatprop.kernel import gamma_function
from heatprop.presets import PRESET_NAMES


def test_linear_potential_mu():
    sol = solve_characteristic(get_preset("linear_potential").coeffs, 0.0, 2.0)
    mu, dmu = sol(1.0)
    assert mu == pytest.approx(2.0, abs=1e-12)
    assert dmu == pytest.approx(2.0, abs=1e-12)


def test_hyperbolic_mu():
    sol = solve_characteristic(get_preset("hyperbolic").coeffs, 0.0, 2.0)
    ts = np.linspace(0, 2, 41)
    np.testing.assert_allclose(sol.mu(ts), np.sinh(2 * ts), rtol=1e-9, atol=1e-12)


def test_cosh_model_mu_value():
    sol = solve_characteristic(get_preset("cosh_model").coeffs, 0.0, 1.0)
    # independent high-precision evaluation of cos t sinh t + sin t cosh t
    assert sol.mu(0.5) == pytest.approx(0.997916838897403, abs=1e-10)
    exact = math.cos(0.5) * math.sinh(0.5) + math.sin(0.5) * math.cosh(0.5)
    assert sol.mu(0.5) == pytest.approx(exact, rel=1e-10)


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_matches_analytic_mu(name):
    preset = get_preset(name)
    hi = preset.window[1]
    sol = solve_characteristic(preset.coeffs, 0.0, hi, tol=1e-10)
    ts = np.linspace(0, hi, 57)
    exact = preset.analytic_mu(ts)
    scale = np.maximum(1.0, np.abs(exact))
    assert np.max(np.abs(sol.mu(ts) - exact) / scale) <= 1e-8


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_anchor_and_node_derivatives(name):
    preset = get_preset(name)
    sol = solve_characteristic(preset.coeffs, 0.0, preset.window[1])
    assert sol.mu_nodes[0] == 0.0
    assert sol.dmu_nodes[0] == 2.0 * preset.coeffs.a(0.0)
    np.testing.assert_allclose(sol.dmu(sol.ts), sol.dmu_nodes, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_interpolant_residual(name):
    preset = get_preset(name)
    tol = 1e-10
    sol = solve_characteristic(preset.coeffs, 0.0, preset.window[1], tol=tol)
    mid = 0.5 * (sol.ts[1:] + sol.ts[:-1])
    tau, sigma = preset.coeffs.tau_sigma_array(mid)
    mu, dmu, ddmu = sol.mu(mid), sol.dmu(mid), sol.ddmu(mid)
    res = ddmu - tau * dmu - 4 * sigma * mu
    scale = max(1.0, np.max(np.abs(ddmu)), np.max(np.abs(dmu)), np.max(np.abs(mu)))
    assert np.max(np.abs(res)) / scale <= 100 * tol


@pytest.mark.parametrize("name", ["hyperbolic", "oscillator", "cosh_model"])
def test_step_halving_order(name):
    # fixed-step runs (loose tolerance, step capped) must show order >= 3
    preset = get_preset(name)
    hi = min(preset.window[1], 1.0)
    errors = []
    for h in (0.1, 0.05):
        sol = integrate_characteristic(
            preset.coeffs, 0.0, hi, 0.0, 2 * preset.coeffs.a(0.0), tol=1e-2, max_step=h, first_step=h
        )
        ts = sol.ts
        errors.append(np.max(np.abs(sol.mu_nodes - preset.analytic_mu(ts))))
    assert errors[0] / errors[1] >= 8.0


def test_invalid_initial_data():
    cs = CoefficientSet.from_strings(a="t")
    with pytest.raises(InvalidInitialDataError):
        solve_characteristic(cs, 0.0, 1.0)


def test_stiffness_error():
    # mu'' = 4 sigma mu with a huge sigma forces step-size underflow
    cs = CoefficientSet.from_strings(a="1", b="1e30")
    with pytest.raises(StiffnessError):
        solve_characteristic(cs, 0.0, 1.0, tol=1e-12)


def test_default_end_time():
    sol = solve_characteristic(get_preset("classical").coeffs, 1.0)
    assert sol.t_end == pytest.approx(11.0)


def test_fundamental_recombination_examples():
    cs = get_preset("classical").coeffs
    fs = FundamentalSet(parse_coeff_expr("1"), parse_coeff_expr("t"), cs.a)
    mu, dmu = mu_from_fundamental(fs, 0.5, 0.5)
    assert (mu, dmu) == (0.0, 2.0)
    mu, dmu = mu_from_fundamental(fs, 0.5, 2.0)
    assert mu == pytest.approx(3.0) and dmu == pytest.approx(2.0)
    direct = solve_characteristic(cs, 0.5, 2.0)
    assert direct.mu(2.0) == pytest.approx(mu, abs=1e-12)


def test_degenerate_fundamental_set():
    a = parse_coeff_expr("1")
    fs = FundamentalSet(parse_coeff_expr("t"), parse_coeff_expr("2*t"), a)
    with pytest.raises(DegenerateSetError):
        mu_from_fundamental(fs, 0.3, 1.0)


def test_cosh_model_wronskian():
    preset = get_preset("cosh_model")
    fs = FundamentalSet(*preset.fundamental, preset.coeffs.a)
    for t0 in (0.0, 0.4, 0.8):
        assert fs.wronskian(t0) == pytest.approx(2 * math.cosh(t0) ** 2, rel=1e-14)


@pytest.mark.parametrize("name", PRESET_NAMES)
@pytest.mark.parametrize("t0", [0.0, 0.3])
def test_fundamental_agrees_with_solver(name, t0):
    preset = get_preset(name)
    hi = min(preset.window[1], 0.9 if name == "cosh_model" else preset.window[1])
    fs = FundamentalSet(*preset.fundamental, preset.coeffs.a)
    sol = solve_characteristic(preset.coeffs, t0, hi)
    ts = np.linspace(t0, hi, 31)
    mu, dmu = mu_from_fundamental(fs, t0, ts)
    np.testing.assert_allclose(sol.mu(ts), mu, rtol=0, atol=1e-8)
    np.testing.assert_allclose(sol.dmu(ts), dmu, rtol=0, atol=1e-8)


def test_numerical_fundamental_set_reanchors():
    cs = get_preset("cosh_model").coeffs
    fs = numerical_fundamental_set(cs, 0.0, 1.2)
    built = characteristic_from_fundamental(fs, 0.4, 1.2, n=401)
    direct = solve_characteristic(cs, 0.4, 1.2)
    ts = np.linspace(0.4, 1.2, 17)
    np.testing.assert_allclose(built.mu(ts), direct.mu(ts), atol=1e-8)


def test_horizon_classical():
    sol = solve_characteristic(get_preset("classical").coeffs, 0.0, 2.0)
    gamma = gamma_function(get_preset("classical").coeffs, 0.0, 2.0)
    h = validity_horizon(sol, gamma)
    assert math.isinf(h.t_mu_zero) and math.isinf(h.t_gamma_zero) and h.gamma_checked
    h = validity_horizon(sol)
    assert not h.gamma_checked and math.isinf(h.t_gamma_zero)


def test_horizon_oscillator():
    sol = solve_characteristic(get_preset("oscillator").coeffs, 0.0, 4.0)
    assert abs(validity_horizon(sol).t_mu_zero - math.pi) <= 1e-9


def test_horizon_cosh_model_gamma():
    cs = get_preset("cosh_model").coeffs
    gamma = gamma_function(cs, 0.0, 1.3)
    h = validity_horizon(gamma.solution, gamma)
    assert abs(h.t_gamma_zero - 0.9375520344) <= 1e-8


def test_horizon_from_samples():
    cs = get_preset("cosh_model").coeffs
    gamma = gamma_function(cs, 0.0, 1.3)
    ts = np.linspace(0.05, 1.3, 400)
    gs = np.array([gamma(t) for t in ts])
    h = validity_horizon(gamma.solution, (ts, gs))
    assert abs(h.t_gamma_zero - 0.9375520344) <= 1e-4


def test_bisect_newton():
    root = bisect_newton(math.cos, 1.0, 2.0, lambda t: -math.sin(t))
    assert abs(root - math.pi / 2) <= 1e-12
    assert abs(bisect_newton(lambda t: t**3 - 2, 0.0, 2.0) - 2 ** (1 / 3)) <= 1e-10
