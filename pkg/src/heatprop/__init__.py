"""Exact heat kernels for diffusion equations with time-dependent coefficients.

The equation handled is

    u_t = a(t) u_xx - b(t) x^2 u + c(t) x u_x + d(t) u + f(t) x u - g(t) u_x

whose kernel is a Gaussian in ``(x, y)`` with coefficients built from the
solution ``mu`` of a second-order linear "characteristic" ODE.
"""

from .errors import (
    CoefficientDomainError,
    DegenerateSetError,
    DivergentIntegralError,
    ExprSyntaxError,
    HeatpropError,
    HorizonError,
    InvalidInitialDataError,
    KernelOverflowError,
    NumericalError,
    ResolvedFormError,
    StiffnessError,
    UsageError,
)
from .expr import CoeffExpr, differentiate, parse_coeff_expr
from .coeffs import CoefficientSet, Problem, load_problem, problem_from_dict, tau_sigma
from .presets import PRESET_NAMES, Preset, get_preset
from .characteristic import (
    CharacteristicSolution,
    FundamentalSet,
    mu_from_fundamental,
    solve_characteristic,
    validity_horizon,
)
from .kernel import (
    HeatKernel,
    KernelCoefficients,
    asymptotic_kernel,
    compute_kernel_coeffs,
    eval_kernel,
    heat_kernel,
    kernel_coeffs_initial,
    log_kernel,
)
from .propagator import (
    Constant,
    Delta,
    Function,
    GridField,
    apply_propagator,
    duhamel_solve,
    solve_constant_data,
)
from .verify import ResidualReport, crank_nicolson, find_transcendental_roots, pde_residual

__version__ = "0.1.0"
