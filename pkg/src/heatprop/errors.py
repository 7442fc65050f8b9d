"""Exception hierarchy.

Errors split into two families that the command line maps onto exit codes:
``UsageError`` (bad input, exit 1) and ``NumericalError`` (the problem is
well posed but the requested quantity does not exist or cannot be computed,
exit 2).
"""


class HeatpropError(Exception):
    """Base class for all package errors."""


class UsageError(HeatpropError, ValueError):
    """Malformed user input: bad flags, unknown presets, malformed files."""


class ExprSyntaxError(UsageError):
    """Raised by the expression parser; carries the offending position."""

    def __init__(self, message, source="", position=None):
        self.source = source
        self.position = position
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)


class NumericalError(HeatpropError, ArithmeticError):
    """Base class for domain and numerical failures."""


class CoefficientDomainError(NumericalError):
    """A coefficient could not be evaluated (or a(t) vanished) at time ``t``."""

    def __init__(self, message, t=None):
        self.t = t
        super().__init__(message if t is None else f"{message} (t={t!r})")


class InvalidInitialDataError(NumericalError):
    """Degenerate characteristic initial data, i.e. a(t0) == 0."""


class StiffnessError(NumericalError):
    """Step size underflow in the characteristic integrator."""

    def __init__(self, message, t=None):
        self.t = t
        super().__init__(message if t is None else f"{message} (t={t!r})")


class DegenerateSetError(NumericalError):
    """A fundamental solution set whose Wronskian vanishes."""


class HorizonError(NumericalError):
    """Evaluation requested at or past the first zero of the characteristic function."""

    def __init__(self, message, t=None):
        self.t = t
        super().__init__(message if t is None else f"{message} (t={t!r})")


class ResolvedFormError(NumericalError):
    """The derivative of the characteristic function vanishes on the integration interval."""

    def __init__(self, message, t=None):
        self.t = t
        super().__init__(message if t is None else f"{message} (t={t!r})")


class DivergentIntegralError(NumericalError):
    """The propagator integral over the initial data does not converge."""


class KernelOverflowError(NumericalError, OverflowError):
    """The kernel exponent is too large to exponentiate."""
