"""Exception hierarchy shared by the solver, oracle and command line."""


class WardropError(Exception):
    """Base class for all package errors."""


class ValidationError(WardropError, ValueError):
    """Malformed network, cost function or instance file."""


class InvariantViolation(WardropError, RuntimeError):
    """An internal consistency check of the solver failed."""


class BudgetExceeded(WardropError, RuntimeError):
    """The pivot budget ran out before the curve was complete."""


class SingularMatrixError(WardropError, ArithmeticError):
    """A matrix that was expected to be invertible is singular."""


class OracleError(WardropError, RuntimeError):
    """The fixed-demand oracle failed to converge or was given bad input."""
