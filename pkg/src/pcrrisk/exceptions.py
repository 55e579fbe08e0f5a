"""Exception hierarchy shared by the analytic and simulation modules."""

from numpy.linalg import LinAlgError


class PCRRiskError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(PCRRiskError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class SolverError(PCRRiskError, RuntimeError):
    """A bracket could not be constructed or a root search failed."""


class BracketError(SolverError):
    """The supplied interval does not bracket a sign change."""


class ConvergenceError(SolverError):
    """An iterative routine hit its iteration budget.

    ``estimate`` holds the best value reached before giving up.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class DegenerateDesignError(PCRRiskError, LinAlgError):
    """A sampled design matrix is numerically rank deficient."""
