"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class FPError(Exception):
    """Base class for library errors."""


class DomainError(FPError, ValueError):
    """Evaluation point lies on a support interval or outside a domain."""


class QuadratureError(FPError):
    """A quadrature or recurrence computation failed to converge."""


class DegeneracyError(FPError):
    """A homogeneous system has a null space of dimension two or more."""


class StructureError(FPError):
    """A structural property (zero count, sign pattern) failed numerically."""


class PoleError(FPError):
    """Evaluation point is (numerically) at a zero of a denominator."""


class DegreeCeilingError(FPError, ValueError):
    """Requested degree exceeds the supported ceiling."""


class FormulaRegressionError(FPError):
    """A numerically computed quantity disagrees with its closed form."""


class ConvergenceError(FPError):
    """An iteration did not converge.

    Attributes
    ----------
    trace : list
        Per-iteration diagnostics (displacements, violations, ...).
    """

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []


class ConfigError(FPError, ValueError):
    """Invalid experiment configuration.

    ``problems`` lists every violation found, not only the first.
    """

    def __init__(self, message: str, problems=None):
        super().__init__(message)
        self.problems = list(problems) if problems is not None else [message]


DEGREE_CEILING = 50
