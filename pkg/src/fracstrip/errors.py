"""Exception hierarchy shared by every module."""


class FracStripError(Exception):
    """Base class for all library errors."""


class ParameterError(FracStripError, ValueError):
    """Invalid numerical parameter (s, p, N, scale factors, configs)."""


class RegimeError(ParameterError):
    """Operation requires a parameter regime that does not hold (e.g. sp > 1)."""


class DomainError(FracStripError, ValueError):
    """Invalid domain, profile or screen."""


class PreconditionError(FracStripError, ValueError):
    """An operation's stated precondition is violated."""


class DivergentIntegralError(FracStripError, ArithmeticError):
    """The requested integral diverges for the given exponents."""


class NumericError(FracStripError, ArithmeticError):
    """A non-finite value appeared during quadrature."""


class BoundViolation(FracStripError, AssertionError):
    """A proved inequality failed numerically."""

    def __init__(self, message, offending=None):
        super().__init__(message)
        self.offending = offending or []


class EquivalenceViolation(BoundViolation):
    """A two-sided seminorm comparison failed."""


class ContainmentViolation(BoundViolation):
    """Finite/divergent verdicts do not match the expected containment chain."""


class FitError(FracStripError, ValueError):
    """A growth-rate fit could not be performed."""


class CatalogLookupError(FracStripError, KeyError):
    """Unknown catalog or profile name."""


class ConvergenceWarning(UserWarning):
    """Refinement did not reach the requested relative tolerance."""


class WindowingWarning(UserWarning):
    """A sampled function carries noticeable energy at the window edge."""
