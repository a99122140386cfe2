"""Screened fractional Sobolev seminorms on strips and their trace spaces."""
from .domain import Box, GridFunction, LipschitzProfile, SeminormParams, StripDomain, make_profile
from .errors import (BoundViolation, ContainmentViolation, ConvergenceWarning,
                     DivergentIntegralError, DomainError, EquivalenceViolation, FitError,
                     FracStripError, NumericError, ParameterError, PreconditionError, RegimeError)
from .quadrature import QuadratureConfig
from .seminorms import (close_screened, difference_trace, equivalence_check_flat,
                        equivalence_check_general, far_screened, gagliardo, slice_horizontal_far,
                        slice_horizontal_near, slice_vertical, weighted_lp_trace)

__version__ = "0.1.0"
