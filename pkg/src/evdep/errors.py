"""Exception and warning types shared across the package."""

from __future__ import annotations


class EvdepError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(EvdepError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class FeasibilityError(EvdepError, ValueError):
    """Tuning parameters yield an invalid mixture component somewhere.

    Raised when a beta-mixture shape parameter is nonpositive at a requested
    covariate value, i.e. the parameters fall outside the feasible region.
    """


class NumericError(EvdepError, ArithmeticError):
    """A numerical procedure produced an unusable intermediate result."""


class ExtrapolationError(NumericError):
    """Total kernel mass underflowed at an evaluation point.

    The point is too far from the observed covariates for the bandwidth in
    use; the estimate there would be 0/0.
    """


class DegenerateDensityError(EvdepError, ValueError):
    """An angular density carries no interior mass, so it cannot be sampled.

    The boundary case of the logistic family (alpha = 1) puts all angular
    mass at the vertices; interior inverse-CDF sampling is undefined there.
    """


class FitError(EvdepError, RuntimeError):
    """An optimizer failed to produce a usable fit."""


class EmptySampleError(EvdepError, ValueError):
    """An operation received or produced an empty sample."""


class NegativeDensityWarning(UserWarning):
    """Local-linear weights produced negative density values.

    Local-linear weights may be negative, so the estimated density can dip
    below zero in low-mass regions. The values are returned as computed.
    """
