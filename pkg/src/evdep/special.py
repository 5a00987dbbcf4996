"""Beta-family special functions and the Gaussian smoothing kernel.

All beta-density work is done on the log scale via ``gammaln`` so that large
shape parameters (sharply concentrated mixture components) neither overflow
nor lose precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .errors import DomainError

__all__ = [
    "BetaParams",
    "beta_density",
    "log_beta_density",
    "reg_inc_beta",
    "gaussian_kernel",
]

_LOG_TWO_PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class BetaParams:
    """Shape-parameter pair (p, q) of a beta distribution; both positive."""

    p: float
    q: float

    def __post_init__(self) -> None:
        if not (self.p > 0.0 and math.isfinite(self.p)):
            raise DomainError(f"beta shape p must be positive and finite, got {self.p}")
        if not (self.q > 0.0 and math.isfinite(self.q)):
            raise DomainError(f"beta shape q must be positive and finite, got {self.q}")


def _validate_unit_open(w, name: str = "w"):
    arr = np.asarray(w, dtype=float)
    if arr.size and (np.any(arr <= 0.0) | np.any(arr >= 1.0) | np.any(~np.isfinite(arr))):
        raise DomainError(f"{name} must lie strictly inside (0, 1)")
    return arr


def log_beta_density(w, p, q):
    """Log of the beta(p, q) density at ``w``; broadcasts over arrays.

    No domain validation: callers on hot paths guarantee 0 < w < 1 and
    positive shapes.
    """
    w = np.asarray(w, dtype=float)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    lognorm = sp.gammaln(p + q) - sp.gammaln(p) - sp.gammaln(q)
    return lognorm + (p - 1.0) * np.log(w) + (q - 1.0) * np.log1p(-w)


def beta_density(w, params: BetaParams):
    """Beta density at ``w`` in (0, 1) with shapes ``params``.

    Parameters
    ----------
    w : float or ndarray
        Evaluation points, each strictly inside (0, 1).
    params : BetaParams
        Positive shape pair.

    Returns
    -------
    float or ndarray
        Density values, evaluated in log space and exponentiated.
    """
    arr = _validate_unit_open(w)
    out = np.exp(log_beta_density(arr, params.p, params.q))
    return float(out) if np.isscalar(w) or arr.ndim == 0 else out


def reg_inc_beta(w, params: BetaParams):
    """Regularized incomplete beta function at ``w`` in [0, 1].

    This is the beta(p, q) distribution function; monotone in ``w`` with
    value 0 at 0 and 1 at 1.
    """
    arr = np.asarray(w, dtype=float)
    if arr.size and (np.any(arr < 0.0) | np.any(arr > 1.0) | np.any(~np.isfinite(arr))):
        raise DomainError("w must lie in [0, 1]")
    out = sp.betainc(params.p, params.q, arr)
    return float(out) if np.isscalar(w) or arr.ndim == 0 else out


def gaussian_kernel(u, b: float):
    """Scaled Gaussian kernel (1/b) * phi(u/b) with bandwidth ``b`` > 0."""
    if not (b > 0.0 and math.isfinite(b)):
        raise DomainError(f"bandwidth must be positive and finite, got {b}")
    u = np.asarray(u, dtype=float)
    out = np.exp(log_gaussian_kernel(u, b))
    return float(out) if out.ndim == 0 else out


def log_gaussian_kernel(u, b: float):
    """Log of ``gaussian_kernel``; used wherever underflow matters."""
    u = np.asarray(u, dtype=float)
    z = u / b
    return -0.5 * z * z - math.log(b) - 0.5 * _LOG_TWO_PI
