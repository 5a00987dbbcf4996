"""Covariate-indexed angular density and distribution estimation.

The estimator is a beta-density mixture over the observed pseudo-angles,
with kernel weights in the covariate and a per-covariate tilt of the mixture
shapes that pins the mean of the estimated density at 1/2. Two weight
schemes are supported: Nadaraya-Watson (``"nw"``, nonnegative, the default)
and local-linear (``"ll"``, signed, better near covariate boundaries).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import special as sp

from .errors import (
    DomainError,
    EmptySampleError,
    ExtrapolationError,
    FeasibilityError,
    NegativeDensityWarning,
    NumericError,
)
from .special import _LOG_TWO_PI, log_beta_density

__all__ = [
    "AngleSample",
    "TuningParams",
    "AngularSurface",
    "WEIGHT_SCHEMES",
    "nw_weights",
    "ll_weights",
    "moment_correction",
    "angular_density",
    "angular_cdf",
    "surface_grid",
    "default_angle_grid",
    "grid_frame",
]

WEIGHT_SCHEMES = ("nw", "ll")

# Refuse to normalize kernel weights when the total mass underflows below
# this; the evaluation point is effectively outside the data.
_LOG_MASS_FLOOR = math.log(1e-300)

# Relative threshold below which the local-linear moment determinant is
# treated as singular (all kernel mass at a single covariate value).
_LL_SINGULAR_RTOL = 1e-13


@dataclass(frozen=True)
class AngleSample:
    """Paired covariates and pseudo-angles.

    Parameters
    ----------
    x : ndarray
        Covariate values, finite, length n >= 1.
    w : ndarray
        Pseudo-angles, strictly inside (0, 1), same length as ``x``.
    source : str
        Optional provenance note (input path, generator description).
    """

    x: np.ndarray
    w: np.ndarray
    source: str = ""

    def __post_init__(self) -> None:
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        w = np.atleast_1d(np.asarray(self.w, dtype=float))
        if x.ndim != 1 or w.ndim != 1:
            raise DomainError("x and w must be one-dimensional")
        if x.size != w.size:
            raise DomainError(f"length mismatch: {x.size} covariates, {w.size} angles")
        if x.size == 0:
            raise EmptySampleError("angle sample is empty")
        if not np.all(np.isfinite(x)):
            raise DomainError("covariates must be finite")
        if np.any(w <= 0.0) or np.any(w >= 1.0) or not np.all(np.isfinite(w)):
            raise DomainError("angles must lie strictly inside (0, 1)")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "w", w)

    @property
    def n(self) -> int:
        return self.x.size

    def subset(self, idx) -> "AngleSample":
        return AngleSample(self.x[idx], self.w[idx], source=self.source)

    @classmethod
    def from_csv(cls, path) -> "AngleSample":
        frame = pd.read_csv(path)
        missing = {"x", "w"} - set(frame.columns)
        if missing:
            raise DomainError(f"angle CSV {path} lacks columns: {sorted(missing)}")
        return cls(frame["x"].to_numpy(), frame["w"].to_numpy(), source=str(path))

    def to_csv(self, path) -> None:
        pd.DataFrame({"x": self.x, "w": self.w}).to_csv(path, index=False)


@dataclass(frozen=True)
class TuningParams:
    """Estimator tuning: bandwidth b, concentration nu, flattening tau.

    ``b`` and ``nu`` must be positive, ``tau`` nonnegative; ``weights``
    selects the kernel weight scheme (``"nw"`` or ``"ll"``).
    """

    b: float
    nu: float
    tau: float = 0.0
    weights: str = "nw"

    def __post_init__(self) -> None:
        for name in ("b", "nu", "tau"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value}")
        if self.b <= 0.0:
            raise DomainError(f"bandwidth b must be positive, got {self.b}")
        if self.nu <= 0.0:
            raise DomainError(f"concentration nu must be positive, got {self.nu}")
        if self.tau < 0.0:
            raise DomainError(f"flattening tau must be nonnegative, got {self.tau}")
        if self.weights not in WEIGHT_SCHEMES:
            raise DomainError(f"weights must be one of {WEIGHT_SCHEMES}, got {self.weights!r}")


def _as_eval_points(x) -> np.ndarray:
    pts = np.atleast_1d(np.asarray(x, dtype=float))
    if pts.ndim != 1:
        raise DomainError("covariate evaluation points must be one-dimensional")
    if pts.size == 0:
        raise EmptySampleError("no covariate evaluation points given")
    if not np.all(np.isfinite(pts)):
        raise DomainError("covariate evaluation points must be finite")
    return pts


def _nw_weight_matrix(x_eval: np.ndarray, xs: np.ndarray, b: float) -> np.ndarray:
    """Rows of Nadaraya-Watson weights, one per evaluation point.

    Computed as a row softmax of log kernel values so that far-out (but
    still representable) evaluation points keep exact normalization.
    """
    z = (x_eval[:, None] - xs[None, :]) / b
    logk = -0.5 * z * z
    rowmax = logk.max(axis=1, keepdims=True)
    expk = np.exp(logk - rowmax)
    rowsum = expk.sum(axis=1, keepdims=True)
    logmass = rowmax[:, 0] + np.log(rowsum[:, 0]) - math.log(b) - 0.5 * _LOG_TWO_PI
    bad = logmass < _LOG_MASS_FLOOR
    if np.any(bad):
        j = int(np.argmin(logmass))
        gap = float(np.min(np.abs(x_eval[j] - xs)))
        raise ExtrapolationError(
            f"kernel mass underflow at x={x_eval[j]!r}: nearest covariate is "
            f"{gap:g} away with bandwidth b={b:g}"
        )
    pi = expk / rowsum
    return pi / pi.sum(axis=1, keepdims=True)


def _ll_weight_matrix(x_eval: np.ndarray, xs: np.ndarray, b: float) -> np.ndarray:
    """Rows of local-linear weights; entries may be negative."""
    d = xs[None, :] - x_eval[:, None]
    z = d / b
    logk = -0.5 * z * z
    rowmax = logk.max(axis=1, keepdims=True)
    k = np.exp(logk - rowmax)
    logmass = rowmax[:, 0] + np.log(k.sum(axis=1)) - math.log(b) - 0.5 * _LOG_TWO_PI
    if np.any(logmass < _LOG_MASS_FLOOR):
        j = int(np.argmin(logmass))
        gap = float(np.min(np.abs(x_eval[j] - xs)))
        raise ExtrapolationError(
            f"kernel mass underflow at x={x_eval[j]!r}: nearest covariate is "
            f"{gap:g} away with bandwidth b={b:g}"
        )
    n = xs.size
    s0 = k.mean(axis=1)
    s1 = (d * k).mean(axis=1)
    s2 = (d * d * k).mean(axis=1)
    denom = s2 * s0 - s1 * s1
    scale = s2 * s0 + s1 * s1
    singular = denom <= scale * _LL_SINGULAR_RTOL
    if np.any(singular):
        j = int(np.argmax(singular))
        raise NumericError(
            f"local-linear moment matrix is singular at x={x_eval[j]!r}; "
            "effective kernel mass covers a single covariate value "
            "(use nw weights or a larger bandwidth)"
        )
    pi = (s2[:, None] - s1[:, None] * d) * k / (n * denom[:, None])
    return pi / pi.sum(axis=1, keepdims=True)


def _weight_matrix(x_eval: np.ndarray, xs: np.ndarray, b: float, scheme: str) -> np.ndarray:
    if scheme == "nw":
        return _nw_weight_matrix(x_eval, xs, b)
    if scheme == "ll":
        return _ll_weight_matrix(x_eval, xs, b)
    raise DomainError(f"unknown weight scheme {scheme!r}")


def _validate_bandwidth(b: float) -> None:
    if not (b > 0.0 and math.isfinite(b)):
        raise DomainError(f"bandwidth b must be positive and finite, got {b}")


def nw_weights(x: float, sample: AngleSample, b: float) -> np.ndarray:
    """Nadaraya-Watson kernel weights at covariate ``x``.

    Nonnegative, sum exactly 1. Raises ExtrapolationError when the kernel
    mass at ``x`` underflows.
    """
    _validate_bandwidth(b)
    pts = _as_eval_points(x)
    if pts.size != 1:
        raise DomainError("x must be a single covariate value")
    return _nw_weight_matrix(pts, sample.x, b)[0]


def ll_weights(x: float, sample: AngleSample, b: float) -> np.ndarray:
    """Local-linear kernel weights at covariate ``x``.

    Sum exactly 1 but individual weights may be negative. Raises
    NumericError when the local moment matrix is singular (a single
    distinct covariate value under the kernel).
    """
    _validate_bandwidth(b)
    pts = _as_eval_points(x)
    if pts.size != 1:
        raise DomainError("x must be a single covariate value")
    return _ll_weight_matrix(pts, sample.x, b)[0]


def moment_correction(x: float, sample: AngleSample, weights: np.ndarray) -> float:
    """Tilt factor that centers the weighted angle mean at 1/2.

    Returns 0.5 divided by the weighted mean of the angles. The weighted
    mean must be positive (it always is for Nadaraya-Watson weights, but
    local-linear weights can push it to zero or below, which raises
    NumericError rather than clamping).
    """
    weights = np.asarray(weights, dtype=float)
    if weights.shape != sample.x.shape:
        raise DomainError("weights must align with the sample")
    mean_w = float(weights @ sample.w)
    if not (mean_w > 0.0) or not math.isfinite(mean_w):
        raise NumericError(
            f"weighted angle mean {mean_w:g} at x={x!r} is not positive; "
            "the moment correction is undefined there"
        )
    return 0.5 / mean_w


def _shape_matrices(
    theta: np.ndarray, wobs: np.ndarray, nu: float, tau: float
) -> tuple[np.ndarray, np.ndarray]:
    """Mixture shape arrays (rows: evaluation points, cols: components)."""
    tw = theta[:, None] * wobs[None, :]
    return nu * tw + tau, nu * (1.0 - tw) + tau


def _check_feasible_rows(
    p: np.ndarray, q: np.ndarray, x_eval: np.ndarray
) -> None:
    bad_rows = np.where((p.min(axis=1) <= 0.0) | (q.min(axis=1) <= 0.0))[0]
    if bad_rows.size:
        shown = ", ".join(f"{x_eval[j]:g}" for j in bad_rows[:8])
        more = "" if bad_rows.size <= 8 else f" (and {bad_rows.size - 8} more)"
        raise FeasibilityError(
            f"nonpositive beta shape at covariate value(s): {shown}{more}; "
            "increase tau or nu, or shrink the evaluation range"
        )


@dataclass(frozen=True)
class AngularSurface:
    """A fitted angular-density surface: sample plus tuning parameters.

    Evaluation is lazy; the object just packages the data, the weight
    scheme, and (b, nu, tau) behind density/distribution methods.
    """

    sample: AngleSample
    params: TuningParams

    def weights_at(self, x: float) -> np.ndarray:
        if self.params.weights == "nw":
            return nw_weights(x, self.sample, self.params.b)
        return ll_weights(x, self.sample, self.params.b)

    def theta_at(self, x: float) -> float:
        return moment_correction(x, self.sample, self.weights_at(x))

    def shapes_at(self, x: float) -> tuple[np.ndarray, np.ndarray]:
        """Component shape vectors (p, q) at ``x``; checks feasibility."""
        theta = np.array([self.theta_at(x)])
        p, q = _shape_matrices(theta, self.sample.w, self.params.nu, self.params.tau)
        _check_feasible_rows(p, q, np.atleast_1d(np.asarray(x, dtype=float)))
        return p[0], q[0]

    def density(self, w, x: float):
        return angular_density(w, x, self)

    def cdf(self, w, x: float):
        return angular_cdf(w, x, self)


def _theta_rows_arrays(
    xs: np.ndarray, ws: np.ndarray, b: float, scheme: str, x_eval: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Weight matrix and moment corrections over evaluation points."""
    pi = _weight_matrix(x_eval, xs, b, scheme)
    mean_w = pi @ ws
    bad = ~(mean_w > 0.0) | ~np.isfinite(mean_w)
    if np.any(bad):
        j = int(np.argmax(bad))
        raise NumericError(
            f"weighted angle mean {mean_w[j]:g} at x={x_eval[j]:g} is not positive; "
            "the moment correction is undefined there"
        )
    return pi, 0.5 / mean_w


def _theta_rows(
    surface: AngularSurface, x_eval: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    return _theta_rows_arrays(
        surface.sample.x, surface.sample.w, surface.params.b, surface.params.weights, x_eval
    )


def _density_grid_arrays(
    xs: np.ndarray,
    ws: np.ndarray,
    params: TuningParams,
    x_eval: np.ndarray,
    w_grid: np.ndarray,
) -> np.ndarray:
    """Density values on the product grid, shape (len(x_eval), len(w_grid)).

    Rows sharing a moment correction reuse one set of component densities;
    with identical covariates the whole grid collapses to a single set.
    """
    pi, theta = _theta_rows_arrays(xs, ws, params.b, params.weights, x_eval)
    nu, tau = params.nu, params.tau
    p, q = _shape_matrices(theta, ws, nu, tau)
    _check_feasible_rows(p, q, x_eval)
    out = np.empty((x_eval.size, w_grid.size))
    uniq, inverse = np.unique(theta, return_inverse=True)
    logw = np.log(w_grid)
    log1mw = np.log1p(-w_grid)
    lognorm = sp.gammaln(nu + 2.0 * tau)
    for u in range(uniq.size):
        rows = np.where(inverse == u)[0]
        pr, qr = p[rows[0]], q[rows[0]]
        logb = (
            lognorm
            - sp.gammaln(pr)[:, None]
            - sp.gammaln(qr)[:, None]
            + (pr[:, None] - 1.0) * logw[None, :]
            + (qr[:, None] - 1.0) * log1mw[None, :]
        )
        out[rows] = pi[rows] @ np.exp(logb)
    return out


def _density_grid(
    surface: AngularSurface, x_eval: np.ndarray, w_grid: np.ndarray
) -> np.ndarray:
    out = _density_grid_arrays(
        surface.sample.x, surface.sample.w, surface.params, x_eval, w_grid
    )
    if surface.params.weights == "ll" and np.any(out < 0.0):
        warnings.warn(
            "local-linear angular density dips below zero on the grid",
            NegativeDensityWarning,
            stacklevel=3,
        )
    return out


def _component_terms(
    xs: np.ndarray,
    ws: np.ndarray,
    params: TuningParams,
    x_pts: np.ndarray,
    w_pts: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Weights and componentwise log beta densities for paired evaluations.

    Row j holds the mixture pieces of h_{x_j} evaluated at w_j. Shape
    parameters are deduplicated through the moment correction, so samples
    with few distinct covariates (the stationary case) pay the log-gamma
    cost only once.
    """
    pi, theta = _theta_rows_arrays(xs, ws, params.b, params.weights, x_pts)
    nu, tau = params.nu, params.tau
    uniq, inverse = np.unique(theta, return_inverse=True)
    pu, qu = _shape_matrices(uniq, ws, nu, tau)
    if np.min(pu) <= 0.0 or np.min(qu) <= 0.0:
        raise FeasibilityError("nonpositive beta shape at a held-out covariate")
    lnorm_u = sp.gammaln(nu + 2.0 * tau) - sp.gammaln(pu) - sp.gammaln(qu)
    logw = np.log(w_pts)[:, None]
    log1mw = np.log1p(-w_pts)[:, None]
    logb = lnorm_u[inverse] + (pu[inverse] - 1.0) * logw + (qu[inverse] - 1.0) * log1mw
    return pi, logb


def _log_density_points(
    xs: np.ndarray,
    ws: np.ndarray,
    params: TuningParams,
    x_pts: np.ndarray,
    w_pts: np.ndarray,
) -> np.ndarray:
    """Pointwise log density log h_{x_j}(w_j), one value per (x_j, w_j) pair.

    The cross-validation hot path: log-space throughout for Nadaraya-Watson
    weights (mixture underflow maps to -inf, not NaN); local-linear
    mixtures are summed in linear space and nonpositive values map to -inf.
    """
    pi, logb = _component_terms(xs, ws, params, x_pts, w_pts)
    if params.weights == "nw":
        with np.errstate(divide="ignore"):
            return sp.logsumexp(np.log(pi) + logb, axis=1)
    dens = np.einsum("ij,ij->i", pi, np.exp(logb))
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(dens > 0.0, np.log(np.maximum(dens, 1e-320)), -np.inf)


def _density_points(
    xs: np.ndarray,
    ws: np.ndarray,
    params: TuningParams,
    x_pts: np.ndarray,
    w_pts: np.ndarray,
) -> np.ndarray:
    """Pointwise density h_{x_j}(w_j) on the linear scale.

    Unlike the log variant this keeps the sign, which least-squares
    cross-validation needs under local-linear weights.
    """
    pi, logb = _component_terms(xs, ws, params, x_pts, w_pts)
    return np.einsum("ij,ij->i", pi, np.exp(logb))


def _cdf_grid(
    surface: AngularSurface, x_eval: np.ndarray, w_grid: np.ndarray
) -> np.ndarray:
    """Distribution values on the product grid, same layout as _density_grid."""
    pi, theta = _theta_rows(surface, x_eval)
    p, q = _shape_matrices(theta, surface.sample.w, surface.params.nu, surface.params.tau)
    _check_feasible_rows(p, q, x_eval)
    out = np.empty((x_eval.size, w_grid.size))
    uniq, inverse = np.unique(theta, return_inverse=True)
    for u in range(uniq.size):
        rows = np.where(inverse == u)[0]
        pr, qr = p[rows[0]], q[rows[0]]
        cdf = sp.betainc(pr[:, None], qr[:, None], w_grid[None, :])
        out[rows] = pi[rows] @ cdf
    return out


def angular_density(w, x: float, surface: AngularSurface):
    """Estimated angular density at angles ``w`` for covariate ``x``.

    ``w`` may be a scalar or array strictly inside (0, 1). Local-linear
    surfaces can produce negative values, reported as computed with a
    NegativeDensityWarning.
    """
    arr = np.atleast_1d(np.asarray(w, dtype=float))
    if np.any(arr <= 0.0) or np.any(arr >= 1.0) or not np.all(np.isfinite(arr)):
        raise DomainError("angles must lie strictly inside (0, 1)")
    pts = _as_eval_points(x)
    if pts.size != 1:
        raise DomainError("x must be a single covariate value")
    out = _density_grid(surface, pts, arr)[0]
    return float(out[0]) if np.isscalar(w) or np.ndim(w) == 0 else out


def angular_cdf(w, x: float, surface: AngularSurface):
    """Estimated angular distribution function at ``w`` for covariate ``x``.

    ``w`` may be a scalar or array in [0, 1]; the endpoints give 0 and 1.
    """
    arr = np.atleast_1d(np.asarray(w, dtype=float))
    if np.any(arr < 0.0) or np.any(arr > 1.0) or not np.all(np.isfinite(arr)):
        raise DomainError("angles must lie in [0, 1]")
    pts = _as_eval_points(x)
    if pts.size != 1:
        raise DomainError("x must be a single covariate value")
    out = _cdf_grid(surface, pts, arr)[0]
    return float(out[0]) if np.isscalar(w) or np.ndim(w) == 0 else out


def default_angle_grid() -> np.ndarray:
    """Export grid for angular densities: 512 points on [1/1024, 1023/1024]."""
    return np.linspace(1.0 / 1024.0, 1023.0 / 1024.0, 512)


def surface_grid(
    surface: AngularSurface, x_grid, w_grid=None
) -> np.ndarray:
    """Density values on a covariate-by-angle grid.

    Parameters
    ----------
    surface : AngularSurface
        Fitted surface.
    x_grid : array_like
        Covariate evaluation points (nonempty, finite).
    w_grid : array_like, optional
        Angle grid strictly inside (0, 1); defaults to
        ``default_angle_grid()``.

    Returns
    -------
    ndarray
        Shape ``(len(x_grid), len(w_grid))``. Raises FeasibilityError
        listing the offending covariate values if any grid point is
        infeasible under the surface's tuning parameters.
    """
    x_eval = _as_eval_points(x_grid)
    if w_grid is None:
        w_grid = default_angle_grid()
    w_arr = np.atleast_1d(np.asarray(w_grid, dtype=float))
    if w_arr.size == 0:
        raise EmptySampleError("angle grid is empty")
    if np.any(w_arr <= 0.0) or np.any(w_arr >= 1.0) or not np.all(np.isfinite(w_arr)):
        raise DomainError("angle grid must lie strictly inside (0, 1)")
    return _density_grid(surface, x_eval, w_arr)


def grid_frame(x_grid, w_grid, values: np.ndarray) -> pd.DataFrame:
    """Long-format frame (columns x, w, h) of a surface grid."""
    x_eval = np.atleast_1d(np.asarray(x_grid, dtype=float))
    w_arr = np.atleast_1d(np.asarray(w_grid, dtype=float))
    values = np.asarray(values, dtype=float)
    if values.shape != (x_eval.size, w_arr.size):
        raise DomainError(
            f"grid shape {values.shape} does not match ({x_eval.size}, {w_arr.size})"
        )
    return pd.DataFrame(
        {
            "x": np.repeat(x_eval, w_arr.size),
            "w": np.tile(w_arr, x_eval.size),
            "h": values.ravel(),
        }
    )
