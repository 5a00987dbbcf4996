"""Financial-returns pipeline producing covariate-indexed pseudo-angles.

Stages: negative log-returns, zero-pair removal, GARCH(1,1) volatility
filtering with an ARCH-effect diagnostic, rank-based transform to standard
Frechet margins, pseudo-polar coordinates, spline quantile thresholding of
the radius, and exceedance extraction.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import interpolate, optimize, signal, special, stats

from .errors import DomainError, EmptySampleError, FitError
from .estimator import AngleSample

__all__ = [
    "ReturnSeries",
    "GarchFit",
    "PseudoPolar",
    "ThresholdCurve",
    "neg_log_returns",
    "drop_zero_pairs",
    "garch11_fit",
    "engle_arch_lm",
    "empirical_frechet",
    "pseudo_polar",
    "quantile_spline_threshold",
    "exceedance_angles",
]

INNOVATIONS = ("normal", "t")

_DF_FLOOR = 2.1


@dataclass(frozen=True)
class ReturnSeries:
    """Timestamped return values with a strictly increasing index."""

    timestamps: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        ts = np.asarray(self.timestamps)
        vals = np.asarray(self.values, dtype=float)
        if ts.ndim != 1 or vals.ndim != 1 or ts.size != vals.size:
            raise DomainError("timestamps and values must be aligned 1-d arrays")
        if vals.size and not np.all(np.isfinite(vals)):
            raise DomainError("return values must be finite")
        idx = pd.Index(ts)
        if vals.size > 1 and not (idx.is_monotonic_increasing and idx.is_unique):
            raise DomainError("timestamps must be strictly increasing")
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.size

    @classmethod
    def from_csv(cls, path) -> "ReturnSeries":
        frame = pd.read_csv(path)
        cols = set(frame.columns)
        if "date" not in cols:
            raise DomainError(f"series CSV {path} lacks a 'date' column")
        for name in ("return", "residual", "value"):
            if name in cols:
                return cls(frame["date"].to_numpy(), frame[name].to_numpy())
        raise DomainError(f"series CSV {path} lacks a return/residual/value column")

    def to_csv(self, path, column: str = "return") -> None:
        pd.DataFrame({"date": self.timestamps, column: self.values}).to_csv(path, index=False)


def neg_log_returns(prices, timestamps=None) -> ReturnSeries:
    """Negative log-returns of a positive price series (losses positive)."""
    p = np.asarray(prices, dtype=float)
    if p.size < 2:
        raise DomainError("need at least two prices")
    if np.any(p <= 0.0) or not np.all(np.isfinite(p)):
        raise DomainError("prices must be positive and finite")
    ts = np.arange(p.size) if timestamps is None else np.asarray(timestamps)
    if ts.size != p.size:
        raise DomainError("timestamps must align with prices")
    return ReturnSeries(ts[1:], -np.diff(np.log(p)))


def drop_zero_pairs(s1: ReturnSeries, s2: ReturnSeries) -> tuple[ReturnSeries, ReturnSeries]:
    """Align two return series on common dates and drop exact-zero days.

    A day is dropped when either return equals zero exactly (stale quote
    convention). Raises DomainError when the date indices are disjoint;
    warns when nothing survives.
    """
    a = pd.Series(s1.values, index=pd.Index(s1.timestamps))
    b = pd.Series(s2.values, index=pd.Index(s2.timestamps))
    common = a.index.intersection(b.index)
    if common.size == 0:
        raise DomainError("the two series share no timestamps")
    a, b = a.loc[common], b.loc[common]
    keep = (a.to_numpy() != 0.0) & (b.to_numpy() != 0.0)
    if not np.any(keep):
        warnings.warn("every common day has a zero return; result is empty", stacklevel=2)
    ts = common.to_numpy()[keep]
    return (
        ReturnSeries(ts, a.to_numpy()[keep]),
        ReturnSeries(ts, b.to_numpy()[keep]),
    )


@dataclass(frozen=True)
class GarchFit:
    """Fitted GARCH(1,1) filter with standardized residuals."""

    omega: float
    alpha: float
    beta: float
    innovation: str
    loglik: float
    residuals: np.ndarray
    sigma2: np.ndarray
    df: float = math.nan

    def __post_init__(self) -> None:
        if not (self.omega > 0.0):
            raise DomainError(f"omega must be positive, got {self.omega}")
        if self.alpha < 0.0 or self.beta < 0.0:
            raise DomainError("alpha and beta must be nonnegative")
        if self.alpha + self.beta >= 1.0:
            raise DomainError("alpha + beta must stay below 1")
        if self.innovation not in INNOVATIONS:
            raise DomainError(f"innovation must be one of {INNOVATIONS}")
        if self.innovation == "t" and not (self.df > 2.0):
            raise DomainError("Student-t innovations need df > 2")


def _sigma2_path(r: np.ndarray, omega: float, alpha: float, beta: float, s0: float) -> np.ndarray:
    drive = omega + alpha * r[:-1] ** 2
    rest, _ = signal.lfilter([1.0], [1.0, -beta], drive, zi=np.array([beta * s0]))
    return np.concatenate(([s0], rest))


def _garch_nll(u: np.ndarray, r: np.ndarray, s0: float, innovation: str) -> float:
    omega = math.exp(u[0])
    persistence = special.expit(u[1])
    split = special.expit(u[2])
    alpha = persistence * split
    beta = persistence * (1.0 - split)
    s = _sigma2_path(r, omega, alpha, beta, s0)
    if not np.all(np.isfinite(s)) or np.any(s <= 0.0):
        return math.inf
    z2 = r * r / s
    if innovation == "normal":
        nll = 0.5 * float(np.sum(np.log(2.0 * math.pi * s) + z2))
    else:
        df = _DF_FLOOR + math.exp(u[3])
        const = (
            special.gammaln((df + 1.0) / 2.0)
            - special.gammaln(df / 2.0)
            - 0.5 * math.log(math.pi * (df - 2.0))
        )
        nll = float(
            -r.size * const
            + 0.5 * np.sum(np.log(s))
            + (df + 1.0) / 2.0 * np.sum(np.log1p(z2 / (df - 2.0)))
        )
    return nll if math.isfinite(nll) else math.inf


def garch11_fit(series: ReturnSeries, innovation: str = "normal", min_length: int = 100) -> GarchFit:
    """Maximum-likelihood GARCH(1,1) fit with standardized residuals.

    The variance recursion starts at the sample variance; optimization is
    derivative-free in an unconstrained reparameterization that enforces
    omega > 0, alpha, beta >= 0, alpha + beta < 1 (and df > 2.1 for
    Student-t innovations).
    """
    if innovation not in INNOVATIONS:
        raise DomainError(f"innovation must be one of {INNOVATIONS}, got {innovation!r}")
    r = series.values
    if r.size < min_length:
        raise DomainError(f"series too short for GARCH fitting: {r.size} < {min_length}")
    s0 = float(np.var(r))
    if s0 <= 0.0:
        raise DomainError("constant series: variance is zero, nothing to filter")

    u0 = [math.log(0.05 * s0), special.logit(0.95), special.logit(0.05 / 0.95)]
    if innovation == "t":
        u0.append(math.log(8.0 - _DF_FLOOR))
    u0 = np.asarray(u0)

    result = None
    for _ in range(2):
        result = optimize.minimize(
            _garch_nll,
            u0,
            args=(r, s0, innovation),
            method="Nelder-Mead",
            options={"maxiter": 5000, "maxfev": 5000, "xatol": 1e-7, "fatol": 1e-9},
        )
        u0 = result.x
    if not result.success or not math.isfinite(result.fun):
        raise FitError(
            f"GARCH optimizer did not converge: {result.message} "
            f"(nfev={result.nfev}, last objective={result.fun:.6g})"
        )
    omega = math.exp(result.x[0])
    persistence = float(special.expit(result.x[1]))
    split = float(special.expit(result.x[2]))
    alpha, beta = persistence * split, persistence * (1.0 - split)
    s = _sigma2_path(r, omega, alpha, beta, s0)
    return GarchFit(
        omega=omega,
        alpha=alpha,
        beta=beta,
        innovation=innovation,
        loglik=-float(result.fun),
        residuals=r / np.sqrt(s),
        sigma2=s,
        df=_DF_FLOOR + math.exp(result.x[3]) if innovation == "t" else math.nan,
    )


def engle_arch_lm(series, lags: int = 12) -> tuple[float, float]:
    """Lagrange-multiplier test for ARCH effects: (statistic, p-value).

    Regresses the squared demeaned series on its own lags; the statistic
    is the regression sample size times R-squared, referred to a
    chi-squared distribution with ``lags`` degrees of freedom.
    """
    values = series.values if isinstance(series, ReturnSeries) else np.asarray(series, dtype=float)
    if lags < 1:
        raise DomainError(f"lags must be positive, got {lags}")
    if values.size <= lags + 1:
        raise DomainError(f"series of length {values.size} cannot support {lags} lags")
    e = values - values.mean()
    z = e * e
    y = z[lags:]
    design = np.column_stack(
        [np.ones(y.size)] + [z[lags - k : z.size - k] for k in range(1, lags + 1)]
    )
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot <= 0.0:
        raise DomainError("squared series is constant; the ARCH regression is degenerate")
    r2 = 1.0 - float(np.sum(resid * resid)) / ss_tot
    statistic = y.size * r2
    return float(statistic), float(stats.chi2.sf(statistic, lags))


def empirical_frechet(values) -> np.ndarray:
    """Rank-based transform to the standard Frechet scale.

    Average ranks divided by N + 1 give exceedance-free uniform scores;
    the output is -1/log of those, always positive and finite.
    """
    v = np.asarray(values, dtype=float)
    if v.size < 1:
        raise EmptySampleError("empty series has no ranks")
    if not np.all(np.isfinite(v)):
        raise DomainError("values must be finite")
    u = stats.rankdata(v, method="average") / (v.size + 1.0)
    return -1.0 / np.log(u)


@dataclass(frozen=True)
class PseudoPolar:
    """Pseudo-polar records (x, r, w): covariate, radius, angle."""

    x: np.ndarray
    r: np.ndarray
    w: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        r = np.asarray(self.r, dtype=float)
        w = np.asarray(self.w, dtype=float)
        if not (x.size == r.size == w.size) or x.ndim != 1:
            raise DomainError("x, r, w must be aligned 1-d arrays")
        if np.any(r <= 0.0) or not np.all(np.isfinite(r)):
            raise DomainError("radii must be positive and finite")
        if np.any(w <= 0.0) or np.any(w >= 1.0):
            raise DomainError("angles must lie strictly inside (0, 1)")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "w", w)

    @property
    def n(self) -> int:
        return self.x.size

    @classmethod
    def from_csv(cls, path) -> "PseudoPolar":
        frame = pd.read_csv(path)
        missing = {"x", "r", "w"} - set(frame.columns)
        if missing:
            raise DomainError(f"pseudo-polar CSV {path} lacks columns: {sorted(missing)}")
        return cls(frame["x"].to_numpy(), frame["r"].to_numpy(), frame["w"].to_numpy())

    def to_csv(self, path) -> None:
        pd.DataFrame({"x": self.x, "r": self.r, "w": self.w}).to_csv(path, index=False)


def pseudo_polar(y1, y2, x) -> PseudoPolar:
    """Pseudo-polar coordinates of a positive Frechet-scale pair."""
    a = np.asarray(y1, dtype=float)
    b = np.asarray(y2, dtype=float)
    xv = np.asarray(x, dtype=float)
    if not (a.size == b.size == xv.size):
        raise DomainError("y1, y2, x must be aligned")
    if np.any(a <= 0.0) or np.any(b <= 0.0) or not (
        np.all(np.isfinite(a)) and np.all(np.isfinite(b))
    ):
        raise DomainError("Frechet coordinates must be positive and finite")
    radius = a + b
    return PseudoPolar(x=xv, r=radius, w=a / radius)


@dataclass(frozen=True)
class ThresholdCurve:
    """Fitted spline quantile threshold, constant beyond the data range."""

    knots: np.ndarray
    coefficients: np.ndarray
    q: float
    coverage: float
    x_range: tuple[float, float]

    def __call__(self, x):
        arr = np.clip(np.asarray(x, dtype=float), self.x_range[0], self.x_range[1])
        out = interpolate.BSpline(self.knots, self.coefficients, 3)(arr)
        return float(out) if out.ndim == 0 else out

    @property
    def total_variation(self) -> float:
        """Total variation over the data range; a covariate-effect indicator."""
        grid = np.linspace(self.x_range[0], self.x_range[1], 512)
        return float(np.sum(np.abs(np.diff(self(grid)))))


def _pinball(u: np.ndarray, q: float) -> float:
    return float(np.sum(np.maximum(q * u, (q - 1.0) * u)))


def quantile_spline_threshold(
    x, r, q: float = 0.95, knots: int = 10, tol: float = 1e-8
) -> ThresholdCurve:
    """Cubic spline quantile-regression threshold for the radius.

    Minimizes the pinball loss of a cubic B-spline (interior knots at
    covariate quantiles) by a majorize-minimize loop on a smoothed loss,
    with the smoothing parameter annealed from 1e-2 down to 1e-6.
    """
    xv = np.asarray(x, dtype=float)
    rv = np.asarray(r, dtype=float)
    if xv.size != rv.size:
        raise DomainError("x and r must be aligned")
    if xv.size < 20:
        raise DomainError(f"need at least 20 observations, got {xv.size}")
    if not (0.0 < q < 1.0):
        raise DomainError(f"quantile level must lie in (0, 1), got {q}")
    if knots < 1:
        raise DomainError(f"need at least one interior knot, got {knots}")
    if not (np.all(np.isfinite(xv)) and np.all(np.isfinite(rv))):
        raise DomainError("inputs must be finite")
    lo, hi = float(xv.min()), float(xv.max())
    if lo == hi:
        raise DomainError("covariate has no spread; a threshold curve is undefined")
    interior = np.quantile(xv, (np.arange(knots) + 1.0) / (knots + 1.0))
    interior = np.unique(interior[(interior > lo) & (interior < hi)])
    t = np.concatenate(([lo] * 4, interior, [hi] * 4))
    nbasis = interior.size + 4
    if np.unique(xv).size < nbasis:
        raise DomainError(
            f"only {np.unique(xv).size} distinct covariate values for a "
            f"{nbasis}-function basis; reduce the knot count"
        )
    design = interpolate.BSpline.design_matrix(xv, t, 3).toarray()
    if np.linalg.matrix_rank(design) < nbasis:
        raise DomainError("spline basis is rank deficient; reduce the knot count")

    coef, *_ = np.linalg.lstsq(design, rv, rcond=None)
    obj = _pinball(rv - design @ coef, q)
    for delta in (1e-2, 1e-3, 1e-4, 1e-5, 1e-6):
        for _ in range(200):
            resid = rv - design @ coef
            wts = 1.0 / (2.0 * np.maximum(np.abs(resid), delta))
            gram = design.T @ (design * wts[:, None])
            rhs = design.T @ (wts * rv + (q - 0.5))
            try:
                coef_new = np.linalg.solve(gram, rhs)
            except np.linalg.LinAlgError as exc:
                raise DomainError(
                    "ill-conditioned quantile-spline system; reduce the knot count"
                ) from exc
            obj_new = _pinball(rv - design @ coef_new, q)
            done = abs(obj - obj_new) <= tol * max(1.0, abs(obj))
            coef, obj = coef_new, obj_new
            if done:
                break
    fitted = design @ coef
    return ThresholdCurve(
        knots=t,
        coefficients=coef,
        q=q,
        coverage=float(np.mean(rv <= fitted)),
        x_range=(lo, hi),
    )


def exceedance_angles(pp: PseudoPolar, threshold: ThresholdCurve) -> AngleSample:
    """Angles whose radius exceeds the threshold at their covariate."""
    keep = pp.r > threshold(pp.x)
    kept = int(keep.sum())
    if kept == 0:
        raise EmptySampleError(f"no radii exceed the threshold (0 of {pp.n})")
    return AngleSample(pp.x[keep], pp.w[keep], source=f"exceedances:{kept}/{pp.n}")
