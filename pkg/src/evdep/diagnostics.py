"""Empirical tail-dependence summaries: chi, chi-bar, and rolling windows.

Both coefficients are computed from within-sample ranks, so they are
invariant under strictly monotone marginal transforms. Confidence
intervals are delta-method normal intervals built on the log-probability
scale and mapped through the defining formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import stats

from .errors import DomainError, NumericError

__all__ = ["TailSummary", "chi_chibar", "rolling_chi"]

_MIN_WINDOW = 50
_Z95 = 1.959963984540054


def _clip_unit(value: float) -> float:
    return float(min(1.0, max(-1.0, value)))


@dataclass(frozen=True)
class TailSummary:
    """Tail-dependence coefficients at one quantile level.

    ``chi`` near 1 signals asymptotic dependence; ``chibar`` near 1 with
    ``chi`` near 0 signals asymptotic independence with association.
    """

    u: float
    chi: float
    chibar: float
    ci_chi: tuple[float, float]
    ci_chibar: tuple[float, float]
    n_window: int
    n_joint: int

    def __post_init__(self) -> None:
        if not (0.0 < self.u < 1.0):
            raise DomainError(f"quantile level must lie in (0, 1), got {self.u}")
        if self.n_window < _MIN_WINDOW:
            raise DomainError(f"window must hold at least {_MIN_WINDOW} observations")


def _log_prob_interval(p_hat: float, n: int) -> tuple[float, float]:
    # Delta-method normal interval for log p of a binomial proportion.
    se = math.sqrt((1.0 - p_hat) / (n * p_hat))
    center = math.log(p_hat)
    return center - _Z95 * se, center + _Z95 * se


def chi_chibar(u1, u2, u: float = 0.95) -> TailSummary:
    """Empirical chi and chi-bar of a dependent pair at level ``u``.

    Inputs are ranked internally (average ranks, divided by N + 1), so any
    marginal scale is accepted. Marginal probabilities enter the formulas
    as observed, which makes perfectly dependent series score exactly 1.
    """
    a = np.asarray(u1, dtype=float)
    b = np.asarray(u2, dtype=float)
    if a.ndim != 1 or a.shape != b.shape:
        raise DomainError("the two series must be aligned 1-d arrays")
    n = a.size
    if n < _MIN_WINDOW:
        raise DomainError(f"need at least {_MIN_WINDOW} observations, got {n}")
    if not (0.0 < u < 1.0):
        raise DomainError(f"quantile level must lie in (0, 1), got {u}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise DomainError("series must be finite")

    va = stats.rankdata(a, method="average") / (n + 1.0)
    vb = stats.rankdata(b, method="average") / (n + 1.0)
    below_a, below_b = va <= u, vb <= u
    k_a, k_b = int(below_a.sum()), int(below_b.sum())
    # Count-based marginals keep the log ratios exact for perfectly
    # dependent series (same float division as the joint fractions).
    p_lower = 0.5 * (k_a + k_b) / n
    p_upper = 0.5 * ((n - k_a) + (n - k_b)) / n
    n_copula = int(np.sum(below_a & below_b))
    n_joint = int(np.sum(~below_a & ~below_b))
    if n_joint == 0 or n_copula == 0:
        raise NumericError(
            f"zero joint exceedances at level {u} "
            f"(copula count {n_copula}, survivor count {n_joint} of {n})"
        )
    if p_lower >= 1.0 or p_lower <= 0.0:
        raise NumericError(f"level {u} leaves no marginal variation in {n} observations")

    c_hat = n_copula / n
    s_hat = n_joint / n
    chi = 2.0 - math.log(c_hat) / math.log(p_lower)
    chibar = 2.0 * math.log(p_upper) / math.log(s_hat) - 1.0

    lo_c, hi_c = _log_prob_interval(c_hat, n)
    lo_s, hi_s = _log_prob_interval(s_hat, n)
    # Map the log-probability intervals through the (monotone) formulas.
    ci_chi = tuple(
        sorted((2.0 - lo_c / math.log(p_lower), 2.0 - hi_c / math.log(p_lower)))
    )
    ci_chibar = tuple(
        sorted(
            (
                2.0 * math.log(p_upper) / lo_s - 1.0,
                2.0 * math.log(p_upper) / hi_s - 1.0,
            )
        )
    )

    return TailSummary(
        u=u,
        chi=_clip_unit(chi),
        chibar=_clip_unit(chibar),
        ci_chi=(_clip_unit(ci_chi[0]), _clip_unit(ci_chi[1])),
        ci_chibar=(_clip_unit(ci_chibar[0]), _clip_unit(ci_chibar[1])),
        n_window=n,
        n_joint=n_joint,
    )


def rolling_chi(
    u1,
    u2,
    window: int = 600,
    step: int = 1,
    u: float = 0.95,
    timestamps=None,
) -> pd.DataFrame:
    """Rolling-window chi and chi-bar trajectory.

    Ranks are recomputed inside every window. Windows whose joint
    exceedance count is zero produce NaN rows instead of aborting the
    trajectory. The ``t`` column holds the right edge of each window
    (the supplied timestamp, or the 0-based index of the last entry).
    """
    a = np.asarray(u1, dtype=float)
    b = np.asarray(u2, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise DomainError("the two series must be aligned 1-d arrays")
    n = a.size
    if window < _MIN_WINDOW:
        raise DomainError(f"window must hold at least {_MIN_WINDOW} observations")
    if window > n:
        raise DomainError(f"window {window} exceeds series length {n}")
    if step < 1:
        raise DomainError(f"step must be positive, got {step}")
    ts = np.arange(n) if timestamps is None else np.asarray(timestamps)
    if ts.size != n:
        raise DomainError("timestamps must align with the series")

    rows = []
    for start in range(0, n - window + 1, step):
        end = start + window
        try:
            summary = chi_chibar(a[start:end], b[start:end], u)
            rows.append(
                (
                    ts[end - 1],
                    summary.chi,
                    summary.ci_chi[0],
                    summary.ci_chi[1],
                    summary.chibar,
                    summary.ci_chibar[0],
                    summary.ci_chibar[1],
                )
            )
        except NumericError:
            rows.append((ts[end - 1],) + (math.nan,) * 6)
    return pd.DataFrame(
        rows,
        columns=["t", "chi", "chi_lo", "chi_hi", "chibar", "chibar_lo", "chibar_hi"],
    )
