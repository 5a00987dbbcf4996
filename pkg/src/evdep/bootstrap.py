"""Smoothed bootstrap for angular surfaces and band-depth central regions.

Resamples are drawn from the fitted estimate itself: a kernel-smoothed
covariate paired with an exact draw from the estimated beta mixture at
that covariate. Each replicate is re-tuned (warm-started, reduced budget)
and the resulting ensembles are summarized by modified-band-depth central
regions.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd

from .errors import DomainError, EmptySampleError, FeasibilityError, FitError
from .estimator import (
    AngleSample,
    AngularSurface,
    TuningParams,
    _shape_matrices,
    _theta_rows_arrays,
)
from .tuning import CvConfig, select_tuning

__all__ = [
    "BootstrapEnsemble",
    "CentralRegion",
    "smoothed_resample",
    "bootstrap_surfaces",
    "central_region",
    "modified_band_depth",
    "central_region_frame",
]

_MAX_REDRAWS = 100

# Resampled angles are kept strictly interior; beta draws with small
# shapes can underflow to exactly 0 or 1.
_ANGLE_CLIP = 1e-15


@dataclass(frozen=True)
class BootstrapEnsemble:
    """Successful bootstrap replicates plus the count of excluded failures."""

    surfaces: tuple[AngularSurface, ...]
    resamples: tuple[AngleSample, ...]
    params: tuple[TuningParams, ...]
    seed: int
    n_failed: int = 0

    def __post_init__(self) -> None:
        if not (len(self.surfaces) == len(self.resamples) == len(self.params)):
            raise DomainError("ensemble lists must have equal length")
        if len(self.surfaces) < 1:
            raise EmptySampleError("ensemble holds no successful replicates")

    @property
    def n_replicates(self) -> int:
        return len(self.surfaces)


@dataclass(frozen=True)
class CentralRegion:
    """Pointwise envelope of the deepest fraction of an ensemble of curves."""

    level: float
    lower: np.ndarray
    upper: np.ndarray
    median_curve: np.ndarray
    depths: np.ndarray = field(repr=False, default=None)

    def __post_init__(self) -> None:
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        median = np.asarray(self.median_curve, dtype=float)
        if np.any(lower > median) or np.any(median > upper):
            raise DomainError("central region must satisfy lower <= median <= upper")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "median_curve", median)


def smoothed_resample(sample: AngleSample, fitted: TuningParams, seed=None) -> AngleSample:
    """One smoothed-bootstrap resample of size n from the fitted surface.

    Each record: pick an observation index uniformly, perturb its covariate
    with the fitted kernel (normal, sd b), then draw the angle exactly from
    the estimated mixture there (component index with the kernel-weight
    probabilities, then that component's beta). Drawn covariates where the
    mixture is infeasible are rejected and redrawn, up to 100 rounds.
    """
    if fitted.weights != "nw":
        raise DomainError(
            "smoothed resampling requires nonnegative mixture weights; "
            "refit with the nw scheme"
        )
    rng = np.random.default_rng(seed)
    xs, ws = sample.x, sample.w
    n = sample.n
    new_x = np.empty(n)
    pi_rows = np.empty((n, n))
    theta = np.empty(n)
    pending = np.arange(n)
    for _ in range(_MAX_REDRAWS):
        draws = xs[rng.integers(0, n, size=pending.size)]
        cand = draws + fitted.b * rng.standard_normal(pending.size)
        pi_c, theta_c = _theta_rows_arrays(xs, ws, fitted.b, "nw", cand)
        p_c, q_c = _shape_matrices(theta_c, ws, fitted.nu, fitted.tau)
        ok = (p_c.min(axis=1) > 0.0) & (q_c.min(axis=1) > 0.0)
        good = pending[ok]
        new_x[good] = cand[ok]
        pi_rows[good] = pi_c[ok]
        theta[good] = theta_c[ok]
        pending = pending[~ok]
        if pending.size == 0:
            break
    else:
        raise FeasibilityError(
            f"{pending.size} resampled covariates stayed infeasible after "
            f"{_MAX_REDRAWS} redraw rounds; the fitted parameters are too "
            "tight for smoothed resampling"
        )
    cum = np.cumsum(pi_rows, axis=1)
    u = rng.random(n) * cum[:, -1]
    comp = np.minimum((cum < u[:, None]).sum(axis=1), n - 1)
    p_sel = fitted.nu * ws[comp] * theta + fitted.tau
    q_sel = fitted.nu * (1.0 - ws[comp] * theta) + fitted.tau
    new_w = np.clip(rng.beta(p_sel, q_sel), _ANGLE_CLIP, 1.0 - _ANGLE_CLIP)
    return AngleSample(new_x, new_w, source=f"bootstrap:{sample.source}")


def bootstrap_surfaces(
    sample: AngleSample,
    fitted: TuningParams,
    B: int,
    cv_config: CvConfig,
    seed: int = 0,
    reduced_budget: bool = True,
    n_jobs: int = 1,
) -> BootstrapEnsemble:
    """Resample, re-tune, and refit B times.

    Replicate r is fully determined by (seed, r). With ``reduced_budget``
    (the default) re-tuning warm starts at the original fit and spends 25%
    of the configured budget on a single optimizer run; otherwise the full
    configuration is used. Replicates whose re-tuning fails are excluded
    and counted in ``n_failed``.
    """
    if B < 1:
        raise DomainError(f"need at least one replicate, got B={B}")
    if reduced_budget:
        cfg = replace(
            cv_config,
            init=fitted,
            multistart=1,
            budget=max(1, cv_config.budget // 4),
        )
    else:
        cfg = replace(cv_config, init=fitted)

    def one(r: int):
        resample = smoothed_resample(sample, fitted, seed=[seed, r])
        try:
            result = select_tuning(resample, cfg)
        except FitError:
            return None
        return resample, result.params

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            outcomes = list(pool.map(one, range(B)))
    else:
        outcomes = [one(r) for r in range(B)]

    resamples, params, surfaces = [], [], []
    n_failed = 0
    for out in outcomes:
        if out is None:
            n_failed += 1
            continue
        resample, pars = out
        resamples.append(resample)
        params.append(pars)
        surfaces.append(AngularSurface(resample, pars))
    if not surfaces:
        raise FitError(f"all {B} bootstrap replicates failed re-tuning")
    return BootstrapEnsemble(
        surfaces=tuple(surfaces),
        resamples=tuple(resamples),
        params=tuple(params),
        seed=int(seed),
        n_failed=n_failed,
    )


def modified_band_depth(curves: np.ndarray) -> np.ndarray:
    """Modified band depth (order-2 bands) of each curve in an ensemble.

    ``curves`` has one row per curve over a common grid. The depth of a
    curve is the average over grid points of the fraction of curve pairs
    whose pointwise band contains it, with ties counting as inside; a set
    of identical curves all reach depth 1.
    """
    y = np.asarray(curves, dtype=float)
    if y.ndim != 2 or y.shape[0] < 2:
        raise DomainError("band depth needs at least 2 curves on a common grid")
    b = y.shape[0]
    below = np.sum(y[None, :, :] < y[:, None, :], axis=1)
    above = np.sum(y[None, :, :] > y[:, None, :], axis=1)
    total = b * (b - 1) // 2
    inside = total - below * (below - 1) // 2 - above * (above - 1) // 2
    return inside.mean(axis=1) / total


def central_region(curves, level: float) -> CentralRegion:
    """Envelope of the deepest ``level`` fraction of curves.

    The curves are ranked by modified band depth; the region is the
    pointwise min/max of the ceil(level * B) deepest, and the median curve
    is the deepest overall (ties broken by input order).
    """
    y = np.asarray(curves, dtype=float)
    if y.ndim != 2 or y.shape[0] < 2:
        raise DomainError("central region needs at least 2 curves on a common grid")
    if not (0.0 < level < 1.0):
        raise DomainError(f"level must lie in (0, 1), got {level}")
    depths = modified_band_depth(y)
    order = np.argsort(-depths, kind="stable")
    keep = order[: math.ceil(level * y.shape[0])]
    selected = y[keep]
    return CentralRegion(
        level=float(level),
        lower=selected.min(axis=0),
        upper=selected.max(axis=0),
        median_curve=y[order[0]],
        depths=depths,
    )


def central_region_frame(grid, regions, x=None, w=None) -> pd.DataFrame:
    """Long-format frame of central regions: columns x,w,level,lower,median,upper.

    ``grid`` is the common curve grid. Exactly one of ``x``/``w`` names the
    varying axis: pass ``x=value`` for angle cross-sections at a fixed
    covariate (grid fills the w column) or ``w=value`` likewise; leaving
    both None treats the grid as covariate values (trajectory curves) and
    leaves w empty.
    """
    grid = np.asarray(grid, dtype=float)
    frames = []
    for region in regions:
        if region.lower.size != grid.size:
            raise DomainError("region grid length mismatch")
        if x is not None:
            xcol = np.full(grid.size, float(x))
            wcol = grid
        else:
            xcol = grid
            wcol = np.full(grid.size, math.nan if w is None else float(w))
        frames.append(
            pd.DataFrame(
                {
                    "x": xcol,
                    "w": wcol,
                    "level": region.level,
                    "lower": region.lower,
                    "median": region.median_curve,
                    "upper": region.upper,
                }
            )
        )
    return pd.concat(frames, ignore_index=True)
