"""Cross-validated selection of the tuning parameters (b, nu, tau).

Folds are contiguous blocks in covariate order. The likelihood criterion
scores leave-block-out log density at held-out points; the least-squares
criterion scores the usual squared-error expansion. Feasibility of the
beta-mixture shapes is enforced through +inf sentinels so the optimizer
never steps outside the requested region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import partial

import numpy as np
from scipy import integrate, optimize

from .errors import (
    DomainError,
    ExtrapolationError,
    FeasibilityError,
    FitError,
    NumericError,
)
from .estimator import (
    WEIGHT_SCHEMES,
    AngleSample,
    TuningParams,
    _density_grid_arrays,
    _density_points,
    _log_density_points,
    _shape_matrices,
    _theta_rows_arrays,
    default_angle_grid,
)

__all__ = [
    "CvConfig",
    "TuningResult",
    "covariate_blocks",
    "mlcv_objective",
    "lscv_objective",
    "feasible",
    "select_tuning",
    "select_tuning_escalating",
]

CRITERIA = ("mlcv", "lscv")
REGIONS = ("none", "rn", "rxn")

# Coarse multistart grid in units of a reference bandwidth scale (for b)
# and absolute values (for nu, tau).
_B_FACTORS = (0.3, 1.0, 3.0, 10.0)
_NU_GRID = (4.0, 16.0, 64.0, 256.0)
_TAU_GRID = (0.0, 1.0, 4.0)


@dataclass(frozen=True)
class CvConfig:
    """Cross-validation settings.

    ``region`` gates the objective: ``"none"`` trusts the held-out
    evaluations alone, ``"rn"`` additionally requires feasibility at all
    observed covariates, ``"rxn"`` requires it on ``x_grid`` (a covariate
    grid standing in for the full evaluation interval). ``init`` warm
    starts the optimizer (used by bootstrap re-tuning).
    """

    k: int = 10
    criterion: str = "mlcv"
    region: str = "rn"
    budget: int = 300
    multistart: int = 4
    weights: str = "nw"
    x_grid: tuple | None = None
    init: TuningParams | None = None

    def __post_init__(self) -> None:
        if self.k < 2:
            raise DomainError(f"need at least 2 folds, got k={self.k}")
        if self.criterion not in CRITERIA:
            raise DomainError(f"criterion must be one of {CRITERIA}, got {self.criterion!r}")
        if self.region not in REGIONS:
            raise DomainError(f"region must be one of {REGIONS}, got {self.region!r}")
        if self.budget < 1:
            raise DomainError(f"optimizer budget must be positive, got {self.budget}")
        if self.multistart < 1:
            raise DomainError(f"multistart must be positive, got {self.multistart}")
        if self.weights not in WEIGHT_SCHEMES:
            raise DomainError(f"weights must be one of {WEIGHT_SCHEMES}, got {self.weights!r}")
        if self.x_grid is not None:
            object.__setattr__(self, "x_grid", tuple(float(v) for v in self.x_grid))


@dataclass(frozen=True)
class TuningResult:
    """Selected parameters with the objective value and evaluation trace."""

    params: TuningParams
    objective: float
    n_evaluations: int
    criterion: str
    region: str
    trace: tuple = field(repr=False, default=())


def covariate_blocks(sample: AngleSample, k: int) -> list[np.ndarray]:
    """Indices of K contiguous covariate-ordered blocks, sizes within 1.

    The sample is sorted by covariate (stable, so ties keep input order)
    and split; earlier blocks absorb the remainder.
    """
    n = sample.n
    if k < 2 or k > n:
        raise DomainError(f"fold count must satisfy 2 <= K <= n, got K={k}, n={n}")
    order = np.argsort(sample.x, kind="stable")
    base, rem = divmod(n, k)
    sizes = [base + 1 if i < rem else base for i in range(k)]
    bounds = np.cumsum([0] + sizes)
    return [order[bounds[i] : bounds[i + 1]] for i in range(k)]


def _leave_block_out(sample: AngleSample, folds, evaluate) -> float:
    """Sum evaluate(train arrays, held-out arrays) over folds; inf on failure."""
    xs, ws = sample.x, sample.w
    mask = np.ones(sample.n, dtype=bool)
    total = 0.0
    for idx in folds:
        mask[idx] = False
        try:
            part = evaluate(xs[mask], ws[mask], xs[idx], ws[idx])
        except (FeasibilityError, ExtrapolationError, NumericError):
            return math.inf
        finally:
            mask[idx] = True
        if not math.isfinite(part):
            return math.inf
        total += part
    return total


def mlcv_objective(
    params: TuningParams,
    sample: AngleSample,
    folds,
    region: str = "rn",
    x_grid=None,
) -> float:
    """Negative leave-block-out log likelihood; +inf when infeasible.

    Finite exactly when the parameters pass the region gate and every
    held-out density is strictly positive and representable.
    """
    if region != "none" and not feasible(params, sample, region, x_grid):
        return math.inf

    def eval_fold(tx, tw, ex, ew):
        ll = _log_density_points(tx, tw, params, ex, ew)
        return -float(ll.sum())

    return _leave_block_out(sample, folds, eval_fold)


def lscv_objective(
    params: TuningParams,
    sample: AngleSample,
    folds,
    region: str = "rn",
    x_grid=None,
    w_grid: np.ndarray | None = None,
) -> float:
    """Least-squares cross-validation score; +inf when infeasible.

    Per held-out point: integral of the squared leave-block-out density
    (trapezoid on the standard angle grid) minus twice the density at the
    held-out angle.
    """
    if region != "none" and not feasible(params, sample, region, x_grid):
        return math.inf
    grid = default_angle_grid() if w_grid is None else np.asarray(w_grid, dtype=float)

    def eval_fold(tx, tw, ex, ew):
        dens_at = _density_points(tx, tw, params, ex, ew)
        dens_grid = _density_grid_arrays(tx, tw, params, ex, grid)
        integrals = integrate.trapezoid(dens_grid * dens_grid, grid, axis=1)
        return float(integrals.sum() - 2.0 * dens_at.sum())

    return _leave_block_out(sample, folds, eval_fold)


def feasible(params: TuningParams, sample: AngleSample, region: str, x_grid=None) -> bool:
    """Whether the beta-mixture shapes stay positive over the region.

    ``"rn"`` checks all observed covariates; ``"rxn"`` checks the supplied
    covariate grid; ``"none"`` is vacuously true.
    """
    if region == "none":
        return True
    if region == "rn":
        grid = sample.x
    elif region == "rxn":
        if x_grid is None:
            raise DomainError("region 'rxn' requires an explicit covariate grid")
        grid = np.asarray(x_grid, dtype=float)
    else:
        raise DomainError(f"region must be one of {REGIONS}, got {region!r}")
    try:
        _, theta = _theta_rows_arrays(sample.x, sample.w, params.b, params.weights, grid)
    except (ExtrapolationError, NumericError):
        return False
    p, q = _shape_matrices(np.unique(theta), sample.w, params.nu, params.tau)
    return bool(np.min(p) > 0.0 and np.min(q) > 0.0)


def _params_from_z(z, weights: str) -> TuningParams:
    return TuningParams(
        b=math.exp(z[0]),
        nu=math.exp(z[1]),
        tau=max(math.expm1(z[2]), 0.0),
        weights=weights,
    )


def _z_from_params(params: TuningParams) -> np.ndarray:
    return np.array([math.log(params.b), math.log(params.nu), math.log1p(params.tau)])


def _start_grid(sample: AngleSample) -> list[tuple[float, float, float]]:
    scale = float(np.std(sample.x))
    if scale == 0.0:
        scale = max(abs(float(sample.x[0])), 1.0)
    b_ref = scale * sample.n ** (-0.2)
    return [
        (b_ref * fb, nu, tau)
        for fb in _B_FACTORS
        for nu in _NU_GRID
        for tau in _TAU_GRID
    ]


def select_tuning(sample: AngleSample, config: CvConfig) -> TuningResult:
    """Pick (b, nu, tau) minimizing the cross-validation criterion.

    Evaluates a coarse multistart grid, then runs Nelder-Mead in
    (log b, log nu, log(1+tau)) from the best starts, all within the
    evaluation budget. Deterministic given the sample and config.

    Raises FitError when no feasible point is found within the budget.
    """
    if config.region == "rxn" and config.x_grid is None:
        raise DomainError("region 'rxn' requires x_grid in the configuration")
    folds = covariate_blocks(sample, config.k)
    score = mlcv_objective if config.criterion == "mlcv" else lscv_objective
    objective = partial(
        score, sample=sample, folds=folds, region=config.region, x_grid=config.x_grid
    )

    trace: list[tuple[float, float, float, float]] = []

    def evaluate(z) -> float:
        try:
            params = _params_from_z(z, config.weights)
        except (DomainError, OverflowError):
            return math.inf
        value = objective(params)
        if not math.isfinite(value):
            value = math.inf
        trace.append((params.b, params.nu, params.tau, value))
        return value

    candidates = []
    if config.init is not None:
        candidates.append((config.init.b, config.init.nu, config.init.tau))
    grid_included = config.init is None or config.multistart > 1
    if grid_included:
        candidates.extend(_start_grid(sample))
    candidates = candidates[: config.budget]
    scored = []
    for cand in candidates:
        z = np.array([math.log(cand[0]), math.log(cand[1]), math.log1p(cand[2])])
        scored.append((evaluate(z), len(scored), z))

    if not grid_included and not any(math.isfinite(s[0]) for s in scored):
        # The warm start missed the feasible region; fall back to the grid.
        for cand in _start_grid(sample)[: max(0, config.budget - len(trace))]:
            z = np.array([math.log(cand[0]), math.log(cand[1]), math.log1p(cand[2])])
            scored.append((evaluate(z), len(scored), z))

    finite = sorted((s for s in scored if math.isfinite(s[0])), key=lambda s: (s[0], s[1]))
    starts = [z for _, _, z in finite[: config.multistart]]
    if not starts:
        tried = ", ".join(
            f"(b={b:.3g}, nu={nu:.3g}, tau={tau:.3g})" for b, nu, tau, _ in trace[:5]
        )
        raise FitError(
            f"no feasible tuning parameters among {len(trace)} candidates under "
            f"region {config.region!r}; best-scored attempts: {tried}. "
            "Consider a larger tau, a wider budget, or a weaker region."
        )

    remaining = config.budget - len(trace)
    per_start = remaining // len(starts) if starts else 0
    if per_start >= 4:
        for z0 in starts:
            optimize.minimize(
                evaluate,
                z0,
                method="Nelder-Mead",
                options={"maxfev": per_start, "xatol": 1e-3, "fatol": 1e-8, "disp": False},
            )

    best = min(
        (t for t in trace if math.isfinite(t[3])),
        key=lambda t: t[3],
    )
    return TuningResult(
        params=TuningParams(b=best[0], nu=best[1], tau=best[2], weights=config.weights),
        objective=best[3],
        n_evaluations=len(trace),
        criterion=config.criterion,
        region=config.region,
        trace=tuple(trace),
    )


def select_tuning_escalating(sample: AngleSample, config: CvConfig) -> TuningResult:
    """Region escalation: try weaker gates first, accept when the target holds.

    Runs the selection with region ``"none"`` first; if the winner already
    satisfies the target region of ``config`` it is returned as-is,
    otherwise the search is re-run with progressively stricter gates up to
    the target. The returned parameters always pass the region check of
    the stage that produced them.
    """
    order = REGIONS[: REGIONS.index(config.region) + 1]
    result = None
    for region in order:
        result = select_tuning(sample, replace(config, region=region))
        if feasible(result.params, sample, config.region, config.x_grid):
            return result
    return result
