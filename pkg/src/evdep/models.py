"""Exact conditional angular models: logistic and Dirichlet families.

These supply the simulation truth for accuracy studies and closed-form
oracles for the plug-in functionals. Parameters vary with a covariate
through link functions; densities are evaluated in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy import special as sp

from .errors import DegenerateDensityError, DomainError, EmptySampleError
from .estimator import AngleSample

__all__ = [
    "Link",
    "ConditionalModel",
    "LogisticForms",
    "logistic_density",
    "dirichlet_density",
    "model_density",
    "sample_angles",
    "covariate_grid_sampler",
    "logistic_closed_forms",
    "sample_bivariate_logistic",
    "standard_models",
]

LINK_KINDS = ("probit", "probit_square", "identity", "exp", "constant")

# Interior sampling grid: inverse-CDF inversion happens on this many nodes,
# clipped away from the endpoints where densities may be unbounded.
_SAMPLING_GRID_SIZE = 4096
_SAMPLING_CLIP = 1e-6
_DEGENERATE_MASS = 1e-12


@dataclass(frozen=True)
class Link:
    """Covariate-to-parameter map.

    ``kind`` is one of ``probit`` (standard normal CDF of x),
    ``probit_square`` (CDF of x squared), ``identity``, ``exp``, or
    ``constant`` (ignores x, returns ``value``).
    """

    kind: str
    value: float = math.nan

    def __post_init__(self) -> None:
        if self.kind not in LINK_KINDS:
            raise DomainError(f"link kind must be one of {LINK_KINDS}, got {self.kind!r}")
        if self.kind == "constant" and not math.isfinite(self.value):
            raise DomainError("constant link requires a finite value")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "probit":
            out = sp.ndtr(x)
        elif self.kind == "probit_square":
            out = sp.ndtr(x * x)
        elif self.kind == "identity":
            out = x
        elif self.kind == "exp":
            out = np.exp(x)
        else:
            out = np.full_like(x, self.value)
        return float(out) if out.ndim == 0 else out


def _logistic_logdensity(w: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """Log angular density of the logistic family; -inf where alpha = 1."""
    logw = np.log(w)
    log1mw = np.log1p(-w)
    with np.errstate(divide="ignore"):
        lead = np.log(1.0 / alpha - 1.0) - math.log(2.0)
    inner = np.logaddexp(-logw / alpha, -log1mw / alpha)
    return lead + (-1.0 - 1.0 / alpha) * (logw + log1mw) + (alpha - 2.0) * inner


def logistic_density(w, alpha: float):
    """Angular density of the logistic dependence model.

    Parameters
    ----------
    w : float or ndarray
        Angles strictly inside (0, 1).
    alpha : float
        Dependence parameter in (0, 1]; smaller means stronger dependence.
        ``alpha = 1`` is independence: the angular measure sits entirely on
        the vertices and the interior density is identically zero.
    """
    if not (0.0 < alpha <= 1.0):
        raise DomainError(f"logistic alpha must lie in (0, 1], got {alpha}")
    arr = np.asarray(w, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0) or not np.all(np.isfinite(arr)):
        raise DomainError("angles must lie strictly inside (0, 1)")
    if alpha == 1.0:
        out = np.zeros_like(arr)
    else:
        out = np.exp(_logistic_logdensity(arr, np.asarray(alpha)))
    return float(out) if out.ndim == 0 else out


def _dirichlet_logdensity(w: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    logw = np.log(w)
    log1mw = np.log1p(-w)
    return (
        np.log(a)
        + np.log(b)
        + sp.gammaln(a + b + 1.0)
        - sp.gammaln(a)
        - sp.gammaln(b)
        - math.log(2.0)
        + (a - 1.0) * (np.log(a) + logw)
        + (b - 1.0) * (np.log(b) + log1mw)
        - (a + b + 1.0) * np.log(a * w + b * (1.0 - w))
    )


def dirichlet_density(w, a: float, b: float):
    """Angular density of the Dirichlet dependence model; shapes a, b > 0."""
    if not (a > 0.0 and math.isfinite(a)):
        raise DomainError(f"dirichlet shape a must be positive, got {a}")
    if not (b > 0.0 and math.isfinite(b)):
        raise DomainError(f"dirichlet shape b must be positive, got {b}")
    arr = np.asarray(w, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0) or not np.all(np.isfinite(arr)):
        raise DomainError("angles must lie strictly inside (0, 1)")
    out = np.exp(_dirichlet_logdensity(arr, np.asarray(a, dtype=float), np.asarray(b, dtype=float)))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ConditionalModel:
    """Angular-density family with covariate-linked parameters.

    ``family`` is ``"logistic"`` (one link, parameter alpha) or
    ``"dirichlet"`` (two links, shapes a and b). ``domain`` is the closed
    covariate interval the links are valid on; validity is checked on a
    dense scan at construction.
    """

    family: str
    links: tuple[Link, ...]
    domain: tuple[float, float]
    name: str = ""

    def __post_init__(self) -> None:
        lo, hi = float(self.domain[0]), float(self.domain[1])
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
            raise DomainError(f"domain must be a nonempty finite interval, got {self.domain}")
        object.__setattr__(self, "domain", (lo, hi))
        object.__setattr__(self, "links", tuple(self.links))
        if self.family == "logistic":
            if len(self.links) != 1:
                raise DomainError("logistic family takes exactly one link (alpha)")
            alpha = self.links[0](np.linspace(lo, hi, 257))
            if np.any(alpha <= 0.0) or np.any(alpha > 1.0):
                raise DomainError("alpha link must map the domain into (0, 1]")
        elif self.family == "dirichlet":
            if len(self.links) != 2:
                raise DomainError("dirichlet family takes two links (a, b)")
            grid = np.linspace(lo, hi, 257)
            for label, link in zip("ab", self.links):
                vals = np.asarray(link(grid))
                if np.any(vals <= 0.0) or not np.all(np.isfinite(vals)):
                    raise DomainError(f"{label} link must map the domain into (0, inf)")
        else:
            raise DomainError(f"family must be 'logistic' or 'dirichlet', got {self.family!r}")

    def _check_domain(self, x) -> np.ndarray:
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        lo, hi = self.domain
        if np.any(arr < lo) or np.any(arr > hi) or not np.all(np.isfinite(arr)):
            raise DomainError(f"covariate outside model domain [{lo:g}, {hi:g}]")
        return arr

    def params_at(self, x) -> tuple:
        """Family parameters at covariate ``x`` (alpha, or (a, b))."""
        self._check_domain(x)
        return tuple(link(x) for link in self.links)

    def log_density_grid(self, x_values, w_grid) -> np.ndarray:
        """Log density on the product grid, shape (len(x_values), len(w_grid))."""
        xs = self._check_domain(x_values)
        w = np.atleast_1d(np.asarray(w_grid, dtype=float))
        if self.family == "logistic":
            alpha = np.asarray(self.links[0](xs))[:, None]
            out = np.where(
                alpha == 1.0, -np.inf, _logistic_logdensity(w[None, :], alpha)
            )
        else:
            a = np.asarray(self.links[0](xs))[:, None]
            b = np.asarray(self.links[1](xs))[:, None]
            out = _dirichlet_logdensity(w[None, :], a, b)
        return out

    def density_grid(self, x_values, w_grid) -> np.ndarray:
        return np.exp(self.log_density_grid(x_values, w_grid))

    def density(self, w, x: float):
        return model_density(w, x, self)


def model_density(w, x, model: ConditionalModel):
    """True angular density of ``model`` at angles ``w``, covariate ``x``."""
    arr = np.asarray(w, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0) or not np.all(np.isfinite(arr)):
        raise DomainError("angles must lie strictly inside (0, 1)")
    out = model.density_grid([x], np.atleast_1d(arr))[0]
    return float(out[0]) if arr.ndim == 0 else out


def sample_angles(model: ConditionalModel, x_values, seed=None) -> AngleSample:
    """Draw one angle per covariate value from the model's true density.

    Sampling inverts the numeric CDF: the density is tabulated on a
    4096-point grid clipped to [1e-6, 1 - 1e-6], integrated by cumulative
    trapezoid, renormalized, and inverted by monotone interpolation of one
    uniform draw per covariate.

    Raises DegenerateDensityError when the interior mass at some covariate
    is below 1e-12 (e.g. logistic alpha = 1, where the angular measure
    sits on the vertices).
    """
    rng = np.random.default_rng(seed)
    xs = model._check_domain(x_values)
    w_grid = np.linspace(_SAMPLING_CLIP, 1.0 - _SAMPLING_CLIP, _SAMPLING_GRID_SIZE)
    # Tabulate one CDF per distinct covariate; repeated covariates share it.
    uniq, inverse = np.unique(xs, return_inverse=True)
    dens = model.density_grid(uniq, w_grid)
    cdf = integrate.cumulative_trapezoid(dens, w_grid, axis=1, initial=0.0)
    total = cdf[:, -1]
    degenerate = total < _DEGENERATE_MASS
    if np.any(degenerate):
        j = int(np.argmax(degenerate))
        raise DegenerateDensityError(
            f"interior angular mass {total[j]:.3g} at x={uniq[j]:g} is below "
            f"{_DEGENERATE_MASS:g}; the angular measure is degenerate there"
        )
    u = rng.random(xs.size)
    w = np.empty(xs.size)
    for k in range(uniq.size):
        rows = np.where(inverse == k)[0]
        w[rows] = np.interp(u[rows] * total[k], cdf[k], w_grid)
    return AngleSample(xs, w, source=f"simulated:{model.family}")


def covariate_grid_sampler(domain, n: int, scheme: str = "equal", seed=None) -> np.ndarray:
    """Covariate design over an interval: equally spaced or uniform draws."""
    lo, hi = float(domain[0]), float(domain[1])
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
        raise DomainError(f"domain must be a nonempty finite interval, got {domain}")
    if n < 1:
        raise EmptySampleError("need at least one covariate point")
    if scheme == "equal":
        return np.linspace(lo, hi, n)
    if scheme == "uniform":
        return np.sort(np.random.default_rng(seed).uniform(lo, hi, n))
    raise DomainError(f"scheme must be 'equal' or 'uniform', got {scheme!r}")


@dataclass(frozen=True)
class LogisticForms:
    """Closed-form dependence functionals of the logistic model."""

    alpha: float
    extremal_coefficient: float

    def pickands(self, w):
        """Pickands dependence function A(w) on [0, 1]."""
        arr = np.asarray(w, dtype=float)
        if np.any(arr < 0.0) or np.any(arr > 1.0) or not np.all(np.isfinite(arr)):
            raise DomainError("w must lie in [0, 1]")
        if self.alpha == 1.0:
            out = np.ones_like(arr)
        else:
            with np.errstate(divide="ignore"):
                logw = np.log(arr)
                log1mw = np.log1p(-arr)
            out = np.exp(self.alpha * np.logaddexp(log1mw / self.alpha, logw / self.alpha))
        return float(out) if out.ndim == 0 else out

    def cdf(self, y1, y2):
        """Joint distribution function on standard Frechet margins."""
        a1 = np.asarray(y1, dtype=float)
        a2 = np.asarray(y2, dtype=float)
        if np.any(a1 <= 0.0) or np.any(a2 <= 0.0):
            raise DomainError("Frechet coordinates must be positive")
        expo = np.exp(
            self.alpha * np.logaddexp(-np.log(a1) / self.alpha, -np.log(a2) / self.alpha)
        )
        out = np.exp(-expo)
        return float(out) if out.ndim == 0 else out


def logistic_closed_forms(alpha: float) -> LogisticForms:
    """Exact A(w), C, and G(y1, y2) of the logistic model, for oracles."""
    if not (0.0 < alpha <= 1.0):
        raise DomainError(f"logistic alpha must lie in (0, 1], got {alpha}")
    return LogisticForms(alpha=alpha, extremal_coefficient=2.0**alpha)


def sample_bivariate_logistic(alpha, n: int | None = None, seed=None):
    """Draw pairs on standard Frechet margins with logistic dependence.

    ``alpha`` may be a scalar (with ``n`` draws) or an array of per-pair
    parameters. Uses the positive-stable mixture representation: given a
    stable variate S with Laplace transform exp(-t^alpha), components are
    conditionally independent with Y_j = (S / E_j)^alpha for unit
    exponentials E_j. ``alpha = 1`` yields independent pairs.
    """
    alpha_arr = np.atleast_1d(np.asarray(alpha, dtype=float))
    if np.any(alpha_arr <= 0.0) or np.any(alpha_arr > 1.0):
        raise DomainError("logistic alpha must lie in (0, 1]")
    if alpha_arr.size == 1 and n is not None:
        alpha_arr = np.full(int(n), float(alpha_arr[0]))
    elif n is not None and n != alpha_arr.size:
        raise DomainError("n conflicts with the length of the alpha array")
    m = alpha_arr.size
    rng = np.random.default_rng(seed)
    u = np.clip(rng.random(m), 1e-15, 1.0 - 1e-15)
    e0 = np.maximum(rng.exponential(size=m), 1e-300)
    e1 = np.maximum(rng.exponential(size=m), 1e-300)
    e2 = np.maximum(rng.exponential(size=m), 1e-300)
    log_s = np.zeros(m)
    dep = alpha_arr < 1.0
    if np.any(dep):
        a = alpha_arr[dep]
        ud = u[dep]
        log_a_u = (
            (a / (1.0 - a)) * np.log(np.sin(a * np.pi * ud))
            + np.log(np.sin((1.0 - a) * np.pi * ud))
            - (1.0 / (1.0 - a)) * np.log(np.sin(np.pi * ud))
        )
        log_s[dep] = ((1.0 - a) / a) * (log_a_u - np.log(e0[dep]))
    y1 = np.exp(alpha_arr * (log_s - np.log(e1)))
    y2 = np.exp(alpha_arr * (log_s - np.log(e2)))
    return y1, y2


def standard_models() -> dict[str, ConditionalModel]:
    """The study configurations, keyed by short family names.

    ``logistic``: alpha = Phi(x) on [Phi^-1(0.2), Phi^-1(0.4)] (alpha
    ranging over [0.2, 0.4]); ``logistic_square``: alpha = Phi(x^2) on
    [-3, 3]; ``sdir``: symmetric Dirichlet (x, x) on [0.8, 4]; ``adir``:
    asymmetric Dirichlet (x, 100) on [0.5, 2].
    """
    return {
        "logistic": ConditionalModel(
            family="logistic",
            links=(Link("probit"),),
            domain=(float(sp.ndtri(0.2)), float(sp.ndtri(0.4))),
            name="logistic",
        ),
        "logistic_square": ConditionalModel(
            family="logistic",
            links=(Link("probit_square"),),
            domain=(-3.0, 3.0),
            name="logistic_square",
        ),
        "sdir": ConditionalModel(
            family="dirichlet",
            links=(Link("identity"), Link("identity")),
            domain=(0.8, 4.0),
            name="sdir",
        ),
        "adir": ConditionalModel(
            family="dirichlet",
            links=(Link("identity"), Link("constant", 100.0)),
            domain=(0.5, 2.0),
            name="adir",
        ),
    }
