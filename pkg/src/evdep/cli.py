"""Batch command-line front end for the dependence-estimation pipeline.

Subcommands cover the full chain: ``returns``, ``garch``, ``frechet``,
``angles``, ``chi``, ``cv``, ``fit``, ``functionals``, ``boot``,
``simulate``, ``miae``. Every command writes its artifacts plus a
``<command>_manifest.json`` recording the command, resolved options, seed,
library versions, artifact names, and size counts, so each artifact is
reproducible from its manifest alone. Inputs are never modified.

Options resolve in order: command-line flag, then the JSON file given via
``--config`` (top-level ``seed``/``out``/``threads`` plus one section per
command), then the built-in default.

Exit codes: 0 success, 2 usage or config-schema error, 3 missing input
file, 4 domain or feasibility error, 5 numeric or fitting failure,
6 empty sample or degenerate density.
"""

from __future__ import annotations

import dataclasses
import functools
import json
import os
import sys
from importlib import metadata
from pathlib import Path

import click
import numpy as np
import pandas as pd
from click.core import ParameterSource

from . import __version__
from .bootstrap import bootstrap_surfaces, central_region, central_region_frame
from .diagnostics import chi_chibar, rolling_chi
from .errors import (
    DegenerateDensityError,
    DomainError,
    EmptySampleError,
    FeasibilityError,
    FitError,
    NumericError,
)
from .estimator import (
    AngleSample,
    AngularSurface,
    TuningParams,
    default_angle_grid,
    grid_frame,
    surface_grid,
)
from .evaluation import miae_study
from .functionals import extremal_coefficient_curve, pickands, trajectory_frame
from .models import covariate_grid_sampler, sample_angles, standard_models
from .preprocess import (
    PseudoPolar,
    ReturnSeries,
    drop_zero_pairs,
    empirical_frechet,
    engle_arch_lm,
    exceedance_angles,
    garch11_fit,
    neg_log_returns,
    pseudo_polar,
    quantile_spline_threshold,
)
from .tuning import CvConfig, select_tuning

__all__ = ["main"]

DEFAULT_SEED = 20140101

EXIT_MISSING = 3
EXIT_DOMAIN = 4
EXIT_NUMERIC = 5
EXIT_EMPTY = 6

_GLOBAL_KEYS = {"seed", "out", "threads"}


def _fail(message: str, code: int) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (EmptySampleError, DegenerateDensityError) as exc:
            _fail(str(exc), EXIT_EMPTY)
        except (DomainError, FeasibilityError) as exc:
            _fail(str(exc), EXIT_DOMAIN)
        except (NumericError, FitError) as exc:
            _fail(str(exc), EXIT_NUMERIC)
        except FileNotFoundError as exc:
            _fail(f"missing input file: {exc}", EXIT_MISSING)
        except pd.errors.EmptyDataError as exc:
            _fail(f"empty input file: {exc}", EXIT_EMPTY)

    return wrapper


def _require_file(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(path)
    return p


def _versions() -> dict:
    libs = {}
    for name in ("numpy", "scipy", "pandas", "click"):
        try:
            libs[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            libs[name] = "unknown"
    return {
        "evdep": __version__,
        "python": ".".join(str(v) for v in sys.version_info[:3]),
        **libs,
    }


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (tuple, list)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, Path):
        return str(value)
    return value


def _write_manifest(outdir: Path, command: str, options: dict, artifacts: list, counts: dict, seed) -> Path:
    manifest = {
        "command": command,
        "options": _jsonable(options),
        "seed": seed,
        "versions": _versions(),
        "artifacts": [str(a) for a in artifacts],
        "counts": _jsonable(counts),
    }
    path = outdir / f"{command}_manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _outdir(ctx) -> Path:
    out = Path(ctx.obj["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _resolve(ctx, command: str, **values) -> dict:
    """Merge flag values with the config-file section for this command."""
    section = ctx.obj["config"].get(command, {})
    if not isinstance(section, dict):
        raise click.UsageError(f"config section {command!r} must be an object")
    unknown = set(section) - set(values)
    if unknown:
        raise click.UsageError(
            f"config section {command!r} has unknown keys: {sorted(unknown)}"
        )
    current = click.get_current_context()
    resolved = {}
    for name, value in values.items():
        if current.get_parameter_source(name) == ParameterSource.COMMANDLINE:
            resolved[name] = value
        elif name in section:
            resolved[name] = section[name]
        else:
            resolved[name] = value
    return resolved


def _effective_seed(ctx, command_seed) -> int:
    return int(ctx.obj["seed"] if command_seed is None else command_seed)


def _effective_threads(ctx) -> int:
    threads = ctx.obj["threads"]
    return int(threads) if threads else (os.cpu_count() or 1)


def _parse_floats(text: str, flag: str) -> tuple:
    try:
        values = tuple(float(part) for part in str(text).split(","))
    except ValueError as exc:
        raise click.UsageError(f"{flag} expects comma-separated numbers, got {text!r}") from exc
    if not values:
        raise click.UsageError(f"{flag} is empty")
    return values


def _load_params(params_file, b, nu, tau, weights) -> TuningParams:
    if params_file is not None:
        payload = json.loads(_require_file(params_file).read_text())
        return TuningParams(
            b=float(payload["b"]),
            nu=float(payload["nu"]),
            tau=float(payload["tau"]),
            weights=str(payload.get("weights", weights)),
        )
    if b is None or nu is None:
        raise click.UsageError("provide --params-file or all of --b/--nu/--tau")
    return TuningParams(b=float(b), nu=float(nu), tau=float(tau), weights=weights)


def _x_grid(sample: AngleSample, n: int) -> np.ndarray:
    lo, hi = float(sample.x.min()), float(sample.x.max())
    if lo == hi:
        return np.array([lo])
    return np.linspace(lo, hi, n)


def _w_grid(n: int) -> np.ndarray:
    if n == 512:
        return default_angle_grid()
    return np.linspace(1.0 / 1024.0, 1023.0 / 1024.0, n)


def _read_series(path: str) -> ReturnSeries:
    return ReturnSeries.from_csv(_require_file(path))


def _join_pair(s1: ReturnSeries, s2: ReturnSeries):
    a = pd.Series(s1.values, index=pd.Index(s1.timestamps))
    b = pd.Series(s2.values, index=pd.Index(s2.timestamps))
    common = a.index.intersection(b.index)
    if common.size == 0:
        raise DomainError("the two series share no timestamps")
    return common.to_numpy(), a.loc[common].to_numpy(), b.loc[common].to_numpy()


@click.group(name="evdep")
@click.version_option(__version__)
@click.option("--config", "config_path", type=str, default=None, help="JSON config file.")
@click.option("--out", type=str, default=".", help="Output directory.", show_default=True)
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True, help="Default RNG seed.")
@click.option("--threads", type=int, default=None, help="Worker threads (default: all cores).")
@click.pass_context
def main(ctx, config_path, out, seed, threads):
    """Covariate-indexed bivariate extreme-value dependence toolkit."""
    config = {}
    if config_path is not None:
        try:
            config = json.loads(_require_file(config_path).read_text())
        except FileNotFoundError:
            _fail(f"missing config file: {config_path}", EXIT_MISSING)
        except json.JSONDecodeError as exc:
            raise click.UsageError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise click.UsageError("config root must be a JSON object")
    known = _GLOBAL_KEYS | {cmd.replace("-", "_") for cmd in main.commands}
    unknown = set(config) - known
    if unknown:
        raise click.UsageError(f"config has unknown top-level keys: {sorted(unknown)}")

    def pick(name, flag_value):
        src = ctx.get_parameter_source(name)
        if src == ParameterSource.COMMANDLINE:
            return flag_value
        return config.get(name, flag_value)

    ctx.ensure_object(dict)
    ctx.obj["config"] = config
    ctx.obj["out"] = pick("out", out)
    ctx.obj["seed"] = int(pick("seed", seed))
    ctx.obj["threads"] = pick("threads", threads)


@main.command()
@click.argument("prices", nargs=-1, required=True)
@click.pass_context
@_guarded
def returns(ctx, prices):
    """Negative log-returns from price CSVs (columns date,price).

    With exactly two inputs the series are aligned on common dates and
    days where either return is exactly zero are dropped from both.
    """
    outdir = _outdir(ctx)
    series = []
    for path in prices:
        frame = pd.read_csv(_require_file(path))
        if "date" not in frame.columns or "price" not in frame.columns:
            raise DomainError(f"price CSV {path} needs columns date,price")
        series.append(neg_log_returns(frame["price"].to_numpy(), frame["date"].to_numpy()))
    counts = {"n_raw": [s.n for s in series]}
    if len(series) == 2:
        before = (series[0].n, series[1].n)
        series = list(drop_zero_pairs(series[0], series[1]))
        counts["n_common_nonzero"] = series[0].n
        counts["n_dropped"] = before[0] - series[0].n
    artifacts = []
    for path, s in zip(prices, series):
        name = f"{Path(path).stem}_returns.csv"
        s.to_csv(outdir / name, column="return")
        artifacts.append(name)
    options = _resolve(ctx, "returns", prices=list(prices))
    _write_manifest(outdir, "returns", options, artifacts, counts, ctx.obj["seed"])


@main.command()
@click.argument("inputs", nargs=-1, required=True)
@click.option("--innovation", type=click.Choice(["normal", "t"]), default="normal", show_default=True)
@click.option("--min-length", type=int, default=100, show_default=True)
@click.option("--lags", type=int, default=12, show_default=True, help="Engle LM diagnostic lags.")
@click.pass_context
@_guarded
def garch(ctx, inputs, innovation, min_length, lags):
    """GARCH(1,1) filter: return CSVs in, standardized residual CSVs out."""
    opts = _resolve(
        ctx, "garch", inputs=list(inputs), innovation=innovation,
        min_length=min_length, lags=lags,
    )
    outdir = _outdir(ctx)
    artifacts, counts = [], {}
    for path in opts["inputs"]:
        s = _read_series(path)
        fit = garch11_fit(s, innovation=opts["innovation"], min_length=opts["min_length"])
        stat, pval = engle_arch_lm(fit.residuals, lags=opts["lags"])
        name = f"{Path(path).stem}_residuals.csv"
        ReturnSeries(s.timestamps, fit.residuals).to_csv(outdir / name, column="residual")
        artifacts.append(name)
        counts[Path(path).stem] = {
            "n": s.n,
            "omega": fit.omega,
            "alpha": fit.alpha,
            "beta": fit.beta,
            "df": fit.df,
            "loglik": fit.loglik,
            "engle_stat": stat,
            "engle_p": pval,
        }
    _write_manifest(outdir, "garch", opts, artifacts, counts, ctx.obj["seed"])


@main.command()
@click.argument("series1")
@click.argument("series2")
@click.pass_context
@_guarded
def frechet(ctx, series1, series2):
    """Rank-transform an aligned residual pair to Frechet scale.

    Emits pseudo-polar records (x,r,w) where x is time normalized to
    [0, 1] over the joined sample.
    """
    opts = _resolve(ctx, "frechet", series1=series1, series2=series2)
    outdir = _outdir(ctx)
    dates, v1, v2 = _join_pair(_read_series(opts["series1"]), _read_series(opts["series2"]))
    y1, y2 = empirical_frechet(v1), empirical_frechet(v2)
    m = v1.size
    x = np.linspace(0.0, 1.0, m) if m > 1 else np.array([0.5])
    pp = pseudo_polar(y1, y2, x)
    pp.to_csv(outdir / "pseudo_polar.csv")
    counts = {"n": m, "date_first": str(dates[0]), "date_last": str(dates[-1])}
    _write_manifest(outdir, "frechet", opts, ["pseudo_polar.csv"], counts, ctx.obj["seed"])


@main.command()
@click.argument("polar")
@click.option("--q", type=float, default=0.95, show_default=True, help="Radius quantile level.")
@click.option("--knots", type=int, default=10, show_default=True, help="Interior spline knots.")
@click.pass_context
@_guarded
def angles(ctx, polar, q, knots):
    """Threshold pseudo-polar radii and keep exceedance angles (x,w)."""
    opts = _resolve(ctx, "angles", polar=polar, q=q, knots=knots)
    outdir = _outdir(ctx)
    pp = PseudoPolar.from_csv(_require_file(opts["polar"]))
    curve = quantile_spline_threshold(pp.x, pp.r, q=opts["q"], knots=opts["knots"])
    sample = exceedance_angles(pp, curve)
    sample.to_csv(outdir / "angles.csv")
    counts = {
        "n_input": pp.n,
        "n_angles": sample.n,
        "coverage": curve.coverage,
        "threshold_total_variation": curve.total_variation,
    }
    _write_manifest(outdir, "angles", opts, ["angles.csv"], counts, ctx.obj["seed"])


@main.command()
@click.argument("series1")
@click.argument("series2")
@click.option("--u", type=float, default=0.95, show_default=True)
@click.option("--window", type=int, default=600, show_default=True)
@click.option("--step", type=int, default=1, show_default=True)
@click.pass_context
@_guarded
def chi(ctx, series1, series2, u, window, step):
    """Rolling chi and chi-bar trajectory for an aligned pair."""
    opts = _resolve(ctx, "chi", series1=series1, series2=series2, u=u, window=window, step=step)
    outdir = _outdir(ctx)
    dates, v1, v2 = _join_pair(_read_series(opts["series1"]), _read_series(opts["series2"]))
    frame = rolling_chi(
        v1, v2, window=opts["window"], step=opts["step"], u=opts["u"], timestamps=dates
    )
    frame.to_csv(outdir / "chi.csv", index=False)
    overall = chi_chibar(v1, v2, u=opts["u"])
    counts = {
        "n": v1.size,
        "n_windows": len(frame),
        "n_nan_windows": int(frame["chi"].isna().sum()),
        "global_chi": overall.chi,
        "global_chibar": overall.chibar,
        "n_joint_exceedances": overall.n_joint,
    }
    _write_manifest(outdir, "chi", opts, ["chi.csv"], counts, ctx.obj["seed"])


@main.command()
@click.argument("angles_csv")
@click.option("--criterion", type=click.Choice(["mlcv", "lscv"]), default="mlcv", show_default=True)
@click.option("--weights", type=click.Choice(["nw", "ll"]), default="nw", show_default=True)
@click.option("--k", type=int, default=10, show_default=True, help="Cross-validation folds.")
@click.option("--region", type=click.Choice(["none", "rn", "rxn"]), default="rn", show_default=True)
@click.option("--budget", type=int, default=300, show_default=True)
@click.option("--multistart", type=int, default=4, show_default=True)
@click.pass_context
@_guarded
def cv(ctx, angles_csv, criterion, weights, k, region, budget, multistart):
    """Cross-validate smoothing parameters for an angle sample."""
    opts = _resolve(
        ctx, "cv", angles_csv=angles_csv, criterion=criterion, weights=weights,
        k=k, region=region, budget=budget, multistart=multistart,
    )
    outdir = _outdir(ctx)
    sample = AngleSample.from_csv(_require_file(opts["angles_csv"]))
    config = CvConfig(
        k=opts["k"],
        criterion=opts["criterion"],
        region=opts["region"],
        budget=opts["budget"],
        multistart=opts["multistart"],
        weights=opts["weights"],
    )
    result = select_tuning(sample, config)
    payload = {
        "b": result.params.b,
        "nu": result.params.nu,
        "tau": result.params.tau,
        "weights": result.params.weights,
        "objective": result.objective,
        "evaluations": result.n_evaluations,
        "criterion": result.criterion,
        "region": result.region,
    }
    (outdir / "cv.json").write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    counts = {"n": sample.n, "evaluations": result.n_evaluations}
    _write_manifest(outdir, "cv", opts, ["cv.json"], counts, ctx.obj["seed"])


@main.command()
@click.argument("angles_csv")
@click.option("--params-file", type=str, default=None, help="JSON from the cv command.")
@click.option("--b", type=float, default=None, help="Covariate bandwidth.")
@click.option("--nu", type=float, default=None, help="Angular concentration.")
@click.option("--tau", type=float, default=0.0, show_default=True, help="Shape offset.")
@click.option("--weights", type=click.Choice(["nw", "ll"]), default="nw", show_default=True)
@click.option("--grid-x", type=int, default=101, show_default=True)
@click.option("--grid-w", type=int, default=512, show_default=True)
@click.pass_context
@_guarded
def fit(ctx, angles_csv, params_file, b, nu, tau, weights, grid_x, grid_w):
    """Evaluate the fitted angular density surface on a grid (x,w,h)."""
    opts = _resolve(
        ctx, "fit", angles_csv=angles_csv, params_file=params_file,
        b=b, nu=nu, tau=tau, weights=weights, grid_x=grid_x, grid_w=grid_w,
    )
    outdir = _outdir(ctx)
    sample = AngleSample.from_csv(_require_file(opts["angles_csv"]))
    params = _load_params(opts["params_file"], opts["b"], opts["nu"], opts["tau"], opts["weights"])
    surface = AngularSurface(sample, params)
    xg, wg = _x_grid(sample, opts["grid_x"]), _w_grid(opts["grid_w"])
    values = surface_grid(surface, xg, wg)
    grid_frame(xg, wg, values).to_csv(outdir / "fit.csv", index=False)
    counts = {
        "n": sample.n,
        "grid_x": xg.size,
        "grid_w": wg.size,
        "params": dataclasses.asdict(params),
    }
    _write_manifest(outdir, "fit", opts, ["fit.csv"], counts, ctx.obj["seed"])


@main.command()
@click.argument("angles_csv")
@click.option("--params-file", type=str, default=None, help="JSON from the cv command.")
@click.option("--b", type=float, default=None)
@click.option("--nu", type=float, default=None)
@click.option("--tau", type=float, default=0.0, show_default=True)
@click.option("--weights", type=click.Choice(["nw", "ll"]), default="nw", show_default=True)
@click.option("--grid-x", type=int, default=101, show_default=True)
@click.option("--pickands-at", "pickands_at", multiple=True, type=float,
              help="Pickands ordinate(s); repeatable.")
@click.option("--bev-at", "bev_at", multiple=True, type=str,
              help="BEV cdf argument pair 'y1,y2'; repeatable.")
@click.option("--extremal/--no-extremal", default=True, show_default=True,
              help="Include the extremal-coefficient trajectory.")
@click.pass_context
@_guarded
def functionals(ctx, angles_csv, params_file, b, nu, tau, weights, grid_x,
                pickands_at, bev_at, extremal):
    """Dependence functionals along the covariate (x,quantity,value,err)."""
    opts = _resolve(
        ctx, "functionals", angles_csv=angles_csv, params_file=params_file,
        b=b, nu=nu, tau=tau, weights=weights, grid_x=grid_x,
        pickands_at=list(pickands_at), bev_at=list(bev_at), extremal=extremal,
    )
    outdir = _outdir(ctx)
    sample = AngleSample.from_csv(_require_file(opts["angles_csv"]))
    params = _load_params(opts["params_file"], opts["b"], opts["nu"], opts["tau"], opts["weights"])
    surface = AngularSurface(sample, params)
    quantities = []
    if opts["extremal"]:
        quantities.append(("extremal_coeff",))
    for w_pt in opts["pickands_at"]:
        quantities.append(("pickands", float(w_pt)))
    for pair in opts["bev_at"]:
        y1, y2 = _parse_floats(pair, "--bev-at")[:2]
        quantities.append(("bev", y1, y2))
    if not quantities:
        raise click.UsageError("no functionals requested")
    frame = trajectory_frame(surface, _x_grid(sample, opts["grid_x"]), quantities)
    frame.to_csv(outdir / "functionals.csv", index=False)
    counts = {"n": sample.n, "rows": len(frame), "quantities": [q[0] for q in quantities]}
    _write_manifest(outdir, "functionals", opts, ["functionals.csv"], counts, ctx.obj["seed"])


@main.command()
@click.argument("angles_csv")
@click.option("--params-file", type=str, default=None, help="JSON from the cv command.")
@click.option("--b", type=float, default=None)
@click.option("--nu", type=float, default=None)
@click.option("--tau", type=float, default=0.0, show_default=True)
@click.option("--weights", type=click.Choice(["nw"]), default="nw", show_default=True)
@click.option("--B", "n_replicates", type=int, default=200, show_default=True)
@click.option("--levels", type=str, default="0.5,0.75,0.95", show_default=True)
@click.option("--quantity", type=click.Choice(["extremal_coeff", "pickands", "density"]),
              default="extremal_coeff", show_default=True)
@click.option("--at-w", type=float, default=0.5, show_default=True,
              help="Ordinate for --quantity pickands.")
@click.option("--at-x", type=float, default=None,
              help="Covariate for --quantity density (default: sample median).")
@click.option("--grid-x", type=int, default=101, show_default=True)
@click.option("--budget", type=int, default=300, show_default=True,
              help="Full cross-validation budget before any reduction.")
@click.option("--k", type=int, default=10, show_default=True)
@click.option("--reduced-budget/--full-budget", default=True, show_default=True)
@click.option("--seed", type=int, default=None, help="Override the global seed.")
@click.pass_context
@_guarded
def boot(ctx, angles_csv, params_file, b, nu, tau, weights, n_replicates, levels,
         quantity, at_w, at_x, grid_x, budget, k, reduced_budget, seed):
    """Smoothed-bootstrap central regions (x,w,level,lower,median,upper)."""
    opts = _resolve(
        ctx, "boot", angles_csv=angles_csv, params_file=params_file, b=b, nu=nu,
        tau=tau, weights=weights, n_replicates=n_replicates, levels=levels,
        quantity=quantity, at_w=at_w, at_x=at_x, grid_x=grid_x, budget=budget,
        k=k, reduced_budget=reduced_budget, seed=seed,
    )
    outdir = _outdir(ctx)
    run_seed = _effective_seed(ctx, opts["seed"])
    sample = AngleSample.from_csv(_require_file(opts["angles_csv"]))
    params = _load_params(opts["params_file"], opts["b"], opts["nu"], opts["tau"], opts["weights"])
    level_values = _parse_floats(opts["levels"], "--levels")
    config = CvConfig(k=opts["k"], budget=opts["budget"], weights=params.weights)
    ensemble = bootstrap_surfaces(
        sample,
        params,
        opts["n_replicates"],
        config,
        seed=run_seed,
        reduced_budget=opts["reduced_budget"],
        n_jobs=_effective_threads(ctx),
    )
    if opts["quantity"] == "extremal_coeff":
        grid = _x_grid(sample, opts["grid_x"])
        curves = np.stack([extremal_coefficient_curve(s, grid) for s in ensemble.surfaces])
        x_arg, w_arg = None, None
    elif opts["quantity"] == "pickands":
        grid = _x_grid(sample, opts["grid_x"])
        curves = np.stack(
            [
                np.array([pickands(opts["at_w"], xi, s).value for xi in grid])
                for s in ensemble.surfaces
            ]
        )
        x_arg, w_arg = None, float(opts["at_w"])
    else:
        x0 = float(np.median(sample.x)) if opts["at_x"] is None else float(opts["at_x"])
        grid = default_angle_grid()
        curves = np.stack(
            [surface_grid(s, np.array([x0]), grid)[0] for s in ensemble.surfaces]
        )
        x_arg, w_arg = x0, None
    regions = [central_region(curves, level) for level in level_values]
    frame = central_region_frame(grid, regions, x=x_arg, w=w_arg)
    frame.to_csv(outdir / "boot.csv", index=False)
    counts = {
        "n": sample.n,
        "B": ensemble.n_replicates,
        "n_failed": ensemble.n_failed,
        "levels": list(level_values),
        "quantity": opts["quantity"],
    }
    _write_manifest(outdir, "boot", opts, ["boot.csv"], counts, run_seed)


@main.command()
@click.option("--family", type=click.Choice(sorted(standard_models())), required=True)
@click.option("--n", type=int, required=True, help="Number of angles to draw.")
@click.option("--domain", type=str, default=None, help="Covariate range 'lo,hi'.")
@click.option("--scheme", type=click.Choice(["equal", "uniform"]), default="equal",
              show_default=True, help="Covariate design.")
@click.option("--seed", type=int, default=None, help="Override the global seed.")
@click.pass_context
@_guarded
def simulate(ctx, family, n, domain, scheme, seed):
    """Draw angles from a covariate-indexed oracle model (x,w CSV)."""
    opts = _resolve(ctx, "simulate", family=family, n=n, domain=domain, scheme=scheme, seed=seed)
    outdir = _outdir(ctx)
    run_seed = _effective_seed(ctx, opts["seed"])
    model = standard_models()[opts["family"]]
    if opts["domain"] is not None:
        lo, hi = _parse_floats(opts["domain"], "--domain")[:2]
        model = dataclasses.replace(model, domain=(lo, hi))
    xs = covariate_grid_sampler(model.domain, opts["n"], scheme=opts["scheme"], seed=run_seed)
    sample = sample_angles(model, xs, seed=run_seed)
    sample.to_csv(outdir / "simulated_angles.csv")
    counts = {"n": sample.n, "family": opts["family"], "domain": list(model.domain)}
    _write_manifest(outdir, "simulate", opts, ["simulated_angles.csv"], counts, run_seed)


@main.command()
@click.option("--family", type=click.Choice(sorted(standard_models())), required=True)
@click.option("--n", type=int, default=500, show_default=True)
@click.option("--reps", type=int, default=100, show_default=True)
@click.option("--weights", type=click.Choice(["nw", "ll"]), default="nw", show_default=True)
@click.option("--budget", type=int, default=300, show_default=True)
@click.option("--seed", type=int, default=None, help="Override the global seed.")
@click.pass_context
@_guarded
def miae(ctx, family, n, reps, weights, budget, seed):
    """Monte Carlo mean integrated absolute error study (JSON report)."""
    opts = _resolve(
        ctx, "miae", family=family, n=n, reps=reps, weights=weights, budget=budget, seed=seed
    )
    outdir = _outdir(ctx)
    run_seed = _effective_seed(ctx, opts["seed"])
    truth = standard_models()[opts["family"]]
    report = miae_study(
        truth,
        n=opts["n"],
        reps=opts["reps"],
        cv_config=CvConfig(budget=opts["budget"], weights=opts["weights"]),
        weights=opts["weights"],
        seed=run_seed,
        n_jobs=_effective_threads(ctx),
    )
    payload = {
        "family": opts["family"],
        "n": opts["n"],
        "reps": opts["reps"],
        "weights": opts["weights"],
        "seed": run_seed,
        "miae": report.value,
        "mc_se": report.mc_se,
        "per_replicate": list(report.per_replicate),
        "n_failed": len(report.failures),
    }
    (outdir / "miae.json").write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    counts = {"reps_done": report.n_replicates, "n_failed": len(report.failures)}
    _write_manifest(outdir, "miae", opts, ["miae.json"], counts, run_seed)


if __name__ == "__main__":
    main()
