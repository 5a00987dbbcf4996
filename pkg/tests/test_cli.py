"""End-to-end tests for the batch command-line interface."""

import hashlib
import json
import math
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner

from evdep.cli import main
from evdep.estimator import AngleSample

FIXTURES = Path(__file__).parent / "fixtures"


def invoke(*args, expect=0):
    result = CliRunner().invoke(main, [str(a) for a in args])
    text = result.output + result.stderr
    assert result.exit_code == expect, (
        f"exit {result.exit_code} != {expect}\n{text}\n{result.exception!r}"
    )
    return result, text


def read_manifest(outdir: Path, command: str) -> dict:
    return json.loads((outdir / f"{command}_manifest.json").read_text())


def write_small_prices(outdir: Path, rows: int = 1000) -> tuple[Path, Path]:
    paths = []
    for name in ("prices_a.csv", "prices_b.csv"):
        frame = pd.read_csv(FIXTURES / name).head(rows)
        target = outdir / name
        frame.to_csv(target, index=False)
        paths.append(target)
    return tuple(paths)


def sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class TestExitCodes:
    def test_version_flag(self):
        result, text = invoke("--version")
        assert "version" in text

    def test_missing_input_is_exit_3(self, tmp_path):
        _, text = invoke("--out", tmp_path, "fit", tmp_path / "nope.csv", "--b", 0.5, "--nu", 8, expect=3)
        assert "missing input file" in text

    def test_missing_config_is_exit_3(self, tmp_path):
        invoke("--config", tmp_path / "absent.json", "--out", tmp_path, "simulate",
               "--family", "logistic", "--n", 10, expect=3)

    def test_empty_sample_is_exit_6(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("x,w\n")
        _, text = invoke("--out", tmp_path, "fit", empty, "--b", 0.5, "--nu", 8, expect=6)
        assert "empty" in text

    def test_domain_error_is_exit_4(self, tmp_path):
        angles = tmp_path / "angles.csv"
        rng = np.random.default_rng(0)
        AngleSample(np.linspace(0, 1, 30), rng.uniform(0.2, 0.8, 30)).to_csv(angles)
        _, text = invoke("--out", tmp_path, "fit", angles, "--b", -0.5, "--nu", 8, expect=4)
        assert "error" in text

    def test_quantile_domain_error_is_exit_4(self, tmp_path):
        polar = tmp_path / "polar.csv"
        rng = np.random.default_rng(1)
        pd.DataFrame(
            {"x": np.linspace(0, 1, 80), "r": rng.exponential(size=80) + 1, "w": rng.uniform(0.1, 0.9, 80)}
        ).to_csv(polar, index=False)
        invoke("--out", tmp_path, "angles", polar, "--q", 1.5, expect=4)

    def test_infeasible_tuning_is_exit_5(self, tmp_path):
        # No (b, nu, tau) in the search grid satisfies the shape
        # positivity region for this skewed sample at any bandwidth.
        angles = tmp_path / "angles.csv"
        w = np.concatenate([np.full(18, 0.02), np.full(2, 0.9)])
        AngleSample(np.linspace(0, 1, 20), w).to_csv(angles)
        _, text = invoke("--out", tmp_path, "cv", angles, "--budget", 40,
                         "--multistart", 2, expect=5)
        assert "error" in text

    def test_usage_errors_are_exit_2(self, tmp_path):
        invoke("--out", tmp_path, "cv", "whatever.csv", "--criterion", "bogus", expect=2)
        angles = tmp_path / "angles.csv"
        AngleSample(np.linspace(0, 1, 30), np.linspace(0.2, 0.8, 30)).to_csv(angles)
        # fit needs either a params file or explicit values
        invoke("--out", tmp_path, "fit", angles, expect=2)
        # functionals with every quantity disabled
        invoke("--out", tmp_path, "functionals", angles, "--b", 0.5, "--nu", 8,
               "--no-extremal", expect=2)


class TestConfig:
    def test_config_seed_and_flag_precedence(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"seed": 99, "simulate": {"scheme": "uniform"}}))

        d1 = tmp_path / "run1"
        invoke("--config", cfg, "--out", d1, "simulate", "--family", "logistic", "--n", 30)
        m1 = read_manifest(d1, "simulate")
        assert m1["seed"] == 99
        assert m1["options"]["scheme"] == "uniform"

        d2 = tmp_path / "run2"
        invoke("--config", cfg, "--out", d2, "--seed", 123, "simulate",
               "--family", "logistic", "--n", 30, "--scheme", "equal")
        m2 = read_manifest(d2, "simulate")
        assert m2["seed"] == 123
        assert m2["options"]["scheme"] == "equal"

        d3 = tmp_path / "run3"
        invoke("--config", cfg, "--out", d3, "simulate",
               "--family", "logistic", "--n", 30, "--seed", 7)
        assert read_manifest(d3, "simulate")["seed"] == 7

    def test_config_out_directory(self, tmp_path):
        target = tmp_path / "from_config"
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"out": str(target)}))
        invoke("--config", cfg, "simulate", "--family", "logistic", "--n", 20)
        assert (target / "simulated_angles.csv").is_file()

    def test_config_schema_violations_are_exit_2(self, tmp_path):
        bad_key = tmp_path / "bad_key.json"
        bad_key.write_text(json.dumps({"bogus": 1}))
        invoke("--config", bad_key, "--out", tmp_path, "simulate",
               "--family", "logistic", "--n", 10, expect=2)

        bad_section = tmp_path / "bad_section.json"
        bad_section.write_text(json.dumps({"simulate": {"bogus": 1}}))
        invoke("--config", bad_section, "--out", tmp_path, "simulate",
               "--family", "logistic", "--n", 10, expect=2)

        not_json = tmp_path / "not_json.json"
        not_json.write_text("{seed: 1")
        invoke("--config", not_json, "--out", tmp_path, "simulate",
               "--family", "logistic", "--n", 10, expect=2)


class TestSimulate:
    def test_deterministic_and_reproducible_from_manifest(self, tmp_path):
        d1, d2, d3 = tmp_path / "a", tmp_path / "b", tmp_path / "c"
        args = ("simulate", "--family", "logistic", "--n", 500, "--seed", 7)
        invoke("--out", d1, *args)
        invoke("--out", d2, *args)
        assert sha256(d1 / "simulated_angles.csv") == sha256(d2 / "simulated_angles.csv")

        manifest = read_manifest(d1, "simulate")
        assert manifest["command"] == "simulate"
        assert manifest["seed"] == 7
        assert manifest["artifacts"] == ["simulated_angles.csv"]
        assert manifest["counts"]["n"] == 500
        assert "evdep" in manifest["versions"]

        # Rebuild the exact call from the manifest alone.
        opts = manifest["options"]
        rebuilt = ["simulate", "--family", opts["family"], "--n", opts["n"],
                   "--scheme", opts["scheme"], "--seed", manifest["seed"]]
        invoke("--out", d3, *rebuilt)
        assert sha256(d3 / "simulated_angles.csv") == sha256(d1 / "simulated_angles.csv")

        sample = AngleSample.from_csv(d1 / "simulated_angles.csv")
        assert sample.n == 500

    def test_seed_changes_output(self, tmp_path):
        d1, d2 = tmp_path / "a", tmp_path / "b"
        invoke("--out", d1, "simulate", "--family", "sdir", "--n", 100, "--seed", 1)
        invoke("--out", d2, "simulate", "--family", "sdir", "--n", 100, "--seed", 2)
        assert sha256(d1 / "simulated_angles.csv") != sha256(d2 / "simulated_angles.csv")

    def test_domain_override(self, tmp_path):
        invoke("--out", tmp_path, "simulate", "--family", "sdir", "--n", 50,
               "--domain", "1.0,2.0", "--seed", 3)
        sample = AngleSample.from_csv(tmp_path / "simulated_angles.csv")
        assert sample.x.min() >= 1.0 and sample.x.max() <= 2.0
        assert read_manifest(tmp_path, "simulate")["counts"]["domain"] == [1.0, 2.0]


@pytest.fixture(scope="module")
def prep(tmp_path_factory):
    """returns -> garch -> frechet -> angles on a fixture prefix."""
    outdir = tmp_path_factory.mktemp("pipeline")
    pa, pb = write_small_prices(outdir)
    invoke("--out", outdir, "returns", pa, pb)
    ra, rb = outdir / "prices_a_returns.csv", outdir / "prices_b_returns.csv"
    invoke("--out", outdir, "garch", ra, rb)
    za, zb = outdir / "prices_a_returns_residuals.csv", outdir / "prices_b_returns_residuals.csv"
    invoke("--out", outdir, "frechet", za, zb)
    invoke("--out", outdir, "angles", outdir / "pseudo_polar.csv", "--q", 0.9)
    return outdir


@pytest.fixture(scope="module")
def angles_csv(tmp_path_factory):
    outdir = tmp_path_factory.mktemp("angles")
    invoke("--out", outdir, "simulate", "--family", "logistic", "--n", 200, "--seed", 3)
    return outdir / "simulated_angles.csv"


@pytest.fixture(scope="module")
def cv_json(tmp_path_factory, angles_csv):
    outdir = tmp_path_factory.mktemp("cv")
    invoke("--out", outdir, "cv", angles_csv, "--budget", 60, "--multistart", 2)
    return outdir / "cv.json"


class TestPipelineCommands:
    def test_returns_artifacts(self, prep):
        frame = pd.read_csv(prep / "prices_a_returns.csv")
        assert list(frame.columns) == ["date", "return"]
        assert len(frame) == 999
        manifest = read_manifest(prep, "returns")
        assert manifest["counts"]["n_raw"] == [999, 999]
        assert manifest["counts"]["n_dropped"] >= 0

    def test_garch_artifacts(self, prep):
        frame = pd.read_csv(prep / "prices_a_returns_residuals.csv")
        assert list(frame.columns) == ["date", "residual"]
        stats = read_manifest(prep, "garch")["counts"]["prices_a_returns"]
        assert 0.0 <= stats["alpha"] and stats["alpha"] + stats["beta"] < 1.0
        assert 0.0 <= stats["engle_p"] <= 1.0
        # standardized residuals should have roughly unit scale
        assert 0.7 < frame["residual"].std() < 1.3

    def test_frechet_artifacts(self, prep):
        frame = pd.read_csv(prep / "pseudo_polar.csv")
        assert list(frame.columns) == ["x", "r", "w"]
        assert len(frame) == 999
        assert frame["x"].between(0, 1).all()
        assert (frame["r"] > 0).all()
        assert frame["w"].between(0, 1).all()

    def test_angles_artifacts(self, prep):
        frame = pd.read_csv(prep / "angles.csv")
        assert list(frame.columns) == ["x", "w"]
        counts = read_manifest(prep, "angles")["counts"]
        assert counts["n_angles"] == len(frame)
        # 10% target retention on 999 points
        assert 50 <= counts["n_angles"] <= 200
        assert abs(counts["coverage"] - 0.9) < 0.05

    def test_manifests_list_existing_artifacts(self, prep):
        for command in ("returns", "garch", "frechet", "angles"):
            manifest = read_manifest(prep, command)
            for artifact in manifest["artifacts"]:
                assert (prep / artifact).is_file()

    def test_inputs_never_mutated(self, prep, tmp_path):
        pa, pb = write_small_prices(tmp_path)
        before = (sha256(pa), sha256(pb))
        invoke("--out", tmp_path / "out", "returns", pa, pb)
        assert (sha256(pa), sha256(pb)) == before

    def test_chi_command(self, prep, tmp_path):
        ra, rb = prep / "prices_a_returns.csv", prep / "prices_b_returns.csv"
        invoke("--out", tmp_path, "chi", ra, rb, "--window", 600, "--step", 200, "--u", 0.9)
        frame = pd.read_csv(tmp_path / "chi.csv")
        assert list(frame.columns) == ["t", "chi", "chi_lo", "chi_hi", "chibar", "chibar_lo", "chibar_hi"]
        assert len(frame) == (999 - 600) // 200 + 1
        counts = read_manifest(tmp_path, "chi")["counts"]
        assert counts["n_windows"] == len(frame)
        assert -1.0 <= counts["global_chi"] <= 1.0
        assert counts["n_joint_exceedances"] > 0


class TestModelingCommands:
    def test_cv_report(self, cv_json):
        payload = json.loads(cv_json.read_text())
        assert set(payload) == {"b", "nu", "tau", "weights", "objective",
                                "evaluations", "criterion", "region"}
        assert payload["b"] > 0 and payload["nu"] > 0 and payload["tau"] >= 0
        assert payload["criterion"] == "mlcv"
        assert payload["evaluations"] >= 1

    def test_fit_grid_satisfies_moment_constraint(self, angles_csv, cv_json, tmp_path):
        invoke("--out", tmp_path, "fit", angles_csv, "--params-file", cv_json,
               "--grid-x", 7, "--grid-w", 512)
        frame = pd.read_csv(tmp_path / "fit.csv")
        assert list(frame.columns) == ["x", "w", "h"]
        assert len(frame) == 7 * 512
        for _, block in frame.groupby("x"):
            w, h = block["w"].to_numpy(), block["h"].to_numpy()
            assert h.min() >= 0.0
            assert abs(np.trapezoid(w * h, w) - 0.5) < 0.01

    def test_functionals_command(self, angles_csv, cv_json, tmp_path):
        invoke("--out", tmp_path, "functionals", angles_csv, "--params-file", cv_json,
               "--grid-x", 5, "--pickands-at", 0.3, "--bev-at", "1,1")
        frame = pd.read_csv(tmp_path / "functionals.csv")
        assert list(frame.columns) == ["x", "quantity", "value", "err"]
        assert set(frame["quantity"]) == {"extremal_coeff", "pickands(0.3)", "bev(1,1)"}
        assert len(frame) == 15
        ext = frame[frame["quantity"] == "extremal_coeff"]["value"]
        assert ((1.0 <= ext) & (ext <= 2.0)).all()
        pick = frame[frame["quantity"] == "pickands(0.3)"]["value"]
        assert ((0.7 <= pick) & (pick <= 1.0)).all()
        bev = frame[frame["quantity"] == "bev(1,1)"]["value"]
        assert ((0.0 < bev) & (bev < 1.0)).all()

    def test_boot_extremal_regions(self, angles_csv, tmp_path):
        invoke("--out", tmp_path, "boot", angles_csv, "--b", 0.2, "--nu", 8, "--tau", 0.5,
               "--B", 6, "--levels", "0.5,0.95", "--quantity", "extremal_coeff",
               "--grid-x", 5, "--budget", 40, "--k", 5, "--seed", 9)
        frame = pd.read_csv(tmp_path / "boot.csv")
        assert list(frame.columns) == ["x", "w", "level", "lower", "median", "upper"]
        assert len(frame) == 2 * 5
        assert set(frame["level"]) == {0.5, 0.95}
        assert (frame["lower"] <= frame["median"]).all()
        assert (frame["median"] <= frame["upper"]).all()
        assert frame["w"].isna().all()
        counts = read_manifest(tmp_path, "boot")["counts"]
        # Replicates whose re-tuning fails are dropped and counted.
        assert counts["B"] + counts["n_failed"] == 6
        assert counts["B"] >= 4

    def test_boot_pickands_and_density_layouts(self, angles_csv, tmp_path):
        d1 = tmp_path / "pick"
        invoke("--out", d1, "boot", angles_csv, "--b", 0.2, "--nu", 8, "--tau", 0.5,
               "--B", 3, "--levels", "0.95", "--quantity", "pickands", "--at-w", 0.3,
               "--grid-x", 4, "--budget", 40, "--k", 5, "--seed", 9)
        pick = pd.read_csv(d1 / "boot.csv")
        assert (pick["w"] == 0.3).all()
        assert pick["x"].nunique() == 4

        d2 = tmp_path / "dens"
        invoke("--out", d2, "boot", angles_csv, "--b", 0.2, "--nu", 8, "--tau", 0.5,
               "--B", 3, "--levels", "0.95", "--quantity", "density", "--at-x", 0.0,
               "--budget", 40, "--k", 5, "--seed", 9)
        dens = pd.read_csv(d2 / "boot.csv")
        assert (dens["x"] == 0.0).all()
        assert dens["w"].nunique() == 512

    def test_miae_command(self, tmp_path):
        invoke("--out", tmp_path, "--threads", 2, "miae", "--family", "logistic",
               "--n", 40, "--reps", 2, "--budget", 30, "--seed", 11)
        payload = json.loads((tmp_path / "miae.json").read_text())
        assert payload["family"] == "logistic"
        assert payload["reps"] == 2
        assert len(payload["per_replicate"]) == 2
        assert payload["miae"] > 0
        assert math.isclose(payload["miae"], float(np.mean(payload["per_replicate"])))
        assert read_manifest(tmp_path, "miae")["counts"]["reps_done"] == 2
