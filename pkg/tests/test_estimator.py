import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from evdep import (
    AngleSample,
    AngularSurface,
    DomainError,
    EmptySampleError,
    ExtrapolationError,
    NegativeDensityWarning,
    NumericError,
    TuningParams,
    angular_cdf,
    angular_density,
    default_angle_grid,
    ll_weights,
    moment_correction,
    nw_weights,
    surface_grid,
)


def make_sample(x, w):
    return AngleSample(np.asarray(x, dtype=float), np.asarray(w, dtype=float))


class TestAngleSample:
    def test_empty_rejected(self):
        with pytest.raises(EmptySampleError):
            make_sample([], [])

    def test_boundary_angles_rejected(self):
        with pytest.raises(DomainError):
            make_sample([0.0, 1.0], [0.5, 1.0])
        with pytest.raises(DomainError):
            make_sample([0.0, 1.0], [0.0, 0.5])

    def test_length_mismatch_rejected(self):
        with pytest.raises(DomainError):
            make_sample([0.0, 1.0], [0.5])

    def test_csv_roundtrip(self, tmp_path):
        s = make_sample([0.0, 0.5, 1.0], [0.25, 0.5, 0.75])
        path = tmp_path / "angles.csv"
        s.to_csv(path)
        back = AngleSample.from_csv(path)
        np.testing.assert_array_equal(back.x, s.x)
        np.testing.assert_array_equal(back.w, s.w)

    def test_csv_missing_columns(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(DomainError):
            AngleSample.from_csv(path)


class TestNwWeights:
    def test_identical_covariates_uniform(self):
        s = make_sample([2.0] * 5, [0.2, 0.3, 0.4, 0.5, 0.6])
        np.testing.assert_allclose(nw_weights(2.0, s, 1.0), np.full(5, 0.2), atol=1e-15)

    def test_two_point_hand_value(self):
        # Ratio of the kernels is exp(-1/2), so the first weight is the
        # logistic sigmoid of 1/2.
        s = make_sample([0.0, 1.0], [0.5, 0.5])
        got = nw_weights(0.0, s, 1.0)
        np.testing.assert_allclose(
            got, [0.6224593312018546, 0.3775406687981454], atol=1e-12
        )

    @settings(max_examples=30, deadline=None)
    @given(
        xs=st.lists(st.floats(-5, 5), min_size=2, max_size=25),
        x=st.floats(-5, 5),
        b=st.floats(0.3, 10.0),
    )
    def test_sum_to_one(self, xs, x, b):
        s = make_sample(xs, np.linspace(0.2, 0.8, len(xs)))
        got = nw_weights(x, s, b)
        assert got.sum() == pytest.approx(1.0, abs=1e-12)
        assert (got >= 0.0).all()

    def test_far_extrapolation_rejected(self):
        s = make_sample([0.0, 1.0], [0.4, 0.6])
        with pytest.raises(ExtrapolationError):
            nw_weights(1e6, s, 0.01)

    def test_bad_bandwidth(self):
        s = make_sample([0.0, 1.0], [0.4, 0.6])
        for b in (0.0, -1.0, np.inf):
            with pytest.raises(DomainError):
                nw_weights(0.0, s, b)


class TestLlWeights:
    def test_symmetric_design_reduces_to_nw(self):
        # First local moment vanishes when covariates pair off around x.
        s = make_sample([0.1, 0.9, 0.3, 0.7], [0.2, 0.4, 0.6, 0.8])
        np.testing.assert_allclose(
            ll_weights(0.5, s, 0.4), nw_weights(0.5, s, 0.4), atol=1e-12
        )

    @settings(max_examples=30, deadline=None)
    @given(
        seed=st.integers(0, 2**31),
        n=st.integers(3, 25),
        b=st.floats(0.3, 5.0),
    )
    def test_sum_to_one(self, seed, n, b):
        rng = np.random.default_rng(seed)
        s = make_sample(rng.uniform(-2, 2, n), rng.uniform(0.1, 0.9, n))
        got = ll_weights(float(rng.uniform(-2, 2)), s, b)
        assert got.sum() == pytest.approx(1.0, abs=1e-12)

    def test_single_distinct_covariate_singular(self):
        s = make_sample([1.0, 1.0], [0.4, 0.6])
        with pytest.raises(NumericError):
            ll_weights(1.0, s, 0.5)

    def test_negative_weights_at_one_sided_extrapolation(self):
        s = make_sample([0.0, 0.05, 0.1, 1.0], [0.3, 0.4, 0.35, 0.9])
        got = ll_weights(1.6, s, 0.5)
        assert (got < 0.0).any()
        assert got.sum() == pytest.approx(1.0, abs=1e-12)


class TestMomentCorrection:
    def test_balanced_half(self):
        s = make_sample([0.0, 1.0], [0.5, 0.5])
        assert moment_correction(0.5, s, nw_weights(0.5, s, 1.0)) == 1.0

    def test_quarter(self):
        s = make_sample([0.0, 1.0], [0.25, 0.25])
        assert moment_correction(0.5, s, nw_weights(0.5, s, 1.0)) == 2.0

    def test_defining_identity_exact(self):
        rng = np.random.default_rng(3)
        s = make_sample(rng.uniform(0, 1, 40), rng.uniform(0.05, 0.95, 40))
        for x in (0.1, 0.5, 0.9):
            pi = nw_weights(x, s, 0.3)
            theta = moment_correction(x, s, pi)
            assert theta * float(pi @ s.w) == pytest.approx(0.5, abs=1e-15)


class TestDensity:
    def test_single_angle_symmetric_beta(self):
        s = make_sample([3.0], [0.37])
        surf = AngularSurface(s, TuningParams(b=0.5, nu=10.0, tau=1.0))
        # theta = 1/(2 W) forces the two shapes equal at nu/2 + tau.
        p, q = surf.shapes_at(-2.0)
        assert p[0] == pytest.approx(6.0, abs=1e-12)
        assert q[0] == pytest.approx(6.0, abs=1e-12)
        w = np.linspace(0.05, 0.95, 91)
        dens = angular_density(w, -2.0, surf)
        np.testing.assert_allclose(dens, dens[::-1], atol=1e-12)

    def test_stationary_reduction_matches_closed_form(self):
        rng = np.random.default_rng(5)
        wv = rng.uniform(0.05, 0.95, 40)
        s = make_sample(np.full(40, 7.0), wv)
        nu, tau = 24.0, 0.5
        surf = AngularSurface(s, TuningParams(b=1.0, nu=nu, tau=tau))
        theta = 0.5 / wv.mean()
        grid = np.linspace(0.005, 0.995, 100)
        closed = np.mean(
            stats.beta.pdf(
                grid[None, :], nu * theta * wv[:, None] + tau,
                nu * (1.0 - theta * wv[:, None]) + tau,
            ),
            axis=0,
        )
        # Any x inside the kernel-mass guard gives the same density.
        for x in (7.0, -4.0, 25.0):
            np.testing.assert_allclose(angular_density(grid, x, surf), closed, atol=1e-12)

    def test_stationary_far_extrapolation_guarded(self):
        s = make_sample(np.full(4, 7.0), [0.3, 0.5, 0.6, 0.7])
        surf = AngularSurface(s, TuningParams(b=0.1, nu=8.0, tau=1.0))
        with pytest.raises(ExtrapolationError):
            angular_density(0.5, 123.0, surf)

    def test_moment_constraint_random_instances(self):
        # Small-scale version of the acceptance sweep: independent
        # quadrature of the first moment with scipy's beta pdf.
        from evdep import feasible

        rng = np.random.default_rng(11)
        for _ in range(5):
            n = int(rng.integers(20, 120))
            s = make_sample(rng.uniform(0, 1, n), rng.uniform(0.02, 0.98, n))
            while True:
                params = TuningParams(
                    b=float(rng.uniform(0.1, 1.0)),
                    nu=float(rng.uniform(2, 100)),
                    tau=float(rng.uniform(0.5, 4.0)),
                )
                if feasible(params, s, "rxn", x_grid=np.linspace(0, 1, 7)):
                    break
            surf = AngularSurface(s, params)
            for x in rng.uniform(0, 1, 3):
                pi = surf.weights_at(float(x))
                p, q = surf.shapes_at(float(x))
                val, _ = integrate.quad(
                    lambda w: w * float(pi @ stats.beta.pdf(w, p, q)),
                    0.0, 1.0, limit=200,
                )
                assert val == pytest.approx(0.5, abs=1e-8)

    def test_mode_property_balanced_sample(self):
        # tau=1 puts each component's mode exactly at its angle when the
        # moment correction is 1 (balanced sample).
        s = make_sample([0.0, 0.0], [0.3, 0.7])
        surf = AngularSurface(s, TuningParams(b=1.0, nu=20.0, tau=1.0))
        p, q = surf.shapes_at(0.0)
        modes = (p - 1.0) / (p + q - 2.0)
        np.testing.assert_allclose(modes, [0.3, 0.7], atol=1e-14)

    def test_positivity_nw(self, logistic_sample, toy_params):
        surf = AngularSurface(logistic_sample, toy_params)
        grid = default_angle_grid()
        for x in np.linspace(-0.8, -0.3, 7):
            assert (angular_density(grid, float(x), surf) >= 0.0).all()

    def test_negative_ll_density_warns(self):
        s = make_sample([0.0, 0.05, 0.1, 1.0], [0.3, 0.4, 0.35, 0.9])
        surf = AngularSurface(s, TuningParams(b=0.5, nu=8.0, tau=0.0, weights="ll"))
        with pytest.warns(NegativeDensityWarning):
            dens = angular_density(default_angle_grid(), 1.6, surf)
        assert dens.min() < 0.0

    def test_rejects_boundary_angles(self, logistic_sample, toy_params):
        surf = AngularSurface(logistic_sample, toy_params)
        for w in (0.0, 1.0):
            with pytest.raises(DomainError):
                angular_density(w, -0.5, surf)


class TestCdf:
    def test_full_mass(self, logistic_sample, toy_params):
        surf = AngularSurface(logistic_sample, toy_params)
        assert angular_cdf(1.0, -0.5, surf) == pytest.approx(1.0, abs=1e-12)
        assert angular_cdf(0.0, -0.5, surf) == pytest.approx(0.0, abs=1e-12)

    def test_single_angle_median(self):
        s = make_sample([0.0], [0.62])
        surf = AngularSurface(s, TuningParams(b=1.0, nu=9.0, tau=0.5))
        assert angular_cdf(0.5, 0.0, surf) == pytest.approx(0.5, abs=1e-12)

    def test_derivative_matches_density(self, logistic_sample, toy_params):
        surf = AngularSurface(logistic_sample, toy_params)
        ws = np.linspace(0.1, 0.9, 17)
        eps = 1e-5
        x = -0.55
        deriv = (angular_cdf(ws + eps, x, surf) - angular_cdf(ws - eps, x, surf)) / (2 * eps)
        np.testing.assert_allclose(deriv, angular_density(ws, x, surf), atol=1e-4)


class TestSurfaceGrid:
    def test_single_cell_matches_direct(self, logistic_sample, toy_params):
        surf = AngularSurface(logistic_sample, toy_params)
        got = surface_grid(surf, np.array([-0.5]), np.array([0.3]))
        assert got.shape == (1, 1)
        assert got[0, 0] == pytest.approx(angular_density(0.3, -0.5, surf), abs=1e-14)

    def test_nonnegative_and_normalized_rows(self, logistic_sample, toy_params):
        surf = AngularSurface(logistic_sample, toy_params)
        xg = np.linspace(-0.8, -0.3, 9)
        wg = np.linspace(1e-4, 1.0 - 1e-4, 2001)
        vals = surface_grid(surf, xg, wg)
        assert (vals >= 0.0).all()
        masses = integrate.trapezoid(vals, wg, axis=1)
        np.testing.assert_allclose(masses, 1.0, atol=1e-6)
