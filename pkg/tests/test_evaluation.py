import math

import numpy as np
import pytest

from evdep import (
    AngularSurface,
    ConditionalModel,
    CvConfig,
    DomainError,
    EmptySampleError,
    GridSpec,
    Link,
    iae,
    miae_study,
    standard_models,
)


class _OffsetModel:
    """Truth evaluator shifted by a constant; a known-error oracle."""

    def __init__(self, model: ConditionalModel, offset: float):
        self._model = model
        self._offset = offset

    def density_grid(self, x_grid, w_grid):
        return self._model.density_grid(x_grid, w_grid) + self._offset


@pytest.fixture(scope="module")
def unit_domain_model():
    return ConditionalModel(
        family="logistic", links=(Link("probit"),), domain=(0.0, 1.0)
    )


class TestIae:
    def test_truth_against_itself_is_zero(self, unit_domain_model):
        assert iae(unit_domain_model, unit_domain_model) == 0.0

    def test_constant_offset_integrates_exactly(self, unit_domain_model):
        # Trapezoid of a constant 0.1 over a unit covariate domain and the
        # clipped angle interval of width 1022/1024.
        shifted = _OffsetModel(unit_domain_model, 0.1)
        expected = 0.1 * 1.0 * (1022.0 / 1024.0)
        assert iae(shifted, unit_domain_model) == pytest.approx(expected, abs=1e-12)

    def test_covariate_domain_scales_offset_error(self):
        model = standard_models()["sdir"]
        shifted = _OffsetModel(model, 0.1)
        expected = 0.1 * (4.0 - 0.8) * (1022.0 / 1024.0)
        assert iae(shifted, model) == pytest.approx(expected, rel=1e-10)

    def test_grid_refinement_stable(self, logistic_sample, toy_params, logistic_model):
        surf = AngularSurface(logistic_sample, toy_params)
        coarse = iae(surf, logistic_model)
        fine = iae(surf, logistic_model, GridSpec(w_nodes=1025))
        assert coarse == pytest.approx(fine, rel=0.02)

    def test_rejects_unknown_surface_object(self, logistic_model):
        with pytest.raises(DomainError):
            iae(object(), logistic_model)

    def test_grid_spec_validation(self):
        with pytest.raises(DomainError):
            GridSpec(x_nodes=1)
        with pytest.raises(DomainError):
            GridSpec(clip=0.6)


@pytest.fixture(scope="module")
def small_report(logistic_model):
    return miae_study(
        logistic_model,
        n=60,
        reps=3,
        cv_config=CvConfig(budget=40, multistart=2),
        seed=5,
    )


class TestMiaeStudy:
    def test_deterministic(self, logistic_model, small_report):
        again = miae_study(
            logistic_model,
            n=60,
            reps=3,
            cv_config=CvConfig(budget=40, multistart=2),
            seed=5,
        )
        assert again.value == small_report.value
        assert again.per_replicate == small_report.per_replicate

    def test_report_invariants(self, small_report):
        assert small_report.value == pytest.approx(
            float(np.mean(small_report.per_replicate)), rel=1e-15
        )
        assert small_report.n_replicates == len(small_report.per_replicate) == 3
        assert small_report.failures == ()
        assert small_report.grid_spec == (201, 513)
        assert small_report.clip == 1.0 / 1024.0
        assert all(v >= 0.0 for v in small_report.per_replicate)
        assert small_report.mc_se == pytest.approx(
            float(np.std(small_report.per_replicate, ddof=1) / math.sqrt(3)), rel=1e-12
        )

    def test_uniform_design_runs(self, logistic_model):
        report = miae_study(
            logistic_model,
            n=60,
            reps=1,
            cv_config=CvConfig(budget=30, multistart=1),
            seed=2,
            design="uniform",
        )
        assert report.value >= 0.0
        assert math.isnan(report.mc_se)

    def test_needs_replicates(self, logistic_model):
        with pytest.raises(EmptySampleError):
            miae_study(logistic_model, n=60, reps=0)
