import numpy as np
import pytest

from evdep import (
    AngleSample,
    CvConfig,
    TuningParams,
    covariate_grid_sampler,
    sample_angles,
    select_tuning,
    standard_models,
)


@pytest.fixture(scope="session")
def logistic_model():
    return standard_models()["logistic"]


@pytest.fixture(scope="session")
def logistic_sample(logistic_model):
    xs = covariate_grid_sampler(logistic_model.domain, 300, seed=2)
    return sample_angles(logistic_model, xs, seed=2)


@pytest.fixture(scope="session")
def toy_params():
    return TuningParams(b=0.2, nu=16.0, tau=0.5)


@pytest.fixture(scope="session")
def tuned_logistic(logistic_sample):
    return select_tuning(logistic_sample, CvConfig(budget=120, multistart=2))


def stationary_logistic_sample(alpha: float, n: int, seed: int) -> AngleSample:
    """Stationary pseudo-angles: identical covariates, constant alpha."""
    from scipy.special import ndtri

    from evdep import ConditionalModel, Link

    model = ConditionalModel(
        family="logistic", links=(Link("probit"),), domain=(-3.0, 3.0)
    )
    xs = np.full(n, float(ndtri(alpha)))
    return sample_angles(model, xs, seed=seed)
