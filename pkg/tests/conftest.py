import numpy as np
import pytest

from laebvm import ScoreFunction, esscher_scale, esscher_shift
from laebvm import models
from laebvm.priors import ScorePriorSampler


@pytest.fixture(scope="session")
def flat_shift_density():
    """eta(x) = exp(-x): the zero score tilted at alpha = 1."""
    return esscher_shift(ScoreFunction.constant(0.0, "half_line", bound=0.5), 1.0)


@pytest.fixture(scope="session")
def sine_shift_density():
    grid = np.linspace(0.0, 1.0, 257)
    score = ScoreFunction("half_line", grid, 0.4 * np.sin(3 * np.pi * grid), 0.5)
    return esscher_shift(score, 1.0)


@pytest.fixture(scope="session")
def flat_scale_density():
    """eta(x) = e^x/(e-1) on [0, 1]: the zero score tilted at S = 1."""
    return esscher_scale(ScoreFunction.constant(0.0, "unit_interval", bound=1.0), 1.0)


@pytest.fixture(scope="session")
def parametric_spec():
    return models.ModelSpec(kind=models.PARAMETRIC, theta0=0.0, lam=1.0)


@pytest.fixture(scope="session")
def shift_spec(flat_shift_density):
    return models.ModelSpec(kind=models.SEMI_SHIFT, theta0=0.0, eta0=flat_shift_density)


@pytest.fixture(scope="session")
def scale_spec(flat_scale_density):
    return models.ModelSpec(kind=models.SEMI_SCALE, theta0=2.0, eta0=flat_scale_density)


@pytest.fixture(scope="session")
def shift_prior_draws():
    """Twenty shift-kind densities drawn from the Brownian score prior."""
    from laebvm.nuisance import esscher_shift_many
    sampler = ScorePriorSampler(bound=0.5, variant="compactified", master_seed=2024)
    return esscher_shift_many(sampler.sample_scores(0, 20), 1.0)


@pytest.fixture(scope="session")
def scale_prior_draws():
    from laebvm.nuisance import esscher_scale_many
    sampler = ScorePriorSampler(bound=1.0, variant="unit_interval", master_seed=2025)
    return esscher_scale_many(sampler.sample_scores(0, 20), 1.0)
