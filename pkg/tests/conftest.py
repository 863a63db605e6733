import os

import hypothesis
import numpy as np
import pytest

from vcselect.models import Dataset
from vcselect.schemas import ScenarioSpec
from vcselect.simulate import simulate_dataset

hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.register_profile("ci", max_examples=40, deadline=None)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "ci"))


def within_se(draws, expected, se_factor=4.0, variance=None):
    """Sample mean within se_factor Monte Carlo standard errors of expected."""
    draws = np.asarray(draws, dtype=float)
    variance = draws.var(ddof=1) if variance is None else variance
    se = np.sqrt(variance / draws.shape[0])
    return abs(draws.mean() - expected) <= se_factor * se


@pytest.fixture
def micro_dataset():
    """n=20, p=2 with one active curve; small enough for dense oracles."""
    rng = np.random.default_rng(11)
    n = 20
    x = rng.standard_normal((n, 2))
    v = rng.uniform(size=n)
    y = 1.0 + np.sin(2 * np.pi * v) + 2.0 * v * x[:, 0] + 0.3 * rng.standard_normal(n)
    return Dataset.from_predictors(y, x, v)


@pytest.fixture
def clinical_dataset():
    rng = np.random.default_rng(5)
    n = 15
    x = rng.standard_normal((n, 3))
    e = rng.standard_normal((n, 2))
    v = rng.uniform(size=n)
    y = x[:, 0] + e @ np.array([1.0, -1.0]) + rng.standard_normal(n)
    return Dataset.from_predictors(y, x, v, e)


@pytest.fixture
def small_simulation():
    return simulate_dataset(ScenarioSpec(n=60, p=5, seed=7))
