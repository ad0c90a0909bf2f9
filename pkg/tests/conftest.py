import numpy as np
import pytest

from poisson_deconv import ObservationSet, epanechnikov, scenario, simulate_observation


@pytest.fixture(scope="session")
def epan():
    return epanechnikov()


@pytest.fixture(scope="session")
def unisym():
    return scenario("beta-unisym")


@pytest.fixture()
def small_obs(unisym):
    """A reproducible medium-size observation set on [0, 1]."""
    return simulate_observation(unisym, 500, 0.05, 123)


def random_observation(rng, n_points=None, a=None, T=1.0, n=None):
    """An arbitrary (not scenario-driven) observation set for property tests."""
    n_points = int(rng.integers(1, 200)) if n_points is None else n_points
    a = float(rng.uniform(0.02, 0.3)) if a is None else a
    n = int(rng.integers(1, 50)) if n is None else n
    points = rng.uniform(-2 * a, T + 2 * a, n_points)
    return ObservationSet(points, n, a, T)
