import numpy as np
import pytest

from ergmax import (effective_observable, parse_map_spec, parse_observable,
                    solve_subaction)


@pytest.fixture(scope="session")
def doubling():
    return parse_map_spec("linear:k=2")


@pytest.fixture(scope="session")
def tripling():
    return parse_map_spec("linear:k=3")


@pytest.fixture(scope="session")
def perturbed():
    return parse_map_spec("perturbed:k=2,a=0.05")


@pytest.fixture(scope="session")
def cos_obs():
    return parse_observable("cos(2*pi*x)")


@pytest.fixture(scope="session")
def cos_eff(doubling, cos_obs):
    """Effective observable of cos(2*pi*x) on the doubling map, solved once."""
    sub = solve_subaction(doubling, cos_obs, 1 << 14)
    return effective_observable(doubling, cos_obs, sub)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260815)
