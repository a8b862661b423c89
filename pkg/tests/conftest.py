import numpy as np
import pytest

from squintless.model import Scenario, Source, synthesize
from squintless.solver import admm_solve

DESK_ANGLES = [(0.10, 0.15), (0.45, 0.60)]


def desk_scenario(seed=2024, n=9, n_freq=2, angles=DESK_ANGLES):
    rng = np.random.default_rng(seed)
    srcs = [Source(wr, wt, np.exp(2j * np.pi * rng.random(n_freq)) / np.sqrt(n_freq))
            for wr, wt in angles]
    return Scenario(n, n, n_freq, srcs)


def random_phase_scenario(n, angles, n_freq, seed=0):
    return desk_scenario(seed, n, n_freq, angles)


@pytest.fixture(scope="session")
def desk():
    scen = desk_scenario()
    y = synthesize(scen)
    return scen, y, admm_solve(y)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
