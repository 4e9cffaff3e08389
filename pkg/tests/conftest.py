"""Shared fixtures: baseline parameters and the mixed-shape profile corpus."""

import numpy as np
import pytest

from memsplate.model import Grid1D, ModelParams
from memsplate.profiles import profile_catalog

BASE_PARAMS = ModelParams(beta=1.0, tau=0.0, a=0.0, epsilon=0.5)
CORPUS_SEED = 12345


def build_corpus(n, count=50, seed=CORPUS_SEED, params=BASE_PARAMS):
    """Deterministic corpus cycling quartic/sextic/eigen shapes with
    amplitudes drawn uniformly from [0.05, 0.8)."""
    grid = Grid1D(n)
    rng = np.random.default_rng(seed)
    shapes = ("quartic", "sextic", "eigen")
    return [profile_catalog(shapes[i % 3], float(rng.uniform(0.05, 0.8)),
                            grid, params)
            for i in range(count)]


@pytest.fixture(scope="session")
def base_params():
    return BASE_PARAMS


@pytest.fixture(scope="session")
def corpus129():
    return build_corpus(129)
