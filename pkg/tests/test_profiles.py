"""Catalog profiles: shapes, normalization, and argument validation."""

import numpy as np
import pytest

from memsplate import Grid1D, ModelParams, PROFILE_NAMES, profile_catalog

P05 = ModelParams(beta=1.0, tau=0.0, a=0.0, epsilon=0.5)


def test_catalog_names_cover_all_shapes():
    assert PROFILE_NAMES == ("zero", "quartic", "sextic", "eigen")


@pytest.mark.parametrize("name", PROFILE_NAMES)
def test_catalog_profiles_clamped_even_nonpositive(name):
    grid = Grid1D(65)
    u = profile_catalog(name, 0.4, grid, params=P05)
    assert u.values[0] == 0.0 and u.values[-1] == 0.0
    assert np.abs(u.values - u.values[::-1]).max() <= 1e-12
    assert u.values.max() <= 0.0
    assert u.values.min() > -1.0


def test_catalog_minimum_values():
    grid = Grid1D(129)
    quart = profile_catalog("quartic", 0.5, grid)
    assert quart.values.min() == pytest.approx(-0.5, abs=1e-14)
    sext = profile_catalog("sextic", 0.25, grid)
    assert sext.values.min() == pytest.approx(-0.25, abs=1e-14)
    eig = profile_catalog("eigen", 0.3, grid, params=P05)
    assert eig.values.min() == pytest.approx(-0.3, abs=1e-12)
    zero = profile_catalog("zero", 0.7, grid)
    assert np.all(zero.values == 0.0)


def test_catalog_rejects_unknown_name():
    with pytest.raises(ValueError):
        profile_catalog("cubic", 0.5, Grid1D(65))


def test_catalog_rejects_amplitude_outside_unit_interval():
    grid = Grid1D(65)
    for bad in (-0.1, 1.0, 1.5):
        with pytest.raises(ValueError):
            profile_catalog("quartic", bad, grid)


def test_catalog_eigen_requires_params():
    with pytest.raises(ValueError):
        profile_catalog("eigen", 0.3, Grid1D(65))
