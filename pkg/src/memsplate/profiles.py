"""Named deflection profiles used by the drivers and the checks."""

import numpy as np

from .model import DeflectionProfile
from .spectral import clamped_eigenpair

PROFILE_NAMES = ("zero", "quartic", "sextic", "eigen")


def profile_catalog(name, amplitude, grid, params=None):
    """Build a catalog profile: all are clamped, even and nonpositive.

    zero     flat plate (amplitude ignored),
    quartic  -amplitude * (1 - x^2)^2,
    sextic   -amplitude * (1 - x^2)^3,
    eigen    amplitude * phi1 for the operator set by `params`.

    amplitude must lie in [0, 1) so the profile keeps a positive gap.
    """
    if name not in PROFILE_NAMES:
        raise ValueError(f"unknown profile {name!r}, "
                         f"expected one of {PROFILE_NAMES}")
    if name != "zero" and not 0.0 <= amplitude < 1.0:
        raise ValueError(f"amplitude must be in [0, 1), got {amplitude}")
    x = grid.nodes
    if name == "zero":
        values = np.zeros(grid.n)
    elif name == "quartic":
        values = -amplitude * (1.0 - x ** 2) ** 2
    elif name == "sextic":
        values = -amplitude * (1.0 - x ** 2) ** 3
    else:
        if params is None:
            raise ValueError("eigen profile needs model parameters")
        values = amplitude * clamped_eigenpair(params, grid).phi1.values
    return DeflectionProfile(grid, values)
