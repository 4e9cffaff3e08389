"""Stationary deflection of an electrostatically actuated clamped plate.

The package solves the transformed-rectangle potential problem, evaluates the
mechanical and electrostatic energies, minimizes the mechanical energy on a
fixed-electrostatic-energy constraint set, and continues the small-deflection
solution branch in the applied voltage parameter.
"""

from .model import (DELTA_FLOOR, DeflectionProfile, Grid1D, Grid2D,
                    ModelParams, TouchdownError, d1, d2, d4, mechanical_energy,
                    quad1d, quad2d)
from .potential import (SolverError, TransformedPotential, solve_transformed,
                        traction)
from .energy import (EnergyReport, electrostatic_energy, energy_bounds,
                     energy_report, monotonicity_check, rescale_to_energy,
                     shape_derivative_check)
from .spectral import EigenPair, clamped_eigenpair, feasible_seed
from .profiles import PROFILE_NAMES, profile_catalog
from .optimizer import (MinimizeOptions, MinimizerResult, em_gradient,
                        extract_multiplier, kkt_residual,
                        least_squares_multiplier, minimize_mechanical,
                        verify_multiplier_bound, verify_pointwise_bound)
from .continuation import (BranchPoint, MultiplicityReport, continue_branch,
                           multiplicity_report, newton_solve)

__version__ = "0.1.0"

__all__ = [
    "BranchPoint", "DELTA_FLOOR", "DeflectionProfile", "EigenPair",
    "EnergyReport", "Grid1D", "Grid2D", "MinimizeOptions", "MinimizerResult",
    "ModelParams", "MultiplicityReport", "PROFILE_NAMES", "SolverError",
    "TouchdownError", "TransformedPotential", "clamped_eigenpair",
    "continue_branch", "d1", "d2", "d4", "electrostatic_energy",
    "em_gradient", "energy_bounds", "energy_report", "extract_multiplier",
    "feasible_seed", "kkt_residual", "least_squares_multiplier",
    "mechanical_energy", "minimize_mechanical", "monotonicity_check",
    "multiplicity_report", "newton_solve", "profile_catalog", "quad1d",
    "quad2d", "rescale_to_energy", "shape_derivative_check",
    "solve_transformed", "traction", "verify_multiplier_bound",
    "verify_pointwise_bound", "__version__",
]
