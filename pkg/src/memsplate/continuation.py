"""Small-voltage solution branch and the minimizer-vs-branch comparison.

A stationary deflection at voltage parameter lam solves

    F(u, lam) = beta d4 u - (tau + a ||d1 u||^2) d2 u + lam g(u) = 0

with clamped ends; for small lam a branch U_lam grows smoothly out of the
flat state. Natural-parameter stepping with a Newton corrector traces it;
corrector divergence is reported (not silently swallowed) as the numerical
proxy for approaching pull-in, where solutions cease to exist. Convergence
is certified on an extended-precision stencil evaluation because the float64
d4 cancellation floor at n = 129 sits at the 1e-8 tolerance.
"""

import warnings

import numpy as np

from .model import (DeflectionProfile, Grid2D, _deriv2, _deriv4, d2, d4,
                    l2_norm, symmetrize)
from .potential import SolverError, solve_transformed, traction
from .energy import electrostatic_energy
from .optimizer import (FEASIBILITY_RTOL, MinimizeOptions, _even_expand,
                        minimize_mechanical)
from .spectral import clamped_eigenpair

NEWTON_TOL = 1e-8
NEWTON_MAX_ITER = 30
FD_STEP = 1e-6


class BranchPoint:
    """One accepted branch point (lam, U_lam) with its certificate."""

    def __init__(self, lam, u, E_e, sup_norm, newton_residual):
        self.lam = lam
        self.u = u
        self.E_e = E_e
        self.sup_norm = sup_norm
        self.newton_residual = newton_residual

    def __repr__(self):
        return (f"BranchPoint(lam={self.lam:.6g}, sup={self.sup_norm:.6g}, "
                f"E_e={self.E_e:.8g}, res={self.newton_residual:.2e})")


def residual(u, lam, p, phi):
    """F(u, lam) = beta d4 u - (tau + a ||d1 u||^2) d2 u + lam g(u).

    Interior rows only; the wall rows carry the clamped conditions and are
    zeroed. phi must be the transformed potential for u.
    """
    g = traction(u, p, phi).values
    stiffness = p.tau + p.a * l2_norm(u.du, u.grid) ** 2
    out = p.beta * d4(u) - stiffness * d2(u) + lam * g
    out[0] = out[-1] = 0.0
    return out


def _residual_extended(values, lam, g, stiffness, p, h):
    """Residual with the stencil part in longdouble (g stays float64; only
    the h^-4 cancellation needs the extra bits)."""
    v = values.astype(np.longdouble)
    out = (np.longdouble(p.beta) * _deriv4(v, h)
           - np.longdouble(stiffness) * _deriv2(v, h)
           + np.longdouble(lam) * g.astype(np.longdouble))
    out[0] = out[-1] = 0.0
    return out


def newton_solve(lam, u0, p, grid2=None, tol=NEWTON_TOL,
                 max_iter=NEWTON_MAX_ITER):
    """Newton-correct u0 to the branch point at fixed lam.

    Column-wise finite-difference Jacobian over the even interior subspace
    (step 1e-6 (1 + ||u||_inf)), dense solve, residual-decrease damping,
    symmetrization each step. Converged means ||F||_inf <= tol on the
    extended-precision evaluation. Raises SolverError on divergence.
    """
    if lam < 0.0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    grid = u0.grid
    if grid2 is None:
        grid2 = Grid2D(grid.n, (grid.n + 1) // 2)
    m = grid.n - 2
    k = (m + 1) // 2

    def evaluate(values):
        prof = DeflectionProfile(grid, values)
        pot = solve_transformed(prof, p, grid2)
        g = traction(prof, p, pot).values
        stiffness = p.tau + p.a * l2_norm(prof.du, grid) ** 2
        F = p.beta * d4(prof) - stiffness * d2(prof) + lam * g
        F[0] = F[-1] = 0.0
        res = float(np.abs(_residual_extended(
            values, lam, g, stiffness, p, grid.h)).max())
        return F, res, prof, pot

    values = symmetrize(u0.values.copy())
    values[0] = values[-1] = 0.0
    F, res, prof, pot = evaluate(values)
    for _ in range(max_iter):
        if res <= tol:
            if prof.values[1:-1].max() > 0.0:
                raise SolverError(
                    f"Newton converged above the obstacle at lam={lam:.6g} "
                    f"(max u = {prof.values.max():.3e})")
            e_e = electrostatic_energy(prof, p, pot)
            return BranchPoint(lam, prof, e_e,
                               float(np.abs(prof.values).max()), res)
        delta = FD_STEP * (1.0 + np.abs(values).max())
        jac = np.empty((k, k))
        for j in range(k):
            pert = values.copy()
            pert[1 + j] += delta
            if 1 + j != grid.n - 2 - j:
                pert[grid.n - 2 - j] += delta
            Fj = evaluate(pert)[0]
            jac[:, j] = (Fj[1:k + 1] - F[1:k + 1]) / delta
        try:
            step = np.linalg.solve(jac, -F[1:k + 1])
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"branch Jacobian singular at lam={lam:.6g}: "
                              f"{exc}")
        full = np.zeros(grid.n)
        full[1:-1] = _even_expand(step, m)
        scale = 1.0
        while scale >= 1.0 / 64.0:
            try:
                trial = evaluate(symmetrize(values + scale * full))
            except (SolverError, ValueError):
                scale *= 0.5
                continue
            if trial[1] <= (1.0 - 1e-4 * scale) * res:
                values = symmetrize(values + scale * full)
                F, res, prof, pot = trial
                break
            scale *= 0.5
        else:
            raise SolverError(
                f"Newton corrector stalled at lam={lam:.6g} "
                f"(residual {res:.3e}); consistent with pull-in proximity")
    raise SolverError(
        f"Newton did not converge at lam={lam:.6g} within {max_iter} "
        f"iterations (residual {res:.3e})")


def continue_branch(lambda_max, steps, p, grid, grid2=None, tol=NEWTON_TOL):
    """Trace U_lam from lam = 0 to lambda_max in `steps` uniform steps.

    Each point warm-starts from the previous one. On corrector failure the
    branch halts early with a warning; the returned list holds every
    accepted point, so len(points) == steps + 1 iff the target was reached.
    """
    if steps < 2:
        raise ValueError(f"steps must be >= 2, got {steps}")
    if lambda_max < 0.0:
        raise ValueError(f"lambda_max must be nonnegative, got {lambda_max}")
    points = []
    u = DeflectionProfile(grid, np.zeros(grid.n))
    for lam in np.linspace(0.0, lambda_max, steps + 1):
        try:
            point = newton_solve(float(lam), u, p, grid2, tol)
        except SolverError as exc:
            warnings.warn(f"branch halted before lam={lam:.6g}: {exc}")
            break
        points.append(point)
        u = point.u
    return points


class MultiplicityReport:
    """Constrained minimizer vs branch solution at the same multiplier."""

    def __init__(self, rho, lambda_rho, u_rho, u_branch, sup_diff, e_gap,
                 e_minimizer, e_branch, tolerance):
        self.rho = rho
        self.lambda_rho = lambda_rho
        self.u_rho = u_rho
        self.u_branch = u_branch
        self.sup_diff = sup_diff
        self.e_gap = e_gap
        self.e_minimizer = e_minimizer
        self.e_branch = e_branch
        self.tolerance = tolerance
        self.demonstrated = bool(e_gap > 10.0 * tolerance)

    def scalars(self):
        """JSON-ready summary (profiles excluded)."""
        return {
            "rho": self.rho,
            "lambda_rho": self.lambda_rho,
            "sup_diff": self.sup_diff,
            "e_gap": self.e_gap,
            "E_e_minimizer": self.e_minimizer,
            "E_e_branch": self.e_branch,
            "tolerance": self.tolerance,
            "multiplicity_demonstrated": self.demonstrated,
        }

    def __repr__(self):
        return (f"MultiplicityReport(rho={self.rho:.6g}, "
                f"lambda_rho={self.lambda_rho:.6g}, e_gap={self.e_gap:.6g}, "
                f"demonstrated={self.demonstrated})")


def multiplicity_report(rho, p, grid, grid2=None, steps=10, minimizer=None):
    """Minimize at level rho, continue the branch to lambda_rho, compare.

    Two distinct stationary states at the same voltage demonstrate
    multiplicity; the witness is the E_e gap rho - E_e(U_lambda_rho)
    exceeding 10x the feasibility tolerance. Pass a precomputed `minimizer`
    (MinimizerResult at the same rho and grids) to skip re-minimizing.
    Raises SolverError when the branch halts before lambda_rho.
    """
    if not rho > 2.0:
        raise ValueError(f"rho must exceed 2, got {rho}")
    if minimizer is None:
        opts = MinimizeOptions(grid, grid2 if grid2 is not None
                               else Grid2D(grid.n, (grid.n + 1) // 2),
                               eigenpair=clamped_eigenpair(p, grid))
        minimizer = minimize_mechanical(rho, p, opts)
    lam_rho = minimizer.lambda_rho
    branch = continue_branch(lam_rho, steps, p, grid, grid2)
    if len(branch) != steps + 1:
        reached = branch[-1].lam if branch else 0.0
        raise SolverError(
            f"branch reached lam={reached:.6g}, short of "
            f"lambda_rho={lam_rho:.6g}; multiplicity not comparable")
    tip = branch[-1]
    sup_diff = float(np.abs(minimizer.u_rho.values - tip.u.values).max())
    return MultiplicityReport(
        rho=rho,
        lambda_rho=lam_rho,
        u_rho=minimizer.u_rho,
        u_branch=tip.u,
        sup_diff=sup_diff,
        e_gap=float(rho - tip.E_e),
        e_minimizer=minimizer.E_e,
        e_branch=tip.E_e,
        tolerance=FEASIBILITY_RTOL * rho)
