"""Energies on the transformed rectangle, their bounds and identities.

The electrostatic energy of an admissible deflection u is evaluated entirely
on the rectangle: with Phi the transformed potential and U = u_x/(1+u),

    E_e(u) = int int [ eps^2 (Phi_x - eta U (1+Phi_eta))^2
                       + ((1+Phi_eta)/(1+u))^2 ] (1+u) deta dx,

which is the physical Dirichlet integral pushed through the gap-normalizing
map (the Jacobian contributes the factor 1+u). The flat gap gives exactly 2
and a uniform gap 1+c gives 2/(1+c).
"""

import numpy as np

from .model import (DELTA_FLOOR, DeflectionProfile, mechanical_energy,
                    quad1d, quad2d)
from .potential import (SolverError, gradient_arrays, solve_transformed,
                        trace_deta_top, traction)

# Radial-rescaling stopping rule: |E_e(t u) - rho| <= RESCALE_RTOL * rho.
RESCALE_RTOL = 1e-8
RESCALE_MAX_ITER = 60


class EnergyReport:
    """E_m, E_e and the sandwich 2 <= lower_bound <= E_e <= upper_bound."""

    def __init__(self, E_m, E_e, lower_bound, upper_bound, identity_residual):
        self.E_m = E_m
        self.E_e = E_e
        self.lower_bound = lower_bound
        self.upper_bound = upper_bound
        self.identity_residual = identity_residual

    def __repr__(self):
        return (f"EnergyReport(E_m={self.E_m:.6g}, E_e={self.E_e:.6g}, "
                f"lower_bound={self.lower_bound:.6g}, "
                f"upper_bound={self.upper_bound:.6g}, "
                f"identity_residual={self.identity_residual:.3e})")


def electrostatic_energy(u, p, potential):
    """Rectangle quadrature of the transformed Dirichlet integrand."""
    grid = potential.grid
    if u.grid.n != grid.nx:
        raise ValueError(f"profile grid n={u.grid.n} != nx={grid.nx}")
    phix, phie = gradient_arrays(potential)
    one_pu = (1.0 + u.values)[:, None]
    U = (u.du / (1.0 + u.values))[:, None]
    eta = potential.grid.eta[None, :]
    w = (p.epsilon ** 2 * (phix - eta * U * (1.0 + phie)) ** 2
         + ((1.0 + phie) / one_pu) ** 2) * one_pu
    return quad2d(w, grid)


def energy_bounds(u, p):
    """(int dx/(1+u), int (1+eps^2 u_x^2) dx/(1+u)): the E_e sandwich."""
    inv = 1.0 / (1.0 + u.values)
    lower = quad1d(inv, u.grid)
    upper = quad1d((1.0 + p.epsilon ** 2 * u.du ** 2) * inv, u.grid)
    return lower, upper


def boundary_identity_residual(u, p, potential):
    """|[-int u (1+eps^2 u_x^2) d_z psi(x, u) dx] - [E_e(u) - 2]|.

    Both sides are evaluated independently: the left from the traction-style
    plate trace, the right from the rectangle energy quadrature.
    """
    dzpsi_top = (1.0 + trace_deta_top(potential)) / (1.0 + u.values)
    lhs = -quad1d(u.values * (1.0 + p.epsilon ** 2 * u.du ** 2) * dzpsi_top,
                  u.grid)
    rhs_val = electrostatic_energy(u, p, potential) - 2.0
    return abs(lhs - rhs_val)


def energy_report(u, p, grid):
    """Solve once and assemble the full report for (u, p) on `grid`."""
    potential = solve_transformed(u, p, grid)
    lower, upper = energy_bounds(u, p)
    return EnergyReport(
        E_m=mechanical_energy(u, p),
        E_e=electrostatic_energy(u, p, potential),
        lower_bound=lower,
        upper_bound=upper,
        identity_residual=boundary_identity_residual(u, p, potential))


def shape_derivative_check(u, v, p, grid, s):
    """Centered finite difference of E_e along v against -int g(u) v dx.

    Returns (fd, analytic, gap). The perturbed profiles u +- s v must stay
    admissible; v is a direction profile on the same grid.
    """
    if v.grid.n != u.grid.n:
        raise ValueError("direction grid mismatch")
    up = DeflectionProfile(u.grid, u.values + s * v.values)
    um = DeflectionProfile(u.grid, u.values - s * v.values)
    # The energy extends smoothly to any positive-gap profile, so only the
    # gap needs guarding; the sign constraint may be crossed by u - s v.
    for pert in (up, um):
        if pert.min_gap() <= DELTA_FLOOR:
            raise ValueError("perturbed profile loses the positive gap")
    ep = electrostatic_energy(up, p, solve_transformed(up, p, grid))
    em = electrostatic_energy(um, p, solve_transformed(um, p, grid))
    fd = (ep - em) / (2.0 * s)
    g = traction(u, p, solve_transformed(u, p, grid)).values
    analytic = -quad1d(g * v.values, u.grid)
    return fd, analytic, abs(fd - analytic)


def illinois_root(f, lo, hi, flo, fhi, ftol, maxiter=RESCALE_MAX_ITER,
                  hint=None):
    """Safeguarded regula falsi (Illinois variant) on a bracket with
    f(lo) <= 0 <= f(hi); stops when |f| <= ftol. Returns (t, f(t))."""
    if flo > 0.0 or fhi < 0.0:
        raise ValueError(f"root not bracketed: f({lo})={flo:.3e}, "
                         f"f({hi})={fhi:.3e}")
    if abs(flo) <= ftol:
        return lo, flo
    if abs(fhi) <= ftol:
        return hi, fhi
    side = 0
    for k in range(maxiter):
        if k == 0 and hint is not None and lo < hint < hi:
            t = hint
        else:
            t = (lo * fhi - hi * flo) / (fhi - flo)
            if not (lo < t < hi):
                t = 0.5 * (lo + hi)
        ft = f(t)
        if abs(ft) <= ftol:
            return t, ft
        if ft > 0.0:
            hi, fhi = t, ft
            if side == 1:
                flo *= 0.5
            side = 1
        else:
            lo, flo = t, ft
            if side == -1:
                fhi *= 0.5
            side = -1
    raise SolverError(f"scalar root refinement stalled above |f|<={ftol:.1e} "
                      f"after {maxiter} evaluations")


def _rescale_with_potential(u, p, rho, grid, hint=None):
    """Radial restoration onto {E_e = rho}: find t in [0, 1] with
    |E_e(t u) - rho| <= RESCALE_RTOL * rho.

    Returns (t, potential_at_t, evals) where evals lists the (t, E_e(t u))
    pairs in evaluation order; its length is the restoration solve count.
    """
    if not rho > 2.0:
        raise ValueError(f"rho must exceed 2, got {rho}")
    # Never let the stopping band swallow the whole bracket when rho sits
    # just above the flat-gap level J(0) = 2 (keeps t > 0 for rho -> 2+).
    ftol = min(RESCALE_RTOL * rho, 0.5 * (rho - 2.0))
    cache = {}
    evals = []

    def J_minus_rho(t):
        prof = DeflectionProfile(u.grid, t * u.values)
        pot = solve_transformed(prof, p, grid)
        cache[t] = pot
        val = electrostatic_energy(prof, p, pot)
        evals.append((t, val))
        return val - rho

    # A profile that touches the ground plate has no evaluable energy at
    # t = 1; pull the bracket top inside so the scaled gap is at least 1e-3.
    if u.min_gap() > DELTA_FLOOR:
        t_cap = 1.0
    else:
        t_cap = (1.0 - 1e-3) / -float(np.min(u.values))
    f_cap = J_minus_rho(t_cap)
    if abs(f_cap) <= ftol:
        return t_cap, cache[t_cap], evals
    if f_cap < 0.0:
        raise ValueError(
            f"radial level set unreachable: E_e(t u) = {f_cap + rho:.6g} at "
            f"bracket top t = {t_cap:.6g}, below rho = {rho:.6g}")
    # J(0) = 2 exactly (flat gap), no solve needed for the left endpoint.
    t, _ = illinois_root(J_minus_rho, 0.0, t_cap, 2.0 - rho, f_cap, ftol,
                         hint=hint)
    return t, cache[t], evals


def rescale_to_energy(u, p, rho, grid, hint=None):
    """Scale factor t with E_e(t u) = rho to relative tolerance 1e-8.

    Requires rho > 2 and a ray that reaches the level set: the monotone map
    t -> E_e(t u) is bracketed on [0, 1], shortened to keep a positive gap
    when u itself touches the ground plate. Raises ValueError otherwise.
    """
    t, _, _ = _rescale_with_potential(u, p, rho, grid, hint=hint)
    return t


def monotonicity_check(u1, u2, p, grid, rtol=1e-9):
    """u1 <= u2 pointwise (1e-12 slack) must give E_e(u2) <= E_e(u1).

    Returns True when the ordering holds within rtol; raises ValueError for
    unordered inputs.
    """
    if np.any(u2.values - u1.values < -1e-12):
        raise ValueError("profiles are not pointwise ordered (u1 <= u2)")
    e1 = electrostatic_energy(u1, p, solve_transformed(u1, p, grid))
    e2 = electrostatic_energy(u2, p, solve_transformed(u2, p, grid))
    return e2 <= e1 + rtol * max(1.0, abs(e1))
