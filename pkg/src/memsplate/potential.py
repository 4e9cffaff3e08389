"""Electrostatic potential on the transformed unit-gap rectangle.

The physical potential psi solves eps^2 psi_xx + psi_zz = 0 between the ground
plate z = -1 and the deflected plate z = u(x), with psi = (1+z)/(1+u) on the
boundary. Mapping (x, z) -> (x, eta), eta = (1+z)/(1+u(x)), and splitting off
the linear background, Phi = psi - eta solves

    eps^2 Phi_xx - 2 eps^2 eta U Phi_xeta
        + (1 + eps^2 eta^2 u_x^2)/(1+u)^2 Phi_etaeta
        + eps^2 eta (2U^2 - u_xx/(1+u)) Phi_eta
        = eps^2 eta (dU - U^2),        U = u_x/(1+u),

on (-1,1) x (0,1) with Phi = 0 on all four edges. Everything here is a
second-order centered finite-difference discretization of that problem; the
mixed term uses the 4-point cross stencil.
"""

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .model import DELTA_FLOOR, TouchdownError, _deriv1

# Direct-solve residual guard, relative to the forcing norm.
SOLVER_RTOL = 1e-10


class SolverError(RuntimeError):
    """Linear solve failed its residual check."""


class CoefficientField:
    """Profile-derived coefficient samples on the x-grid."""

    def __init__(self, grid, U, dU, inv1pu, du, d2u):
        self.grid = grid
        self.U = U
        self.dU = dU
        self.inv1pu = inv1pu
        self.du = du
        self.d2u = d2u


class TransformedPotential:
    """Phi samples on a Grid2D, zero on all four edges."""

    def __init__(self, grid, phi, residual=0.0):
        self.grid = grid
        self.phi = phi
        self.residual = residual


class Traction:
    """Electrostatic pull g(u) >= 0 sampled on the profile's x-grid."""

    def __init__(self, grid, values):
        self.grid = grid
        self.values = values


def coefficients(u):
    """U = u_x/(1+u), dU (same stencil as d1 applied to U) and 1/(1+u).

    Raises TouchdownError when the gap 1 + u dips to DELTA_FLOOR.
    """
    v = u.values
    if v.min() <= -1.0 + DELTA_FLOOR:
        raise TouchdownError(
            f"gap {1.0 + v.min():.3e} at or below floor {DELTA_FLOOR:.1e}")
    inv1pu = 1.0 / (1.0 + v)
    U = u.du * inv1pu
    dU = _deriv1(U, u.grid.h)
    return CoefficientField(u.grid, U, dU, inv1pu, u.du, u.d2u)


def _interior_index(grid):
    ni, nj = grid.nx - 2, grid.neta - 2
    return ni, nj, np.arange(ni * nj).reshape(ni, nj)


def assemble(u, p, grid):
    """Sparse interior matrix of the transformed operator (lexicographic,
    x-major). Dirichlet values are zero, so eliminated columns drop out."""
    if u.grid.n != grid.nx:
        raise ValueError(f"profile grid n={u.grid.n} != nx={grid.nx}")
    c = coefficients(u)
    eps2 = p.epsilon ** 2
    hx, he = grid.hx, grid.heta
    eta = grid.eta

    ni, nj, idx = _interior_index(grid)
    # Coefficient grids on interior nodes; x varies along rows.
    etaI = eta[1:-1]
    inv = c.inv1pu[1:-1, None]
    du = c.du[1:-1, None]
    d2u = c.d2u[1:-1, None]
    U = c.U[1:-1, None]
    cee = (1.0 + eps2 * etaI[None, :] ** 2 * du ** 2) * inv ** 2
    cxe = -2.0 * eps2 * etaI[None, :] * U
    ceta = eps2 * etaI[None, :] * (2.0 * U ** 2 - d2u * inv)

    center = (-2.0 * eps2 / hx ** 2) + (-2.0 / he ** 2) * cee
    east = np.full((ni, nj), eps2 / hx ** 2)
    north = cee / he ** 2 + ceta / (2.0 * he)
    south = cee / he ** 2 - ceta / (2.0 * he)
    corner = cxe / (4.0 * hx * he)

    rows, cols, vals = [], [], []

    def add(block, di, dj):
        src = idx[max(0, -di):ni - max(0, di), max(0, -dj):nj - max(0, dj)]
        dst = idx[max(0, di):ni + min(0, di), max(0, dj):nj + min(0, dj)]
        blk = block[max(0, -di):ni - max(0, di), max(0, -dj):nj - max(0, dj)]
        rows.append(src.ravel())
        cols.append(dst.ravel())
        vals.append(blk.ravel())

    add(center, 0, 0)
    add(east, 1, 0)
    add(east, -1, 0)
    add(north, 0, 1)
    add(south, 0, -1)
    add(corner, 1, 1)
    add(-corner, 1, -1)
    add(-corner, -1, 1)
    add(corner, -1, -1)

    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(ni * nj, ni * nj))
    return A.tocsr()


def rhs(u, p, grid):
    """Forcing f_u = eps^2 eta (dU - U^2) sampled on the full grid."""
    if u.grid.n != grid.nx:
        raise ValueError(f"profile grid n={u.grid.n} != nx={grid.nx}")
    c = coefficients(u)
    return (p.epsilon ** 2) * np.outer(c.dU - c.U ** 2, grid.eta)


def solve_transformed(u, p, grid, forcing=None):
    """Direct sparse solve of the transformed problem; Phi = 0 on the edges.

    `forcing` overrides the operator forcing on the full grid (verification
    hook for manufactured solutions); default is rhs(u, p, grid).
    """
    A = assemble(u, p, grid)
    f = rhs(u, p, grid) if forcing is None else np.asarray(forcing, dtype=float)
    b = f[1:-1, 1:-1].ravel()
    ni, nj, _ = _interior_index(grid)

    if not np.any(b):
        phi_int = np.zeros(ni * nj)
        rel = 0.0
    else:
        phi_int = spsolve(A, b)
        rel = float(np.linalg.norm(A @ phi_int - b) / np.linalg.norm(b))
        if not np.isfinite(rel) or rel > SOLVER_RTOL:
            raise SolverError(f"elliptic solve residual {rel:.3e} exceeds "
                              f"{SOLVER_RTOL:.1e}")
    phi = np.zeros((grid.nx, grid.neta))
    phi[1:-1, 1:-1] = phi_int.reshape(ni, nj)
    return TransformedPotential(grid, phi, rel)


def trace_deta_top(potential):
    """One-sided second-order d_eta Phi at eta = 1, per x-node."""
    phi, he = potential.phi, potential.grid.heta
    return (3.0 * phi[:, -1] - 4.0 * phi[:, -2] + phi[:, -3]) / (2.0 * he)


def traction(u, p, potential):
    """g(u) = (1 + eps^2 u_x^2) ((1 + d_eta Phi(x,1))/(1+u))^2 on the x-grid.

    Nonnegative by construction; equals eps^2 psi_x^2 + psi_z^2 evaluated on
    the plate, using psi == 1 along the plate to trade x- for z-derivatives.
    """
    tr = trace_deta_top(potential)
    inv = 1.0 / (1.0 + u.values)
    g = (1.0 + p.epsilon ** 2 * u.du ** 2) * ((1.0 + tr) * inv) ** 2
    return Traction(u.grid, g)


def gradient_arrays(potential):
    """(Phi_x, Phi_eta) on the full grid: centered interior, one-sided
    second-order rows at the edges."""
    phi = potential.phi
    hx, he = potential.grid.hx, potential.grid.heta
    px = np.empty_like(phi)
    px[1:-1, :] = (phi[2:, :] - phi[:-2, :]) / (2.0 * hx)
    px[0, :] = (-3.0 * phi[0, :] + 4.0 * phi[1, :] - phi[2, :]) / (2.0 * hx)
    px[-1, :] = (3.0 * phi[-1, :] - 4.0 * phi[-2, :] + phi[-3, :]) / (2.0 * hx)
    pe = np.empty_like(phi)
    pe[:, 1:-1] = (phi[:, 2:] - phi[:, :-2]) / (2.0 * he)
    pe[:, 0] = (-3.0 * phi[:, 0] + 4.0 * phi[:, 1] - phi[:, 2]) / (2.0 * he)
    pe[:, -1] = (3.0 * phi[:, -1] - 4.0 * phi[:, -2] + phi[:, -3]) / (2.0 * he)
    return px, pe


def recover_physical(u, potential, x, z):
    """psi = Phi + eta at physical points (x, z), bilinear in (x, eta).

    Raises ValueError for queries outside the closure of the gap region.
    """
    grid = potential.grid
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(x < -1.0 - 1e-12) or np.any(x > 1.0 + 1e-12):
        raise ValueError("x outside [-1, 1]")
    ux = np.interp(x, u.grid.nodes, u.values)
    if np.any(z < -1.0 - 1e-10) or np.any(z > ux + 1e-10):
        raise ValueError("point outside the gap region")
    eta = (1.0 + z) / (1.0 + ux)
    eta = np.clip(eta, 0.0, 1.0)

    tx = (x + 1.0) / grid.hx
    i0 = np.clip(np.floor(tx).astype(int), 0, grid.nx - 2)
    ax = tx - i0
    te = eta / grid.heta
    j0 = np.clip(np.floor(te).astype(int), 0, grid.neta - 2)
    ae = te - j0

    phi = potential.phi
    val = ((1 - ax) * (1 - ae) * phi[i0, j0]
           + ax * (1 - ae) * phi[i0 + 1, j0]
           + (1 - ax) * ae * phi[i0, j0 + 1]
           + ax * ae * phi[i0 + 1, j0 + 1])
    return val + eta
