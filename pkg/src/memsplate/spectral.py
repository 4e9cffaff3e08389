"""Clamped fourth-order operator: banded forms, ground eigenpair, seeds.

The operator A = beta d4 - tau d2 acting on interior values of clamped
profiles (ghost reflection at the walls) is symmetric positive definite and
pentadiagonal. Its smallest eigenvalue mu1 with even, nonpositive
eigenfunction phi1 (normalized to min phi1 = -1) drives both the seed
construction and several optimizer diagnostics.
"""

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from .model import DeflectionProfile, quad1d
from .potential import SolverError, solve_transformed
from .energy import electrostatic_energy, illinois_root

EIGEN_RTOL = 1e-10
EIGEN_MAX_ITER = 200
SEED_RTOL = 1e-6
SEED_BRACKET_TOP = 0.999


class EigenPair:
    """Ground eigenvalue mu1 and eigenprofile phi1 with min = -1."""

    def __init__(self, mu1, phi1, residual):
        self.mu1 = mu1
        self.phi1 = phi1
        self.residual = residual

    def __repr__(self):
        return (f"EigenPair(mu1={self.mu1:.12g}, "
                f"residual={self.residual:.3e})")


def _stencil_bands(beta, tau, h, m, dtype=np.float64):
    """Pentadiagonal bands (main, first, second) of beta d4 - tau d2 on the
    m interior nodes, ghost-reflected at both walls."""
    beta = dtype(beta)
    tau = dtype(tau)
    h2 = dtype(h) * dtype(h)
    h4 = h2 * h2
    main = np.full(m, dtype(6.0) * beta / h4 + dtype(2.0) * tau / h2,
                   dtype=dtype)
    # Ghost reflection u[-1] = u[1] adds one unit of beta/h^4 at the walls.
    main[0] += beta / h4
    main[-1] += beta / h4
    off1 = np.full(m - 1, dtype(-4.0) * beta / h4 - tau / h2, dtype=dtype)
    off2 = np.full(m - 2, beta / h4, dtype=dtype)
    return main, off1, off2


def clamped_operator_banded(p, grid):
    """Upper banded form (scipy `ab`, shape (3, n-2)) of beta d4 - tau d2."""
    m = grid.n - 2
    main, off1, off2 = _stencil_bands(p.beta, p.tau, grid.h, m)
    ab = np.zeros((3, m))
    ab[0, 2:] = off2
    ab[1, 1:] = off1
    ab[2, :] = main
    return ab


def clamped_factor(p, grid, tau_effective=None):
    """Banded Cholesky factor of beta d4 - tau_eff d2 (defaults tau_eff=tau).

    The returned factor feeds `clamped_solve`; tau_effective supports the
    stiffness tau + a ||u_x||^2 used as a preconditioner elsewhere.
    """
    ab = clamped_operator_banded(p, grid)
    if tau_effective is not None:
        m = grid.n - 2
        main, off1, _ = _stencil_bands(p.beta, tau_effective, grid.h, m)
        ab[2, :] = main
        ab[1, 1:] = off1
    return cholesky_banded(ab)


def clamped_solve(factor, rhs_interior):
    """Solve A x = rhs on interior nodes given a `clamped_factor` result."""
    return cho_solve_banded((factor, False), rhs_interior)


def _apply_pentadiagonal(main, off1, off2, x):
    y = main * x
    y[:-1] += off1 * x[1:]
    y[1:] += off1 * x[:-1]
    y[:-2] += off2 * x[2:]
    y[2:] += off2 * x[:-2]
    return y


def _ldlt_pentadiagonal(main, off1, off2):
    """LDL^T factorization of an SPD pentadiagonal matrix (longdouble path).

    Returns (D, L1, L2) with unit lower bidiagonals L1 (first) and L2
    (second subdiagonal).
    """
    m = main.shape[0]
    dt = main.dtype
    D = np.empty(m, dtype=dt)
    L1 = np.zeros(max(m - 1, 0), dtype=dt)
    L2 = np.zeros(max(m - 2, 0), dtype=dt)
    for i in range(m):
        di = main[i]
        if i >= 1:
            di -= L1[i - 1] * L1[i - 1] * D[i - 1]
        if i >= 2:
            di -= L2[i - 2] * L2[i - 2] * D[i - 2]
        if di <= 0.0:
            raise SolverError("pentadiagonal factorization lost positivity")
        D[i] = di
        if i + 1 < m:
            v = off1[i]
            if i >= 1:
                v -= L1[i - 1] * L2[i - 1] * D[i - 1]
            L1[i] = v / di
        if i + 2 < m:
            L2[i] = off2[i] / di
    return D, L1, L2


def _ldlt_solve(D, L1, L2, b):
    m = b.shape[0]
    y = b.copy()
    for i in range(1, m):
        y[i] -= L1[i - 1] * y[i - 1]
        if i >= 2:
            y[i] -= L2[i - 2] * y[i - 2]
    y /= D
    for i in range(m - 2, -1, -1):
        y[i] -= L1[i] * y[i + 1]
        if i + 2 < m:
            y[i] -= L2[i] * y[i + 2]
    return y


def clamped_eigenpair(p, grid):
    """Ground pair of beta d4 - tau d2 on clamped interior nodes.

    Inverse iteration with a banded Cholesky factor, then a few shifted
    steps in extended precision so the reported residual

        || A phi1 - mu1 phi1 ||_{L2, Simpson}

    reflects the rounded float64 data rather than iteration slack. phi1 is
    even to the bit, nonpositive, and scaled so its minimum is exactly -1.
    """
    m = grid.n - 2
    factor = clamped_factor(p, grid)
    xi = grid.nodes[1:-1]
    x = -(1.0 - xi ** 2) ** 2
    x /= np.linalg.norm(x)
    mu = np.inf
    for _ in range(EIGEN_MAX_ITER):
        y = clamped_solve(factor, x)
        mu_new = (x @ y) / (y @ y)
        x = y / np.linalg.norm(y)
        if abs(mu_new - mu) <= EIGEN_RTOL * abs(mu_new):
            mu = mu_new
            break
        mu = mu_new
    else:
        raise SolverError("eigen iteration did not settle")

    # Extended-precision polish: shifted inverse steps push the rounding
    # floor of the iterate below the float64 representation error.
    ld = np.longdouble
    main, off1, off2 = _stencil_bands(p.beta, p.tau, grid.h, m, dtype=ld)
    sigma = ld(0.9) * ld(mu)
    D, L1, L2 = _ldlt_pentadiagonal(main - sigma, off1, off2)
    z = x.astype(ld)
    for _ in range(3):
        z = _ldlt_solve(D, L1, L2, z)
        z /= np.sqrt(z @ z)
    z = ld(0.5) * (z + z[::-1])
    if z[m // 2] > 0.0:
        z = -z
    z /= -z.min()

    values = np.zeros(grid.n)
    values[1:-1] = z.astype(np.float64)
    phi1 = DeflectionProfile(grid, values)

    # Rayleigh quotient and Simpson-weighted residual of the rounded data,
    # both accumulated in extended precision.
    v = values[1:-1].astype(ld)
    Av = _apply_pentadiagonal(main, off1, off2, v)
    w = grid.weights[1:-1].astype(ld)
    mu1 = (v @ (w * Av)) / (v @ (w * v))
    r = Av - mu1 * v
    residual = float(np.sqrt(r @ (w * r)))
    return EigenPair(float(mu1), phi1, residual)


def feasible_seed(rho, p, grid, grid2, eigenpair=None):
    """Even admissible profile eta * phi1 with E_e = rho (rel. tol 1e-6).

    The amplitude eta solves E_e(eta phi1) = rho on [0, 0.999] by the same
    safeguarded root iteration used for radial rescaling; eta is recoverable
    from the result as -min(seed). Raises ValueError when rho <= 2 or when
    the bracket cannot reach rho (reported with the achieved range).
    """
    if not rho > 2.0:
        raise ValueError(f"rho must exceed 2, got {rho}")
    eig = eigenpair if eigenpair is not None else clamped_eigenpair(p, grid)

    def J_minus_rho(eta):
        prof = DeflectionProfile(grid, eta * eig.phi1.values)
        pot = solve_transformed(prof, p, grid2)
        return electrostatic_energy(prof, p, pot) - rho

    ftop = J_minus_rho(SEED_BRACKET_TOP)
    if ftop < 0.0:
        raise ValueError(
            f"rho = {rho:.6g} unreachable along phi1: E_e spans "
            f"[2, {ftop + rho:.6g}] on [0, {SEED_BRACKET_TOP}]")
    # Clamp the stop band below rho - 2 so eta stays strictly positive even
    # when rho barely exceeds the flat-gap energy 2.
    ftol = min(SEED_RTOL * rho, 0.5 * (rho - 2.0))
    eta, _ = illinois_root(J_minus_rho, 0.0, SEED_BRACKET_TOP, 2.0 - rho,
                           ftop, ftol)
    return DeflectionProfile(grid, eta * eig.phi1.values)
