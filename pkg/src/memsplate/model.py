"""Grids, Simpson quadrature, clamped difference stencils and mechanical energy.

Deflections live on a uniform grid over [-1, 1] with an odd number of nodes so
that composite Simpson weights apply and x = 0 is a node. Clamped boundary
conditions u(+-1) = u'(+-1) = 0 close every stencil by even ghost reflection
(u[-1] == u[1]), which is the single derivative convention used throughout the
package.
"""

import numpy as np

# Closest approach to the ground plate that any profile may have: the gap
# 1 + u must stay above DELTA_FLOOR everywhere.
DELTA_FLOOR = 1e-6


class TouchdownError(ValueError):
    """Profile (or a profile produced mid-iteration) got too close to z = -1."""


class ModelParams:
    """Physical constants: bending beta > 0, tension tau >= 0, self-stretching
    a >= 0 and aspect ratio epsilon > 0."""

    def __init__(self, beta=1.0, tau=0.0, a=0.0, epsilon=1.0):
        beta, tau, a, epsilon = map(float, (beta, tau, a, epsilon))
        if not beta > 0.0:
            raise ValueError(f"beta must be positive, got {beta}")
        if tau < 0.0:
            raise ValueError(f"tau must be nonnegative, got {tau}")
        if a < 0.0:
            raise ValueError(f"a must be nonnegative, got {a}")
        if not epsilon > 0.0:
            raise ValueError(f"epsilon must be positive, got {epsilon}")
        self.beta = beta
        self.tau = tau
        self.a = a
        self.epsilon = epsilon

    def __repr__(self):
        return (f"ModelParams(beta={self.beta}, tau={self.tau}, "
                f"a={self.a}, epsilon={self.epsilon})")


def _check_node_count(n, name="n"):
    n = int(n)
    if n < 5 or n % 2 == 0:
        raise ValueError(f"{name} must be odd and >= 5, got {n}")
    return n


def _simpson_weights(n, h, dtype=np.float64):
    w = np.full(n, 2, dtype=dtype)
    w[1::2] = 4
    w[0] = w[-1] = 1
    return w * (np.asarray(h).astype(dtype) / dtype(3))


class Grid1D:
    """Uniform nodes on [-1, 1]; n odd, h = 2/(n-1), x = 0 is a node."""

    def __init__(self, n):
        self.n = _check_node_count(n)
        self.h = 2.0 / (self.n - 1)
        self.nodes = np.linspace(-1.0, 1.0, self.n)
        self.weights = _simpson_weights(self.n, self.h)

    def __repr__(self):
        return f"Grid1D(n={self.n})"


class Grid2D:
    """Tensor grid on [-1, 1] x [0, 1] (x by eta), both node counts odd."""

    def __init__(self, nx, neta):
        self.nx = _check_node_count(nx, "nx")
        self.neta = _check_node_count(neta, "neta")
        self.hx = 2.0 / (self.nx - 1)
        self.heta = 1.0 / (self.neta - 1)
        self.x = np.linspace(-1.0, 1.0, self.nx)
        self.eta = np.linspace(0.0, 1.0, self.neta)
        self.wx = _simpson_weights(self.nx, self.hx)
        self.weta = _simpson_weights(self.neta, self.heta)

    def __repr__(self):
        return f"Grid2D(nx={self.nx}, neta={self.neta})"


def quad1d(samples, grid):
    """Composite Simpson integral of nodal samples over [-1, 1].

    Exact (to roundoff) for polynomials of degree <= 3; O(h^4) otherwise.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (grid.n,):
        raise ValueError(f"expected {grid.n} samples, got shape {samples.shape}")
    return float(grid.weights @ samples)


def quad2d(samples, grid):
    """Tensor Simpson integral over [-1, 1] x [0, 1]; samples shaped (nx, neta)."""
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (grid.nx, grid.neta):
        raise ValueError(f"expected shape {(grid.nx, grid.neta)}, "
                         f"got {samples.shape}")
    return float(grid.wx @ samples @ grid.weta)


def _deriv1(values, h):
    # Centered first difference; ghost reflection v[-1] = v[1] at the ends
    # makes the boundary derivative exactly zero (clamped convention).
    out = np.empty_like(values)
    out[1:-1] = (values[2:] - values[:-2]) / (2.0 * h)
    out[0] = 0.0
    out[-1] = 0.0
    return out


def _deriv2(values, h):
    # Neighbor sum first: keeps d2 of an even array exactly even in floats.
    out = np.empty_like(values)
    out[1:-1] = ((values[2:] + values[:-2]) - 2.0 * values[1:-1]) / (h * h)
    # Ghost reflection at the ends: (v[1] - 2 v[0] + v[-1]) / h^2 with
    # v[-1] = v[1]. First-order there unless u''' vanishes at the wall.
    out[0] = 2.0 * (values[1] - values[0]) / (h * h)
    out[-1] = 2.0 * (values[-2] - values[-1]) / (h * h)
    return out


def _deriv4(values, h):
    # Fourth difference on interior nodes with ghost reflection next to the
    # walls; the two wall rows carry boundary conditions, not equations, and
    # are set to zero.
    out = np.zeros_like(values)
    h4 = h ** 4
    out[2:-2] = ((values[:-4] + values[4:])
                 - 4.0 * (values[1:-3] + values[3:-1])
                 + 6.0 * values[2:-2]) / h4
    # i = 1: ghost v[-1] = v[1].
    out[1] = (values[1] - 4.0 * values[0] + 6.0 * values[1]
              - 4.0 * values[2] + values[3]) / h4
    out[-2] = (values[-2] - 4.0 * values[-1] + 6.0 * values[-2]
               - 4.0 * values[-3] + values[-4]) / h4
    return out


class DeflectionProfile:
    """Nodal deflection values on a Grid1D.

    Admissible profiles satisfy -1 < u <= 0 with the gap floor DELTA_FLOOR;
    clamped profiles additionally vanish at x = +-1 (the discrete u'(+-1) = 0
    is built into the stencil convention). Constant solver-test profiles such
    as u == c are representable, so clamping is checked by the operations that
    need it rather than by the constructor.
    """

    def __init__(self, grid, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.n,):
            raise ValueError(f"expected {grid.n} values, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("profile values must be finite")
        self.grid = grid
        self.values = values
        self._du = None
        self._d2u = None

    @property
    def du(self):
        if self._du is None:
            self._du = _deriv1(self.values, self.grid.h)
        return self._du

    @property
    def d2u(self):
        if self._d2u is None:
            self._d2u = _deriv2(self.values, self.grid.h)
        return self._d2u

    @property
    def admissible(self):
        v = self.values
        return bool(v.max() <= 0.0 and v.min() > -1.0 + DELTA_FLOOR)

    @property
    def clamped(self):
        return self.values[0] == 0.0 and self.values[-1] == 0.0

    def min_gap(self):
        return float(1.0 + self.values.min())

    def __repr__(self):
        return (f"DeflectionProfile(n={self.grid.n}, min={self.values.min():.6g}, "
                f"max={self.values.max():.6g})")


def d1(profile):
    """Discrete first derivative (centered, clamped ghost closure)."""
    return _deriv1(profile.values, profile.grid.h)


def d2(profile):
    """Discrete second derivative (centered, clamped ghost closure)."""
    return _deriv2(profile.values, profile.grid.h)


def d4(profile):
    """Discrete fourth derivative on interior nodes; wall rows are zero."""
    return _deriv4(profile.values, profile.grid.h)


def l2_inner(f, g, grid):
    """Simpson-weighted discrete L2 inner product on [-1, 1]."""
    return float(grid.weights @ (np.asarray(f) * np.asarray(g)))


def l2_norm(f, grid):
    return float(np.sqrt(max(l2_inner(f, f, grid), 0.0)))


def symmetrize(values):
    """Even part of a nodal array; exact mirror symmetry in floating point."""
    return 0.5 * (values + values[::-1])


def evenness_error(values):
    return float(np.max(np.abs(values - values[::-1])))


def require_admissible(profile, context=""):
    """Raise unless -1 + DELTA_FLOOR < u <= 0 everywhere."""
    v = profile.values
    where = f" ({context})" if context else ""
    if v.max() > 0.0:
        raise ValueError(f"profile must be nonpositive{where}: max = {v.max():.3e}")
    if v.min() <= -1.0 + DELTA_FLOOR:
        raise TouchdownError(
            f"profile gap {1.0 + v.min():.3e} at or below floor "
            f"{DELTA_FLOOR:.1e}{where}")


def mechanical_energy(u, p):
    """E_m(u) = (beta/2)||d2 u||^2 + (1/2)(tau + (a/2)||d1 u||^2)||d1 u||^2.

    Norms are Simpson-weighted discrete L2 norms; u must be admissible.
    """
    require_admissible(u, "mechanical_energy")
    grid = u.grid
    nd2 = l2_inner(u.d2u, u.d2u, grid)
    nd1 = l2_inner(u.du, u.du, grid)
    return 0.5 * p.beta * nd2 + 0.5 * (p.tau + 0.5 * p.a * nd1) * nd1
