"""Clamped-operator eigenpair and feasible-seed checks.

The continuum ground eigenvalue of u'''' on (-1,1) with clamped ends is
mu1 = k^4 where k is the smallest positive root of cos(2k) cosh(2k) = 1
(k ~ 2.3650203724, mu1 ~ 31.2852439); the root is recomputed here with a
bracketing solver as the oracle. Discrete mu1 converges at second order,
measured -5.0e-4 relative at n=129 and -1.26e-4 at n=257.
"""

import numpy as np
import pytest
from scipy.optimize import brentq

from memsplate import (DeflectionProfile, Grid1D, Grid2D, ModelParams,
                       clamped_eigenpair, electrostatic_energy, feasible_seed,
                       solve_transformed)
from memsplate.model import d2, d4, evenness_error, l2_norm
from memsplate.spectral import (clamped_factor, clamped_operator_banded,
                                clamped_solve)

P = ModelParams(beta=1.0, tau=0.0, a=0.0, epsilon=0.5)


def continuum_mu1():
    k = brentq(lambda t: np.cos(2.0 * t) * np.cosh(2.0 * t) - 1.0,
               2.2, 2.5, xtol=1e-14)
    return k ** 4


# ------------------------------------------------------------ eigenpair

def test_mu1_matches_transcendental_oracle():
    ref = continuum_mu1()
    assert ref == pytest.approx(31.2852439, abs=1e-6)
    eig = clamped_eigenpair(P, Grid1D(257))
    assert eig.mu1 == pytest.approx(ref, rel=1e-3)


def test_mu1_second_order_convergence():
    ref = continuum_mu1()
    errs = [abs(clamped_eigenpair(P, Grid1D(n)).mu1 - ref)
            for n in (65, 129, 257)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.2)


def test_eigen_residual_below_contract():
    eig = clamped_eigenpair(P, Grid1D(257))
    assert eig.residual <= 1e-8 * eig.mu1


def test_eigen_residual_consistent_with_stencils():
    # Recompute the residual from the public d2/d4 wrappers (float64 path,
    # so allow headroom above the extended-precision figure).
    eig = clamped_eigenpair(P, Grid1D(257))
    phi = eig.phi1
    r = P.beta * d4(phi) - P.tau * d2(phi) - eig.mu1 * phi.values
    r[0] = r[-1] = 0.0
    assert l2_norm(r, phi.grid) <= 5e-7
    assert np.abs(r).max() <= 1e-4 * eig.mu1


def test_phi1_normalization_sign_and_symmetry():
    eig = clamped_eigenpair(P, Grid1D(257))
    v = eig.phi1.values
    assert v.min() == -1.0
    assert np.all(v <= 1e-12)
    assert evenness_error(v) <= 1e-10
    assert v[0] == 0.0 and v[-1] == 0.0
    assert eig.phi1.admissible is False  # touches the ground plate


def test_mu1_linear_in_beta_and_monotone_in_tau():
    g = Grid1D(257)
    base = clamped_eigenpair(ModelParams(1.0, 0.0, 0.0, 0.5), g).mu1
    doubled = clamped_eigenpair(ModelParams(2.0, 0.0, 0.0, 0.5), g).mu1
    stiffened = clamped_eigenpair(ModelParams(1.0, 10.0, 0.0, 0.5), g).mu1
    assert doubled == pytest.approx(2.0 * base, rel=1e-8)
    assert stiffened > base


def test_banded_operator_matches_dense_application():
    g = Grid1D(65)
    p = ModelParams(beta=1.3, tau=0.7, a=0.0, epsilon=0.5)
    ab = clamped_operator_banded(p, g)
    rng = np.random.default_rng(3)
    w = rng.standard_normal(g.n - 2)
    u = DeflectionProfile(g, np.concatenate(([0.0], w, [0.0])))
    ref = (p.beta * d4(u) - p.tau * d2(u))[1:-1]
    m = g.n - 2
    dense = np.zeros((m, m))
    dense[np.arange(m), np.arange(m)] = ab[2]
    dense[np.arange(m - 1), np.arange(1, m)] = ab[1, 1:]
    dense[np.arange(1, m), np.arange(m - 1)] = ab[1, 1:]
    dense[np.arange(m - 2), np.arange(2, m)] = ab[0, 2:]
    dense[np.arange(2, m), np.arange(m - 2)] = ab[0, 2:]
    # Entries scale like beta/h^4 ~ 1e6, so the atol is ~1e-12 relative.
    assert np.allclose(dense @ w, ref, rtol=1e-10, atol=1e-6)


def test_clamped_solve_inverts_operator():
    g = Grid1D(129)
    factor = clamped_factor(P, g)
    rhs = np.sin(np.pi * g.nodes[1:-1])
    sol = clamped_solve(factor, rhs)
    u = DeflectionProfile(g, np.concatenate(([0.0], sol, [0.0])))
    back = (P.beta * d4(u) - P.tau * d2(u))[1:-1]
    assert np.allclose(back, rhs, atol=1e-8)


# --------------------------------------------------------- feasible seed

def test_seed_meets_constraint_and_is_admissible():
    g = Grid1D(129)
    grid2 = Grid2D(129, 65)
    seed = feasible_seed(3.0, P, g, grid2)
    e = electrostatic_energy(seed, P, solve_transformed(seed, P, grid2))
    assert e == pytest.approx(3.0, rel=1e-6)
    assert seed.admissible
    assert evenness_error(seed.values) <= 1e-10


def test_seed_amplitude_strictly_increasing_in_rho():
    g = Grid1D(129)
    grid2 = Grid2D(129, 65)
    eig = clamped_eigenpair(P, g)
    etas = [-feasible_seed(rho, P, g, grid2, eigenpair=eig).values.min()
            for rho in (2.01, 2.1, 3.0, 10.0)]
    assert all(a < b for a, b in zip(etas, etas[1:]))
    assert etas[0] < 0.05  # eta -> 0 as rho -> 2


def test_seed_ray_energy_blows_up_near_touchdown():
    g = Grid1D(129)
    grid2 = Grid2D(129, 65)
    phi1 = clamped_eigenpair(P, g).phi1

    def J(eta):
        u = DeflectionProfile(g, eta * phi1.values)
        return electrostatic_energy(u, P, solve_transformed(u, P, grid2))

    j5, j9, j99 = J(0.5), J(0.9), J(0.99)
    assert j5 < j9 < j99
    assert j99 > 5.0 * j5


def test_seed_error_cases():
    g = Grid1D(129)
    grid2 = Grid2D(129, 65)
    eig = clamped_eigenpair(P, g)
    with pytest.raises(ValueError):
        feasible_seed(2.0, P, g, grid2, eigenpair=eig)
    with pytest.raises(ValueError, match="unreachable"):
        feasible_seed(1e6, P, g, grid2, eigenpair=eig)
