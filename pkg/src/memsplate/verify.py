"""Fast deterministic invariant suite behind `memsplate` mode=verify.

Each check prints one PASS/FAIL line with the measured value against its
bound and contributes a structured row for verify.json. For a fixed seed
every quantity is reproducible, so repeated runs write byte-identical
files (the suite renders no figures).
"""

import hashlib

import numpy as np

from .continuation import continue_branch, multiplicity_report, newton_solve
from .energy import (boundary_identity_residual, electrostatic_energy,
                     energy_bounds, monotonicity_check, rescale_to_energy,
                     shape_derivative_check)
from .model import (DeflectionProfile, Grid1D, Grid2D, ModelParams,
                    evenness_error, mechanical_energy)
from .optimizer import (MinimizeOptions, em_gradient, kkt_residual,
                        minimize_mechanical, verify_multiplier_bound,
                        verify_pointwise_bound)
from .potential import solve_transformed, traction
from .profiles import profile_catalog
from .spectral import clamped_eigenpair, feasible_seed

DEFAULT_SEED = 12345
# Frozen clamped-plate ground eigenvalue: k^4 with cos(2k) cosh(2k) = 1.
K_REFERENCE = 2.365020372431352
# sha256 of the seeded check corpus (profile values, float64 bytes); guards
# against silent drift in the generator or the eigen solver.
CORPUS_SHA256 = ("9963fde6d53a5f5fe2697b360e8b920767d8154a9d7ad1a4e0231ada"
                 "0a3e26bb")


def _corpus(grid, count, seed, params):
    rng = np.random.default_rng(seed)
    shapes = ("quartic", "sextic", "eigen")
    return [profile_catalog(shapes[i % 3], float(rng.uniform(0.05, 0.8)),
                            grid, params)
            for i in range(count)]


def _record(checks, name, measured, bound, relation="<="):
    measured = float(measured)
    bound = float(bound)
    if relation == "<=":
        ok = measured <= bound
    elif relation == ">":
        ok = measured > bound
    else:
        ok = measured == bound
    checks.append({"name": name, "measured": measured, "bound": bound,
                   "relation": relation, "passed": bool(ok)})
    print(f"{'PASS' if ok else 'FAIL'} {name}: "
          f"{measured:.6e} {relation} {bound:.6e}")
    return ok


def run_suite(seed=DEFAULT_SEED):
    """Run every check; returns (checks, all_passed)."""
    p = ModelParams(beta=1.0, tau=0.0, a=0.0, epsilon=0.5)
    grid65, grid2_65 = Grid1D(65), Grid2D(65, 33)
    grid129, grid2_129 = Grid1D(129), Grid2D(129, 65)
    checks = []

    # -- gap energy and traction on reference states -------------------
    flat = DeflectionProfile(grid129, np.zeros(grid129.n))
    pot_flat = solve_transformed(flat, p, grid2_129)
    _record(checks, "flat-potential-zero", np.abs(pot_flat.phi).max(), 0.0)
    e_flat = electrostatic_energy(flat, p, pot_flat)
    _record(checks, "flat-gap-energy", abs(e_flat - 2.0), 1e-6)
    g_flat = traction(flat, p, pot_flat).values
    _record(checks, "flat-traction-unit", np.abs(g_flat - 1.0).max(), 1e-6)

    half = DeflectionProfile(grid129, np.full(grid129.n, -0.5))
    pot_half = solve_transformed(half, p, grid2_129)
    e_half = electrostatic_energy(half, p, pot_half)
    _record(checks, "uniform-gap-energy", abs(e_half - 4.0), 1e-6)
    g_half = traction(half, p, pot_half).values
    _record(checks, "uniform-traction", np.abs(g_half - 4.0).max(), 1e-6)

    # -- energy bounds and monotonicity on the seeded corpus -----------
    corpus = _corpus(grid65, 10, seed, p)
    h2 = grid65.h ** 2
    worst = -np.inf
    for u in corpus:
        e_e = electrostatic_energy(u, p, solve_transformed(u, p, grid2_65))
        lower, upper = energy_bounds(u, p)
        worst = max(worst,
                    (2.0 - 10.0 * h2) - lower,
                    lower - (e_e + 10.0 * h2),
                    (e_e + 10.0 * h2) - (upper + 20.0 * h2))
    _record(checks, "energy-bound-chain", worst, 0.0)

    if seed == DEFAULT_SEED and CORPUS_SHA256 is not None:
        digest = hashlib.sha256()
        for u in corpus:
            digest.update(np.ascontiguousarray(u.values).tobytes())
        match = 0.0 if digest.hexdigest() == CORPUS_SHA256 else 1.0
        _record(checks, "corpus-digest", match, 0.0)

    eig65 = clamped_eigenpair(p, grid65)
    rng = np.random.default_rng(seed + 1)
    violations = 0
    for _ in range(5):
        s, t = np.sort(rng.uniform(0.0, 0.9, size=2))
        if t - s < 1e-3:
            t = min(0.9, s + 0.1)
        deeper = DeflectionProfile(grid65, t * eig65.phi1.values)
        shallower = DeflectionProfile(grid65, s * eig65.phi1.values)
        if not monotonicity_check(deeper, shallower, p, grid2_65):
            violations += 1
    _record(checks, "energy-monotonicity", violations, 0.0)

    quartic = profile_catalog("quartic", 0.8, grid65)
    t = rescale_to_energy(quartic, p, 3.7, grid2_65)
    scaled = DeflectionProfile(grid65, t * quartic.values)
    e_scaled = electrostatic_energy(scaled, p,
                                    solve_transformed(scaled, p, grid2_65))
    _record(checks, "radial-rescale", abs(e_scaled - 3.7) / 3.7, 1e-8)

    # -- first variation and the boundary flux identity ----------------
    u_sd = profile_catalog("quartic", 0.4, grid129)
    x = grid129.nodes
    v_sd = DeflectionProfile(
        grid129, (1.0 - x ** 2) ** 2 * (0.3 + 0.2 * np.cos(np.pi * x)))
    _, analytic, gap = shape_derivative_check(u_sd, v_sd, p, grid2_129, 1e-3)
    _record(checks, "shape-derivative", gap / abs(analytic), 1e-3)

    u_id = profile_catalog("quartic", 0.5, grid129)
    res_id = boundary_identity_residual(u_id, p,
                                        solve_transformed(u_id, p, grid2_129))
    _record(checks, "boundary-identity", res_id, 1e-2)

    # -- spectral oracle ------------------------------------------------
    eig129 = clamped_eigenpair(p, grid129)
    k4 = K_REFERENCE ** 4
    _record(checks, "eigenvalue-reference", abs(eig129.mu1 / k4 - 1.0), 1e-3)
    phi = eig129.phi1.values
    shape_err = max(abs(phi.min() + 1.0), evenness_error(phi),
                    max(phi.max(), 0.0))
    _record(checks, "eigenprofile-shape", shape_err, 1e-10)
    _record(checks, "eigen-residual", eig129.residual, 1e-8 * eig129.mu1)

    seed3 = feasible_seed(3.0, p, grid65, grid2_65, eigenpair=eig65)
    e_seed = electrostatic_energy(seed3, p,
                                  solve_transformed(seed3, p, grid2_65))
    _record(checks, "seed-feasibility", abs(e_seed - 3.0), 3e-6)

    # -- stationarity machinery ------------------------------------------
    zero65 = DeflectionProfile(grid65, np.zeros(grid65.n))
    _record(checks, "gradient-flat-zero",
            np.abs(em_gradient(zero65, p)).max(), 0.0)

    pot0 = solve_transformed(zero65, p, grid2_65)
    lam_probe = 0.7
    formula = lam_probe * np.sqrt(2.0 - 2.0 * grid65.h / 3.0)
    kkt0 = kkt_residual(zero65, lam_probe, p, pot0)
    _record(checks, "stationarity-flat-formula",
            abs(kkt0 - formula) / formula, 1e-12)

    opts = MinimizeOptions(grid65, grid2_65, eigenpair=eig65)
    tiny = minimize_mechanical(2.0 + 1e-9, p, opts)
    collapse = tiny.E_m if tiny.lambda_rho > 0.0 else np.inf
    _record(checks, "minimize-collapse-level", collapse, 1e-4)

    res3 = minimize_mechanical(3.0, p, opts)
    _record(checks, "minimize-stationarity", res3.kkt_residual, opts.tol)
    _record(checks, "minimize-feasibility", abs(res3.E_e - 3.0) / 3.0, 1e-6)
    _record(checks, "minimize-improves-seed",
            res3.E_m - mechanical_energy(seed3, p), 0.0)
    bound_fails = int(not verify_multiplier_bound(res3, p, 3.0))
    bound_fails += int(not verify_pointwise_bound(res3, 3.0))
    _record(checks, "minimize-analytic-bounds", bound_fails, 0.0)

    # -- voltage continuation ---------------------------------------------
    start = newton_solve(0.0, zero65, p, grid2_65)
    _record(checks, "branch-flat-start", start.sup_norm, 0.0)
    small = newton_solve(1e-2, zero65, p, grid2_65)
    _record(checks, "branch-small-voltage", abs(small.E_e - 2.0), 1e-2)

    branch = continue_branch(0.12, 4, p, grid65, grid2_65)
    bad = int(len(branch) != 5)
    for a, b in zip(branch, branch[1:]):
        bad += int(not b.sup_norm > a.sup_norm)
        bad += int(not b.E_e >= a.E_e)
    bad += sum(int(pt.newton_residual > 1e-8) for pt in branch)
    _record(checks, "branch-monotone-certified", bad, 0.0)

    report = multiplicity_report(3.0, p, grid65, grid2_65, steps=6,
                                 minimizer=res3)
    _record(checks, "two-states-energy-gap", report.e_gap, 0.5, relation=">")

    all_passed = all(c["passed"] for c in checks)
    counts = f"{sum(c['passed'] for c in checks)}/{len(checks)}"
    print(f"{'PASS' if all_passed else 'FAIL'} verify-suite: "
          f"{counts} checks passed")
    return checks, all_passed
