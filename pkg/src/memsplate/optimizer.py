"""Constrained minimization of E_m over even admissible profiles with
E_e(u) = rho, multiplier extraction, and the minimizer-side bound checks.

The loop uses the two structural facts the model provides: the constraint
gradient is -g(u) (the traction), and the radial map t -> E_e(t u) is
monotone, so feasibility is restored by scalar rescaling after every trial
step. Search directions precondition the L2 KKT residual with the clamped
operator H = beta d4 - (tau + a ||d1 u||^2) d2, turning the h^-4 stencil
stiffness into O(1) steps.

The strong-form gradient rows beta d4 u - (...) d2 u are paired with
Simpson weights, so the minimizer of the quadrature energy carries an
O(h^2) strong-form defect; descent stalls at that floor. A Newton polish
on the stationarity system [em_gradient + lambda g; E_e - rho] = 0 over
the even interior values and lambda then drives the KKT residual to
tolerance without disturbing feasibility.
"""

import numpy as np

from .model import (DELTA_FLOOR, DeflectionProfile, l2_norm, mechanical_energy,
                    quad1d, symmetrize, d2, d4)
from .potential import SolverError, solve_transformed, traction
from .energy import RESCALE_RTOL, electrostatic_energy, illinois_root
from .spectral import clamped_factor, clamped_solve, feasible_seed

KKT_TOL = 1e-5
MAX_OUTER = 500
ARMIJO_C1 = 1e-4
ALPHA_MIN = 1e-6
POLISH_MAX_ITER = 12
FEASIBILITY_RTOL = 1e-6
PLATEAU_WINDOW = 10
PLATEAU_RTOL = 1e-7
DESCENT_BUDGET = 60


class MinimizeOptions:
    """Grids and stopping controls for `minimize_mechanical`."""

    def __init__(self, grid, grid2, tol=KKT_TOL, max_iter=MAX_OUTER,
                 eigenpair=None):
        self.grid = grid
        self.grid2 = grid2
        self.tol = tol
        self.max_iter = max_iter
        self.eigenpair = eigenpair


class MinimizerResult:
    """Converged minimizer with certificates and iteration history.

    history holds one (E_m, constraint_gap, step) tuple per accepted descent
    step; polish_iterations counts the Newton stationarity refinements after
    descent stalls at the strong-form quadrature floor.
    """

    def __init__(self, u_rho, lambda_rho, E_m, E_e, kkt_residual, iterations,
                 history, polish_iterations=0, restoration_solves=0):
        self.u_rho = u_rho
        self.lambda_rho = lambda_rho
        self.E_m = E_m
        self.E_e = E_e
        self.kkt_residual = kkt_residual
        self.iterations = iterations
        self.history = history
        self.polish_iterations = polish_iterations
        self.restoration_solves = restoration_solves

    def __repr__(self):
        return (f"MinimizerResult(E_m={self.E_m:.8g}, E_e={self.E_e:.8g}, "
                f"lambda={self.lambda_rho:.6g}, "
                f"kkt={self.kkt_residual:.3e}, it={self.iterations})")


def em_gradient(u, p):
    """Strong-form L2 gradient beta d4 u - (tau + a ||d1 u||^2) d2 u.

    Boundary rows are zero (clamped variations vanish there). For a = 0 and
    u = phi1 this reproduces mu1 phi1 up to the eigen residual.
    """
    stiffness = p.tau + p.a * l2_norm(u.du, u.grid) ** 2
    out = p.beta * d4(u) - stiffness * d2(u)
    out[0] = out[-1] = 0.0
    return out


def _interior_norm(grid, values_interior):
    return float(np.sqrt(grid.weights[1:-1] @ values_interior ** 2))


def least_squares_multiplier(u, p, phi):
    """argmin over lambda of ||em_gradient(u) + lambda g(u)|| (interior L2)."""
    g = traction(u, p, phi).values[1:-1]
    grad = em_gradient(u, p)[1:-1]
    w = u.grid.weights[1:-1]
    return float(-(w @ (grad * g)) / (w @ (g * g)))


def kkt_residual(u, lam, p, phi):
    """||em_gradient(u) + lam g(u)|| in the interior Simpson L2 norm."""
    g = traction(u, p, phi).values
    r = em_gradient(u, p) + lam * g
    return _interior_norm(u.grid, r[1:-1])


def extract_multiplier(u, p, phi):
    """Multiplier from pairing the stationarity equation with u itself:

        lambda = (beta ||d2 u||^2 + tau ||d1 u||^2 + a ||d1 u||^4)
                 / (-int u g(u) dx),

    positive for admissible nonzero u since g >= 0 and u <= 0.
    """
    dn1 = l2_norm(u.du, u.grid) ** 2
    numerator = (p.beta * l2_norm(u.d2u, u.grid) ** 2 + p.tau * dn1
                 + p.a * dn1 ** 2)
    g = traction(u, p, phi).values
    denominator = -quad1d(u.values * g, u.grid)
    if denominator <= 1e-14:
        raise ValueError("multiplier undefined: -int u g du vanishes "
                         "(u is identically zero)")
    return numerator / denominator


def _restore_to_level(u, p, rho, grid2, first=None, hint=None):
    """Scale u radially onto {E_e = rho}, growing past t = 1 if needed.

    Unlike the public rescale (bracketed on [0, 1]), trial steps may undershoot
    the constraint, so the bracket expands upward until it straddles rho or
    hits the touchdown cap. `first` short-circuits the t = 1 evaluation with
    a precomputed (E_e, potential); `hint` seeds the scalar root iteration.
    Returns (profile, potential, solve_count).
    """
    ftol = RESCALE_RTOL * rho
    grid = u.grid
    cache = {}
    count = [0]

    def J(t):
        prof = DeflectionProfile(grid, t * u.values)
        pot = solve_transformed(prof, p, grid2)
        cache[t] = (prof, pot)
        count[0] += 1
        return electrostatic_energy(prof, p, pot)

    if first is None:
        e1 = J(1.0)
    else:
        e1, pot1 = first
        cache[1.0] = (u, pot1)
    if abs(e1 - rho) <= ftol:
        prof, pot = cache[1.0]
        return prof, pot, count[0]
    if e1 > rho:
        lo, flo, hi, fhi = 0.0, 2.0 - rho, 1.0, e1 - rho
    else:
        depth = -float(np.min(u.values))
        if depth <= 0.0:
            raise SolverError("restoration impossible: profile has no depth")
        t_touch = (1.0 - 1e-3) / depth
        lo, flo = 1.0, e1 - rho
        hi = min(1.5, t_touch)
        while True:
            e_hi = J(hi)
            if abs(e_hi - rho) <= ftol:
                prof, pot = cache[hi]
                return prof, pot, count[0]
            if e_hi > rho:
                fhi = e_hi - rho
                break
            if hi >= t_touch:
                raise SolverError(
                    f"restoration cannot reach rho={rho:.6g}: "
                    f"E_e={e_hi:.6g} at the touchdown-capped scale "
                    f"t={hi:.6g}")
            lo, flo = hi, e_hi - rho
            hi = min(1.5 * hi, t_touch)
    t, _ = illinois_root(lambda s: J(s) - rho, lo, hi, flo, fhi, ftol,
                         hint=hint)
    prof, pot = cache[t]
    return prof, pot, count[0]


def _even_expand(c, m):
    """Even interior vector from its first (m+1)//2 coordinates."""
    return np.concatenate([c, c[:-1][::-1]])


def _kkt_polish(u, lam, rho, p, grid, grid2, tol, max_iter=POLISH_MAX_ITER):
    """Newton refinement of [em_gradient + lam g; E_e - rho] = 0.

    Unknowns are the even interior values and lam; the g and E_e columns of
    the Jacobian are finite-differenced (one elliptic solve per even node),
    the lam column is analytic. Returns (u, lam, potential, iterations).
    """
    m = grid.n - 2
    k = (m + 1) // 2

    def system(c, lam_val):
        values = np.zeros(grid.n)
        values[1:-1] = _even_expand(c, m)
        prof = DeflectionProfile(grid, values)
        pot = solve_transformed(prof, p, grid2)
        g = traction(prof, p, pot).values
        r = em_gradient(prof, p) + lam_val * g
        e_e = electrostatic_energy(prof, p, pot)
        vec = np.empty(k + 1)
        vec[:k] = r[1:-1][:k]
        vec[k] = e_e - rho
        return vec, prof, pot, g

    c = u.values[1:k + 1].copy()
    base, prof, pot, g = system(c, lam)
    for it in range(max_iter):
        resid = _interior_norm(grid, _even_expand(base[:k], m))
        if resid <= 0.5 * tol and abs(base[k]) <= 0.5 * FEASIBILITY_RTOL * rho:
            return prof, lam, pot, it
        jac = np.empty((k + 1, k + 1))
        delta = 1e-6 * (1.0 + np.abs(c).max())
        for j in range(k):
            cj = c.copy()
            cj[j] += delta
            vec_j, _, _, _ = system(cj, lam)
            jac[:, j] = (vec_j - base) / delta
        jac[:k, k] = g[1:-1][:k]
        jac[k, k] = 0.0
        try:
            step = np.linalg.solve(jac, -base)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"stationarity Jacobian singular: {exc}")
        scale = 1.0
        norm0 = np.linalg.norm(base)
        while scale >= 1.0 / 64.0:
            c_try = c + scale * step[:k]
            lam_try = lam + scale * step[k]
            try:
                vec_try, prof_t, pot_t, g_t = system(c_try, lam_try)
            except (SolverError, ValueError):
                scale *= 0.5
                continue
            if np.linalg.norm(vec_try) <= (1.0 - 1e-4 * scale) * norm0:
                c, lam, base, prof, pot, g = (c_try, lam_try, vec_try,
                                              prof_t, pot_t, g_t)
                break
            scale *= 0.5
        else:
            raise SolverError(
                f"stationarity polish stalled at residual {norm0:.3e} "
                f"(target {tol:.1e}) after {it} steps")
    resid = _interior_norm(grid, _even_expand(base[:k], m))
    if resid <= 0.5 * tol and abs(base[k]) <= 0.5 * FEASIBILITY_RTOL * rho:
        return prof, lam, pot, max_iter
    raise SolverError(
        f"stationarity polish did not converge: residual {resid:.3e}, "
        f"constraint gap {abs(base[k]):.3e} after {max_iter} iterations")


def minimize_mechanical(rho, p, opts):
    """Projected-gradient minimization of E_m on {even admissible, E_e=rho}.

    Starts from the feasible seed; each iteration removes the least-squares
    multiple of the constraint gradient from grad E_m, takes a banded
    H-preconditioned descent step with backtracking on E_m, clamps positive
    parts to zero, symmetrizes, and restores the constraint radially. When
    the Armijo search stalls at the quadrature-pairing floor, E_m plateaus,
    or the descent budget runs out, the Newton stationarity polish finishes
    the job; if the polish fails from an early handoff, descent resumes up
    to opts.max_iter before the final attempt. Raises SolverError with
    diagnostics if no phase reaches the tolerance.
    """
    if not rho > 2.0:
        raise ValueError(f"rho must exceed 2, got {rho}")
    grid, grid2 = opts.grid, opts.grid2
    u = feasible_seed(rho, p, grid, grid2, eigenpair=opts.eigenpair)
    pot = solve_transformed(u, p, grid2)
    w_int = grid.weights[1:-1]
    history = []
    restoration_solves = 0
    iterations = 0
    alpha_prev = 0.5

    def descent(budget):
        """Run accepted steps until convergence, stall, or budget. Returns
        True when the KKT residual at the least-squares multiplier passed
        opts.tol."""
        nonlocal u, pot, alpha_prev, iterations, restoration_solves
        while True:
            g = traction(u, p, pot).values[1:-1]
            grad = em_gradient(u, p)[1:-1]
            lam = float(-(w_int @ (grad * g)) / (w_int @ (g * g)))
            r = grad + lam * g
            kkt = float(np.sqrt(w_int @ r ** 2))
            if kkt <= opts.tol:
                return True
            if iterations >= budget:
                return False
            stiffness = p.tau + p.a * l2_norm(u.du, grid) ** 2
            factor = clamped_factor(p, grid, tau_effective=stiffness)
            direction = -clamped_solve(factor, r)
            decrease_model = float(w_int @ (r * -direction))  # <r, H^-1 r>
            e_old = mechanical_energy(u, p)
            alpha = min(1.0, 2.0 * alpha_prev)
            accepted = False
            while alpha >= ALPHA_MIN:
                trial = u.values.copy()
                trial[1:-1] += alpha * direction
                np.minimum(trial, 0.0, out=trial)
                trial = symmetrize(trial)
                if trial.min() <= -1.0 + DELTA_FLOOR:
                    alpha *= 0.5
                    continue
                trial_prof = DeflectionProfile(grid, trial)
                sufficient = e_old - ARMIJO_C1 * alpha * decrease_model
                try:
                    pot_t = solve_transformed(trial_prof, p, grid2)
                except (SolverError, ValueError):
                    alpha *= 0.5
                    continue
                restoration_solves += 1
                e1 = electrostatic_energy(trial_prof, p, pot_t)
                # One-solve screen: dE_e(t u)/dt = -int g(tu) u dx, so a
                # first-order radial scale predicts the restored E_m for
                # free.
                g_t = traction(trial_prof, p, pot_t).values
                slope = -quad1d(trial * g_t, grid)
                depth = -float(trial.min())
                if slope > 0.0 and depth > 0.0:
                    t_est = 1.0 + (rho - e1) / slope
                    t_est = min(max(t_est, 0.0), (1.0 - 1e-3) / depth)
                    e_pred = mechanical_energy(
                        DeflectionProfile(grid, t_est * trial), p)
                    if e_pred > sufficient:
                        alpha *= 0.5
                        continue
                else:
                    t_est = None
                try:
                    restored, pot_new, ns = _restore_to_level(
                        trial_prof, p, rho, grid2, first=(e1, pot_t),
                        hint=t_est)
                except (SolverError, ValueError):
                    alpha *= 0.5
                    continue
                restoration_solves += ns
                e_new = mechanical_energy(restored, p)
                if e_new <= sufficient:
                    accepted = True
                    break
                alpha *= 0.5
            if not accepted:
                return False
            iterations += 1
            u, pot = restored, pot_new
            alpha_prev = alpha
            gap = abs(electrostatic_energy(u, p, pot) - rho)
            history.append((e_new, gap, alpha))
            # Descent cannot beat the strong-form quadrature floor; once
            # E_m flattens, hand over to the polish instead of grinding.
            if len(history) > PLATEAU_WINDOW:
                drop = history[-PLATEAU_WINDOW - 1][0] - e_new
                if drop <= PLATEAU_RTOL * max(1.0, abs(e_new)):
                    return False

    budget = min(opts.max_iter, DESCENT_BUDGET)
    converged = descent(budget)
    polish_iterations = 0
    while not converged:
        g = traction(u, p, pot).values[1:-1]
        grad = em_gradient(u, p)[1:-1]
        lam = float(-(w_int @ (grad * g)) / (w_int @ (g * g)))
        try:
            u, lam, pot, polish_iterations = _kkt_polish(
                u, lam, rho, p, grid, grid2, opts.tol)
        except SolverError:
            if budget >= opts.max_iter:
                raise
            budget = opts.max_iter
            converged = descent(budget)
            continue
        if u.values.max() > 0.0:
            # Newton works in the free even subspace; clamp any stray
            # positive round-off and re-certify below.
            if u.values.max() > 1e-10:
                raise SolverError(
                    f"polished profile violates the obstacle by "
                    f"{u.values.max():.3e}")
            u = DeflectionProfile(grid, np.minimum(u.values, 0.0))
            pot = solve_transformed(u, p, grid2)
        break

    lam_lsq = least_squares_multiplier(u, p, pot)
    kkt = kkt_residual(u, lam_lsq, p, pot)
    if kkt > opts.tol:
        raise SolverError(
            f"minimize did not certify: kkt={kkt:.3e} > tol={opts.tol:.1e} "
            f"after {iterations} descent + {polish_iterations} polish steps")
    e_e = electrostatic_energy(u, p, pot)
    return MinimizerResult(
        u_rho=u,
        lambda_rho=extract_multiplier(u, p, pot),
        E_m=mechanical_energy(u, p),
        E_e=e_e,
        kkt_residual=kkt,
        iterations=iterations + polish_iterations,
        history=history,
        polish_iterations=polish_iterations,
        restoration_solves=restoration_solves)


def verify_multiplier_bound(result, p, rho, slack=0.05):
    """Check 4 E_m >= lambda sqrt(beta) (rho-2)^2 / (2 (sqrt(beta) +
    eps^2 sqrt(E_m))) with multiplicative slack for discretization."""
    e_m = result.E_m
    rhs = (result.lambda_rho * np.sqrt(p.beta) * (rho - 2.0) ** 2
           / (2.0 * (np.sqrt(p.beta) + p.epsilon ** 2 * np.sqrt(e_m))))
    return 4.0 * e_m * (1.0 + slack) >= rhs


def verify_pointwise_bound(result, rho):
    """Check min u >= 1/(rho^3 K^2) - 1 with K = max(2/rho, ||d2 u||)."""
    u = result.u_rho
    K = max(2.0 / rho, l2_norm(u.d2u, u.grid))
    bound = 1.0 / (rho ** 3 * K ** 2) - 1.0
    return bool(u.values.min() >= bound)
