"""Command-line driver: flat key=value config, six modes, deterministic files.

Precedence is defaults < config file < flags. Every run writes manifest.json
(config hash, grid sizes, tolerance registry) next to the mode outputs; the
report modes also render figures, while verify only writes verify.json so
repeated runs stay byte-identical.

Exit codes: 0 success, 2 config error, 3 solver failure, 4 one or more
verify checks failed.
"""

import argparse
import os
import sys

import numpy as np

from . import verify as verify_suite
from .continuation import continue_branch, multiplicity_report
from .energy import electrostatic_energy, energy_report
from .model import Grid1D, Grid2D, ModelParams, TouchdownError
from .optimizer import KKT_TOL, MinimizeOptions, minimize_mechanical
from .output import write_csv, write_json, write_manifest
from .potential import SolverError, solve_transformed, traction
from .profiles import PROFILE_NAMES, profile_catalog
from .spectral import clamped_eigenpair
from . import figures

MODES = ("solve-potential", "energy", "minimize", "branch", "bifurcation",
         "verify")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_VERIFY = 4

_SCHEMA = {
    "beta": float, "tau": float, "a": float, "epsilon": float,
    "n": int, "nx": int, "neta": int,
    "mode": str, "rho": float, "rho_list": str,
    "lambda_max": float, "steps": int, "kkt_tol": float,
    "out_dir": str, "seed": int,
    "profile": str, "amplitude": float,
}

_DEFAULTS = {
    "beta": 1.0, "tau": 0.0, "a": 0.0, "epsilon": 0.5,
    "n": 129, "nx": None, "neta": None,
    "mode": None, "rho": None, "rho_list": "3,5,10,20",
    "lambda_max": 0.2, "steps": 10, "kkt_tol": KKT_TOL,
    "out_dir": "out", "seed": 12345,
    "profile": "zero", "amplitude": 0.5,
}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


def parse_config_file(path):
    """Flat key=value text; '#' starts a comment, blank lines ignored."""
    pairs = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as err:
        raise ConfigError(f"config: cannot read {path!r} ({err})")
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(
                f"config: line {lineno} is not key=value: {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _SCHEMA:
            raise ConfigError(f"{key}: unknown config key (line {lineno})")
        pairs[key] = value
    return pairs


def _coerce(key, value):
    kind = _SCHEMA[key]
    if isinstance(value, str) and kind is not str:
        try:
            return kind(value)
        except ValueError:
            raise ConfigError(
                f"{key}: expected {kind.__name__}, got {value!r}")
    return value


class RunConfig:
    """Validated run configuration; attributes mirror the config keys."""

    def __init__(self, pairs):
        for key in _SCHEMA:
            setattr(self, key, pairs[key])
        if self.nx is None:
            self.nx = self.n
        if self.neta is None:
            self.neta = (self.n + 1) // 2
        self._validate()

    @classmethod
    def from_sources(cls, file_pairs, flag_pairs):
        merged = dict(_DEFAULTS)
        for key, value in file_pairs.items():
            merged[key] = _coerce(key, value)
        for key, value in flag_pairs.items():
            if value is not None:
                merged[key] = _coerce(key, value)
        return cls(merged)

    def _validate(self):
        if self.mode is None:
            raise ConfigError("mode: required (one of " + ", ".join(MODES)
                              + ")")
        if self.mode not in MODES:
            raise ConfigError(f"mode: unknown mode {self.mode!r}")
        try:
            self.params = ModelParams(self.beta, self.tau, self.a,
                                      self.epsilon)
            Grid1D(self.n)
            Grid2D(self.nx, self.neta)
        except ValueError as err:
            raise ConfigError(str(err))
        if self.nx != self.n:
            raise ConfigError(
                f"nx: transformed solve couples the plate grid to the "
                f"rectangle, so nx must equal n (got nx={self.nx}, "
                f"n={self.n})")
        if self.kkt_tol <= 0.0:
            raise ConfigError(f"kkt_tol: must be positive, got "
                              f"{self.kkt_tol}")
        if self.seed < 0:
            raise ConfigError(f"seed: must be nonnegative, got {self.seed}")
        if self.profile not in PROFILE_NAMES:
            raise ConfigError(f"profile: unknown profile {self.profile!r}, "
                              f"expected one of {PROFILE_NAMES}")
        if self.profile != "zero" and not 0.0 <= self.amplitude < 1.0:
            raise ConfigError(f"amplitude: must be in [0, 1), got "
                              f"{self.amplitude}")
        if self.mode == "minimize":
            if self.rho is None:
                raise ConfigError("rho: required for mode=minimize")
            if not self.rho > 2.0:
                raise ConfigError(f"rho: must exceed 2, got {self.rho}")
        if self.mode == "branch":
            if not self.lambda_max > 0.0:
                raise ConfigError(f"lambda_max: must be positive, got "
                                  f"{self.lambda_max}")
            if self.steps < 2:
                raise ConfigError(f"steps: need at least 2, got {self.steps}")
            if self.rho is not None and not self.rho > 2.0:
                raise ConfigError(f"rho: must exceed 2, got {self.rho}")
        if self.mode == "bifurcation":
            self.rhos = self._parse_rho_list()

    def _parse_rho_list(self):
        items = [tok.strip() for tok in self.rho_list.split(",")
                 if tok.strip()]
        if not items:
            raise ConfigError("rho_list: empty")
        try:
            rhos = [float(tok) for tok in items]
        except ValueError:
            raise ConfigError(f"rho_list: expected comma-separated floats, "
                              f"got {self.rho_list!r}")
        for rho in rhos:
            if not rho > 2.0:
                raise ConfigError(f"rho_list: every level must exceed 2, "
                                  f"got {rho}")
        return rhos

    def to_dict(self):
        return {key: getattr(self, key) for key in _SCHEMA}


def _out(cfg, name):
    return os.path.join(cfg.out_dir, name)


def _write_deflection(cfg, u, name="deflection.csv"):
    write_csv(_out(cfg, name), ("x", "u"), zip(u.grid.nodes, u.values))


def _run_solve_potential(cfg):
    grid, grid2 = Grid1D(cfg.n), Grid2D(cfg.nx, cfg.neta)
    u = profile_catalog(cfg.profile, cfg.amplitude, grid, cfg.params)
    pot = solve_transformed(u, cfg.params, grid2)
    g = traction(u, cfg.params, pot)
    e_e = electrostatic_energy(u, cfg.params, pot)

    X, Eta = np.meshgrid(grid2.x, grid2.eta, indexing="ij")
    write_csv(_out(cfg, "potential.csv"), ("x", "eta", "phi"),
              zip(X.ravel(), Eta.ravel(), pot.phi.ravel()))
    # Physical sheet: z = -1 + eta (1 + u(x)), psi = Phi + eta.
    Z = -1.0 + Eta * (1.0 + u.values[:, None])
    Psi = pot.phi + Eta
    write_csv(_out(cfg, "psi.csv"), ("x", "z", "psi"),
              zip(X.ravel(), Z.ravel(), Psi.ravel()))
    _write_deflection(cfg, u)
    write_json(_out(cfg, "summary.json"), {
        "E_e": e_e,
        "traction_min": float(g.values.min()),
        "traction_max": float(g.values.max()),
        "solver_residual": pot.residual,
    })
    figures.potential_figure(u, pot, _out(cfg, "potential.png"))
    figures.deflection_figure(u, _out(cfg, "deflection.png"))


def _run_energy(cfg):
    grid, grid2 = Grid1D(cfg.n), Grid2D(cfg.nx, cfg.neta)
    u = profile_catalog(cfg.profile, cfg.amplitude, grid, cfg.params)
    rep = energy_report(u, cfg.params, grid2)
    _write_deflection(cfg, u)
    write_json(_out(cfg, "summary.json"), {
        "E_m": rep.E_m,
        "E_e": rep.E_e,
        "lower_bound": rep.lower_bound,
        "upper_bound": rep.upper_bound,
        "identity_residual": rep.identity_residual,
    })
    figures.deflection_figure(u, _out(cfg, "deflection.png"))


def _run_minimize(cfg):
    grid, grid2 = Grid1D(cfg.n), Grid2D(cfg.nx, cfg.neta)
    eig = clamped_eigenpair(cfg.params, grid)
    opts = MinimizeOptions(grid, grid2, tol=cfg.kkt_tol, eigenpair=eig)
    res = minimize_mechanical(cfg.rho, cfg.params, opts)
    _write_deflection(cfg, res.u_rho, "minimizer.csv")
    write_csv(_out(cfg, "history.csv"),
              ("iteration", "E_m", "constraint_gap", "step"),
              ((i,) + tuple(row) for i, row in enumerate(res.history)))
    write_json(_out(cfg, "summary.json"), {
        "rho": cfg.rho,
        "lambda_rho": res.lambda_rho,
        "E_m": res.E_m,
        "E_e": res.E_e,
        "kkt_residual": res.kkt_residual,
        "iterations": res.iterations,
        "polish_iterations": res.polish_iterations,
        "restoration_solves": res.restoration_solves,
        "min_u": float(res.u_rho.values.min()),
    })
    figures.deflection_figure(res.u_rho, _out(cfg, "minimizer.png"),
                              title=f"constrained minimizer, rho={cfg.rho:g}")
    figures.history_figure(res.history, _out(cfg, "history.png"))


def _run_branch(cfg):
    grid, grid2 = Grid1D(cfg.n), Grid2D(cfg.nx, cfg.neta)
    points = continue_branch(cfg.lambda_max, cfg.steps, cfg.params, grid,
                             grid2)
    write_csv(_out(cfg, "branch.csv"),
              ("lambda", "sup_norm", "E_e", "residual"),
              ((pt.lam, pt.sup_norm, pt.E_e, pt.newton_residual)
               for pt in points))
    write_json(_out(cfg, "summary.json"), {
        "requested_points": cfg.steps + 1,
        "accepted_points": len(points),
        "lambda_reached": points[-1].lam,
        "pull_in_halt": len(points) < cfg.steps + 1,
    })
    if cfg.rho is not None:
        rep = multiplicity_report(cfg.rho, cfg.params, grid, grid2,
                                  steps=cfg.steps)
        write_json(_out(cfg, "multiplicity.json"), rep.scalars())
    figures.branch_figure(points, _out(cfg, "branch.png"))


def _run_bifurcation(cfg):
    grid, grid2 = Grid1D(cfg.n), Grid2D(cfg.nx, cfg.neta)
    eig = clamped_eigenpair(cfg.params, grid)
    opts = MinimizeOptions(grid, grid2, tol=cfg.kkt_tol, eigenpair=eig)
    rows, kkts = [], []
    for rho in cfg.rhos:
        res = minimize_mechanical(rho, cfg.params, opts)
        rows.append((rho, res.lambda_rho, res.E_m, res.E_e,
                     float(res.u_rho.values.min())))
        kkts.append(res.kkt_residual)
    write_csv(_out(cfg, "bifurcation.csv"),
              ("rho", "lambda_rho", "E_m", "E_e", "min_u"), rows)
    lams = [row[1] for row in rows]
    mus = [row[2] for row in rows]
    write_json(_out(cfg, "summary.json"), {
        "rho_list": cfg.rhos,
        "kkt_residuals": kkts,
        "lambda_strictly_decreasing": bool(
            all(b < a for a, b in zip(lams, lams[1:]))),
        "mu_non_decreasing": bool(
            all(b >= a for a, b in zip(mus, mus[1:]))),
    })
    figures.bifurcation_figure(rows, _out(cfg, "bifurcation.png"))


def _run_verify(cfg):
    checks, all_passed = verify_suite.run_suite(cfg.seed)
    write_json(_out(cfg, "verify.json"), {
        "seed": cfg.seed,
        "checks": checks,
        "passed": sum(c["passed"] for c in checks),
        "failed": sum(not c["passed"] for c in checks),
        "all_passed": all_passed,
    })
    return all_passed


def build_parser():
    parser = argparse.ArgumentParser(
        prog="memsplate",
        description="Clamped-plate MEMS solver: transformed potential, gap "
                    "energies, constrained minimizers, voltage branch.")
    parser.add_argument("--config", metavar="FILE",
                        help="key=value config file; flags override it")
    parser.add_argument("--mode", choices=MODES)
    parser.add_argument("--beta", type=float)
    parser.add_argument("--tau", type=float)
    parser.add_argument("--a", type=float)
    parser.add_argument("--epsilon", type=float)
    parser.add_argument("--n", type=int)
    parser.add_argument("--nx", type=int)
    parser.add_argument("--neta", type=int)
    parser.add_argument("--rho", type=float)
    parser.add_argument("--rho-list", dest="rho_list")
    parser.add_argument("--lambda-max", dest="lambda_max", type=float)
    parser.add_argument("--steps", type=int)
    parser.add_argument("--kkt-tol", dest="kkt_tol", type=float)
    parser.add_argument("--out-dir", dest="out_dir")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--profile", choices=PROFILE_NAMES)
    parser.add_argument("--amplitude", type=float)
    return parser


_RUNNERS = {
    "solve-potential": _run_solve_potential,
    "energy": _run_energy,
    "minimize": _run_minimize,
    "branch": _run_branch,
    "bifurcation": _run_bifurcation,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        file_pairs = (parse_config_file(args.config) if args.config
                      else {})
        flag_pairs = {key: getattr(args, key) for key in _SCHEMA}
        cfg = RunConfig.from_sources(file_pairs, flag_pairs)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    os.makedirs(cfg.out_dir, exist_ok=True)
    write_manifest(cfg.out_dir, cfg.to_dict())
    try:
        if cfg.mode == "verify":
            return EXIT_OK if _run_verify(cfg) else EXIT_VERIFY
        _RUNNERS[cfg.mode](cfg)
    except (SolverError, TouchdownError) as err:
        print(f"solver failure: {err}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as err:
        print(f"solver failure: {err}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
