"""Deterministic file outputs: delimited tables, JSON summaries, manifest.

All floats go through one fixed 17-significant-digit format so identical
configurations reproduce byte-identical files; nothing here writes
timestamps or environment-dependent fields.
"""

import hashlib
import json
import os

FLOAT_FMT = "%.17g"


def format_cell(value):
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return FLOAT_FMT % float(value)


def write_csv(path, header, rows):
    """Comma-separated table with a header row; floats at 17 digits."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_cell(cell) for cell in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_json(path, payload):
    """Sorted-key JSON with a trailing newline (diffable, reproducible)."""
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def config_digest(config):
    """sha256 of the canonical config serialization.

    out_dir is excluded: where results land must not change what they are.
    """
    material = {k: v for k, v in config.items() if k != "out_dir"}
    canon = json.dumps(material, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def tolerance_registry():
    """Every tolerance the solvers consult at runtime, by name."""
    from .model import DELTA_FLOOR
    from .potential import SOLVER_RTOL
    from .energy import RESCALE_RTOL
    from .spectral import EIGEN_RTOL, SEED_RTOL
    from .optimizer import FEASIBILITY_RTOL, KKT_TOL
    from .continuation import NEWTON_TOL
    return {
        "delta_floor": DELTA_FLOOR,
        "elliptic_solver_rtol": SOLVER_RTOL,
        "rescale_rtol": RESCALE_RTOL,
        "eigen_rtol": EIGEN_RTOL,
        "seed_rtol": SEED_RTOL,
        "kkt_tol": KKT_TOL,
        "feasibility_rtol": FEASIBILITY_RTOL,
        "newton_tol": NEWTON_TOL,
    }


def write_manifest(out_dir, config):
    """manifest.json: config hash, the config itself (sans out_dir), grid
    sizes, and the full tolerance registry."""
    from . import __version__
    tolerances = tolerance_registry()
    tolerances["kkt_tol"] = config.get("kkt_tol", tolerances["kkt_tol"])
    payload = {
        "config_sha256": config_digest(config),
        "config": {k: v for k, v in config.items() if k != "out_dir"},
        "grids": {k: config[k] for k in ("n", "nx", "neta") if k in config},
        "tolerances": tolerances,
        "package_version": __version__,
    }
    path = os.path.join(out_dir, "manifest.json")
    write_json(path, payload)
    return path
