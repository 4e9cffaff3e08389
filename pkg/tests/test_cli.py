"""CLI drivers: config handling, outputs, exit codes, reproducibility."""

import filecmp
import json
import os

import numpy as np
import pytest

from memsplate.cli import (ConfigError, RunConfig, main, parse_config_file,
                           EXIT_CONFIG, EXIT_OK, EXIT_SOLVER)


def run_cli(tmp_path, name, *args):
    out = tmp_path / name
    code = main([*args, "--out-dir", str(out)])
    return code, out


def load_csv(path):
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def load_json(path):
    with open(path) as fh:
        return json.load(fh)


# ---------------------------------------------------------------- config


def test_precedence_defaults_file_flags(tmp_path):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text(
        "# comment line\n"
        "mode = energy\n"
        "n = 65\n"
        "amplitude = 0.4   # trailing comment\n"
        "\n"
        "profile = quartic\n")
    file_pairs = parse_config_file(str(cfgfile))
    cfg = RunConfig.from_sources(file_pairs, {"amplitude": 0.6})
    assert cfg.mode == "energy"
    assert cfg.n == 65
    assert cfg.nx == 65          # derived from n when unset
    assert cfg.neta == 33
    assert cfg.amplitude == 0.6  # flag beats file
    assert cfg.beta == 1.0       # untouched default


def test_unknown_and_malformed_keys_rejected(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("mode = energy\nbogus = 1\n")
    with pytest.raises(ConfigError, match="bogus"):
        parse_config_file(str(bad))
    bad.write_text("mode energy\n")
    with pytest.raises(ConfigError, match="key=value"):
        parse_config_file(str(bad))


@pytest.mark.parametrize("flags", [
    (),                                                  # mode missing
    ("--mode", "energy", "--n", "64"),                   # even grid
    ("--mode", "minimize", "--n", "65"),                 # rho missing
    ("--mode", "minimize", "--n", "65", "--rho", "1.5"),
    ("--mode", "bifurcation", "--rho-list", "3,oops"),
    ("--mode", "bifurcation", "--rho-list", "3,2"),
    ("--mode", "energy", "--n", "65", "--nx", "129"),
    ("--mode", "energy", "--profile", "quartic", "--amplitude", "1.2"),
    ("--mode", "minimize", "--rho", "3", "--kkt-tol", "-1"),
    ("--mode", "branch", "--steps", "1"),
    ("--mode", "branch", "--lambda-max", "-0.5"),
    ("--mode", "energy", "--beta", "0"),
])
def test_invalid_config_exits_2(tmp_path, flags, capsys):
    code, _ = run_cli(tmp_path, "bad", *flags)
    assert code == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_config_error_names_offending_key(tmp_path, capsys):
    code, _ = run_cli(tmp_path, "bad", "--mode", "minimize", "--n", "65",
                      "--rho", "1.5")
    assert code == EXIT_CONFIG
    assert "rho" in capsys.readouterr().err


def test_unreachable_level_exits_3(tmp_path, capsys):
    code, _ = run_cli(tmp_path, "fail", "--mode", "minimize", "--n", "65",
                      "--neta", "33", "--rho", "1e9")
    assert code == EXIT_SOLVER
    assert "solver failure" in capsys.readouterr().err


# ---------------------------------------------------------------- modes


def test_solve_potential_flat_plate(tmp_path):
    code, out = run_cli(tmp_path, "flat", "--mode", "solve-potential",
                        "--n", "129", "--neta", "65")
    assert code == EXIT_OK
    x, z, psi = load_csv(out / "psi.csv").T
    assert np.abs(psi - (1.0 + z)).max() <= 1e-8
    phi = load_csv(out / "potential.csv")[:, 2]
    assert np.abs(phi).max() <= 1e-12
    summary = load_json(out / "summary.json")
    assert abs(summary["E_e"] - 2.0) <= 1e-6
    assert abs(summary["traction_min"] - 1.0) <= 1e-6
    assert abs(summary["traction_max"] - 1.0) <= 1e-6
    for name in ("potential.png", "deflection.png", "manifest.json"):
        assert (out / name).exists()


def test_energy_mode_outputs(tmp_path):
    code, out = run_cli(tmp_path, "energy", "--mode", "energy", "--n", "65",
                        "--neta", "33", "--profile", "quartic",
                        "--amplitude", "0.5")
    assert code == EXIT_OK
    summary = load_json(out / "summary.json")
    assert 2.0 < summary["lower_bound"] <= summary["E_e"] + 1e-2
    assert summary["E_e"] <= summary["upper_bound"] + 1e-2
    assert summary["identity_residual"] <= 1e-2
    table = load_csv(out / "deflection.csv")
    assert table.shape == (65, 2)
    assert abs(table[:, 1].min() + 0.5) <= 1e-14


def test_minimize_mode_outputs(tmp_path):
    code, out = run_cli(tmp_path, "min", "--mode", "minimize", "--n", "65",
                        "--neta", "33", "--rho", "3")
    assert code == EXIT_OK
    summary = load_json(out / "summary.json")
    assert summary["kkt_residual"] <= 1e-5
    assert abs(summary["E_e"] - 3.0) <= 3e-6
    assert summary["lambda_rho"] > 0.0
    u = load_csv(out / "minimizer.csv")[:, 1]
    assert np.array_equal(u, u[::-1])          # even minimizer
    assert -1.0 < u.min() < 0.0
    hist = load_csv(out / "history.csv")
    assert hist.shape[1] == 4
    assert np.all(np.diff(hist[:, 1]) <= 1e-12)  # E_m nonincreasing
    for name in ("minimizer.png", "history.png"):
        assert (out / name).exists()


def test_branch_mode_outputs(tmp_path):
    code, out = run_cli(tmp_path, "branch", "--mode", "branch", "--n", "65",
                        "--neta", "33", "--lambda-max", "0.12",
                        "--steps", "4")
    assert code == EXIT_OK
    lam, sup, e_e, res = load_csv(out / "branch.csv").T
    assert lam.shape == (5,)
    assert np.allclose(lam, np.linspace(0.0, 0.12, 5), atol=1e-15)
    assert np.all(np.diff(sup) > 0.0)
    assert np.all(np.diff(e_e) >= 0.0)
    assert res.max() <= 1e-8
    summary = load_json(out / "summary.json")
    assert summary["accepted_points"] == 5
    assert summary["pull_in_halt"] is False
    assert (out / "branch.png").exists()


def test_branch_mode_multiplicity_json(tmp_path):
    code, out = run_cli(tmp_path, "mult", "--mode", "branch", "--n", "65",
                        "--neta", "33", "--lambda-max", "0.1",
                        "--steps", "6", "--rho", "3")
    assert code == EXIT_OK
    rep = load_json(out / "multiplicity.json")
    assert rep["rho"] == 3.0
    assert rep["e_gap"] > 0.5
    assert rep["multiplicity_demonstrated"] is True


def test_bifurcation_mode_outputs(tmp_path):
    code, out = run_cli(tmp_path, "bif", "--mode", "bifurcation", "--n", "65",
                        "--neta", "33", "--rho-list", "3,4")
    assert code == EXIT_OK
    rows = load_csv(out / "bifurcation.csv")
    assert rows.shape == (2, 5)
    assert rows[1, 1] < rows[0, 1]              # lambda_rho decreasing
    assert rows[1, 2] >= rows[0, 2]             # E_m non-decreasing
    assert np.all(rows[:, 4] > -1.0)
    summary = load_json(out / "summary.json")
    assert summary["lambda_strictly_decreasing"] is True
    assert summary["mu_non_decreasing"] is True
    assert (out / "bifurcation.png").exists()


# ------------------------------------------------------- reproducibility


def test_verify_passes_and_is_byte_identical(tmp_path, capsys):
    code1, out1 = run_cli(tmp_path, "v1", "--mode", "verify")
    text1 = capsys.readouterr().out
    code2, out2 = run_cli(tmp_path, "v2", "--mode", "verify")
    text2 = capsys.readouterr().out
    assert code1 == EXIT_OK and code2 == EXIT_OK
    assert "PASS verify-suite" in text1
    assert text1 == text2
    for name in ("verify.json", "manifest.json"):
        assert filecmp.cmp(out1 / name, out2 / name, shallow=False)
    # the verify path renders no figures
    assert not list(out1.glob("*.png"))
    report = load_json(out1 / "verify.json")
    assert report["all_passed"] is True
    assert report["failed"] == 0
    assert {"name", "measured", "bound", "relation", "passed"} <= set(
        report["checks"][0])


def test_report_outputs_byte_identical(tmp_path):
    _, out1 = run_cli(tmp_path, "r1", "--mode", "energy", "--n", "65",
                      "--neta", "33", "--profile", "sextic",
                      "--amplitude", "0.3")
    _, out2 = run_cli(tmp_path, "r2", "--mode", "energy", "--n", "65",
                      "--neta", "33", "--profile", "sextic",
                      "--amplitude", "0.3")
    for name in ("deflection.csv", "summary.json", "manifest.json"):
        assert filecmp.cmp(out1 / name, out2 / name, shallow=False)


def test_manifest_records_hash_grids_tolerances(tmp_path):
    _, out = run_cli(tmp_path, "man", "--mode", "energy", "--n", "65",
                     "--neta", "33", "--kkt-tol", "2e-5")
    manifest = load_json(out / "manifest.json")
    digest = manifest["config_sha256"]
    assert len(digest) == 64 and set(digest) <= set("0123456789abcdef")
    assert manifest["grids"] == {"n": 65, "nx": 65, "neta": 33}
    assert "out_dir" not in manifest["config"]
    tol = manifest["tolerances"]
    assert tol["kkt_tol"] == 2e-5
    for key in ("delta_floor", "elliptic_solver_rtol", "rescale_rtol",
                "eigen_rtol", "seed_rtol", "feasibility_rtol", "newton_tol"):
        assert key in tol


def test_csv_headers_match_declared_schemas(tmp_path):
    _, out = run_cli(tmp_path, "hdr", "--mode", "solve-potential",
                     "--n", "65", "--neta", "33")
    assert open(out / "potential.csv").readline().strip() == "x,eta,phi"
    assert open(out / "psi.csv").readline().strip() == "x,z,psi"
    assert open(out / "deflection.csv").readline().strip() == "x,u"
