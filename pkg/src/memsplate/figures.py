"""Report figures rendered to files with the Agg backend.

matplotlib is imported lazily inside each function so the verify path
(which must stay byte-identical across reruns and therefore writes no
figures) never pays the import or touches a display.
"""

import numpy as np


def _pyplot():
    import matplotlib
    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt
    return plt


def _save(fig, plt, path):
    fig.savefig(path, dpi=150)
    plt.close(fig)


def deflection_figure(u, path, title="plate deflection"):
    """Deflection profile with the zero line and the ground plate at -1."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.0, 3.4))
    ax.plot(u.grid.nodes, u.values, lw=1.8, color="tab:blue")
    ax.axhline(0.0, color="0.65", lw=0.8)
    ax.axhline(-1.0, color="0.3", lw=0.9, ls="--", label="ground plate")
    ax.set_xlabel("x")
    ax.set_ylabel("u(x)")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    _save(fig, plt, path)


def potential_figure(u, pot, path):
    """Physical-domain potential psi on the deformed gap."""
    plt = _pyplot()
    x = pot.grid.x
    eta = pot.grid.eta
    X, Eta = np.meshgrid(x, eta, indexing="ij")
    # z = -1 + eta * (1 + u(x)) maps the unit rectangle onto the air gap.
    Z = -1.0 + Eta * (1.0 + u.values[:, None])
    psi = pot.phi + Eta
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    mesh = ax.pcolormesh(X, Z, psi, shading="gouraud", cmap="viridis")
    ax.plot(x, u.values, color="k", lw=1.2, label="membrane")
    ax.axhline(-1.0, color="k", lw=0.8, ls="--")
    fig.colorbar(mesh, ax=ax, label="psi")
    ax.set_xlabel("x")
    ax.set_ylabel("z")
    ax.set_title("electrostatic potential")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    _save(fig, plt, path)


def history_figure(history, path):
    """Mechanical energy and constraint gap over accepted iterations."""
    plt = _pyplot()
    e_m = [row[0] for row in history]
    gap = [max(abs(row[1]), 1e-18) for row in history]
    fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(6.0, 4.6), sharex=True)
    ax0.plot(e_m, lw=1.5, color="tab:blue")
    ax0.set_ylabel("E_m")
    ax1.semilogy(gap, lw=1.5, color="tab:red")
    ax1.set_ylabel("|E_e - rho|")
    ax1.set_xlabel("accepted iteration")
    ax0.set_title("constrained descent history")
    fig.tight_layout()
    _save(fig, plt, path)


def branch_figure(points, path):
    """Sup-norm and gap energy along the solution branch."""
    plt = _pyplot()
    lams = [pt.lam for pt in points]
    sups = [pt.sup_norm for pt in points]
    energies = [pt.E_e for pt in points]
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(8.4, 3.4))
    ax0.plot(lams, sups, "o-", ms=3.5, lw=1.4, color="tab:blue")
    ax0.set_xlabel("lambda")
    ax0.set_ylabel("sup |U_lambda|")
    ax1.plot(lams, energies, "o-", ms=3.5, lw=1.4, color="tab:green")
    ax1.set_xlabel("lambda")
    ax1.set_ylabel("E_e")
    fig.suptitle("voltage continuation branch")
    fig.tight_layout()
    _save(fig, plt, path)


def bifurcation_figure(rows, path):
    """Multiplier and minimum deflection against the energy level rho.

    rows: sequences (rho, lambda_rho, E_m, E_e, min_u).
    """
    plt = _pyplot()
    rhos = [row[0] for row in rows]
    lams = [row[1] for row in rows]
    mins = [row[4] for row in rows]
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(8.4, 3.4))
    ax0.plot(rhos, lams, "o-", ms=4, lw=1.4, color="tab:purple")
    ax0.set_xlabel("rho")
    ax0.set_ylabel("lambda_rho")
    ax1.plot(rhos, mins, "o-", ms=4, lw=1.4, color="tab:orange")
    ax1.axhline(-1.0, color="0.3", lw=0.9, ls="--")
    ax1.set_xlabel("rho")
    ax1.set_ylabel("min u_rho")
    fig.suptitle("constrained minimizers across energy levels")
    fig.tight_layout()
    _save(fig, plt, path)
