"""SVG figures for the CLI. Every entry point swallows its own errors."""
from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _safe(fn):
    def wrapper(*args, **kw):
        try:
            return fn(*args, **kw)
        except Exception as exc:  # plotting is best effort
            log.warning("plot %s failed: %s", fn.__name__, exc)
            return None
    wrapper.__name__ = fn.__name__
    return wrapper


@_safe
def box_trajectories(results, out: Path) -> Path:
    plt = _pyplot()
    fig, axes = plt.subplots(1, len(results), figsize=(4.2 * len(results), 4), squeeze=False)
    for ax, r in zip(axes[0], results):
        traj = r.trajectory
        ax.plot(traj.positions[:, ::2], traj.times, lw=0.4, color="k")
        if r.period:
            ax.axhline(r.period, color="C3", lw=0.8, ls="--")
        ax.set_xlabel("x [nm]")
        ax.set_title(f"n = {r.spec.n}")
    axes[0][0].set_ylabel("t [ps]")
    fig.tight_layout()
    path = out / "box_trajectories.svg"
    fig.savefig(path)
    plt.close(fig)
    return path


@_safe
def box_energies(results, out: Path) -> Path:
    from . import quantum
    plt = _pyplot()
    ns = [r.spec.n for r in results]
    micro = [r.energy_micro or 0.0 for r in results]
    exact = [quantum.box_energy(r.spec.n, r.spec.length, r.spec.mass) for r in results]
    fig, ax = plt.subplots(figsize=(5, 4))
    w = 0.38
    pos = np.arange(len(ns))
    ax.bar(pos - w / 2, micro, w, label="chain (from period)")
    ax.bar(pos + w / 2, exact, w, label="box eigenvalue")
    ax.set_xticks(pos, [f"n={n}" for n in ns])
    ax.set_ylabel("E [m_e nm^2/ps^2]")
    ax.legend()
    fig.tight_layout()
    path = out / "box_energies.svg"
    fig.savefig(path)
    plt.close(fig)
    return path


@_safe
def double_slit(r, out: Path) -> Path:
    from .analysis import kde
    plt = _pyplot()
    traj = r.trajectory
    fig, axes = plt.subplots(1, 3, figsize=(13, 4))
    x0 = traj.positions[0]
    axes[0].hist(x0, bins=80, density=True, color="0.7")
    axes[0].set_title("t = 0")
    step = max(1, x0.size // 150)
    axes[1].plot(traj.positions[:, ::step], traj.times, lw=0.3, color="k")
    axes[1].set_ylabel("t [ps]")
    axes[1].set_title("trajectories")
    xf = traj.positions[-1]
    sel = (r.grid > xf.min() - 50) & (r.grid < xf.max() + 50)
    axes[2].hist(xf, bins=100, density=True, color="0.8")
    axes[2].plot(r.grid[sel], r.oracle_density[sel], "C0", label="|psi|^2")
    axes[2].plot(r.grid[sel], kde(xf, r.grid[sel]), "C3", label="chain KDE")
    axes[2].set_title(f"t = {traj.times[-1]:g} ps")
    axes[2].legend()
    for ax in axes:
        ax.set_xlabel("x [nm]")
    fig.tight_layout()
    path = out / "double_slit.svg"
    fig.savefig(path)
    plt.close(fig)
    return path


@_safe
def convergence(r, out: Path) -> Path:
    plt = _pyplot()
    rep = r.report
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(rep.sizes, rep.errors, "o-", label=f"order {rep.order:.2f}")
    n = np.asarray(rep.sizes, dtype=float)
    ax.loglog(n, rep.errors[0] * (n[0] / n) ** 2, "k:", label="N^-2")
    ax.set_xlabel("N")
    ax.set_ylabel("max relative force error")
    ax.legend()
    fig.tight_layout()
    path = out / "convergence.svg"
    fig.savefig(path)
    plt.close(fig)
    return path
