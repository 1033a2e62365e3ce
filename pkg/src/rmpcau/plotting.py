"""Figures written next to the CSV reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def _closed(poly):
    poly = np.asarray(poly, float)
    return np.vstack([poly, poly[:1]]) if len(poly) else poly


def plot_slices(slices, path, title=None, labels=("d [m]", r"$\Delta v$ [m/s]")):
    """``slices`` maps a scaling value to an ordered polygon (k x 2 array)."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.2, 3.4))
        cmap = plt.get_cmap("viridis")
        keys = sorted(slices)
        for i, y in enumerate(keys):
            poly = _closed(slices[y])
            if len(poly) == 0:
                continue
            color = cmap(i / max(1, len(keys) - 1))
            ax.fill(poly[:, 0], poly[:, 1], color=color, alpha=0.15)
            ax.plot(poly[:, 0], poly[:, 1], color=color, lw=1.2, label=f"y = {y:g}")
        ax.set_xlabel(labels[0])
        ax.set_ylabel(labels[1])
        if title:
            ax.set_title(title)
        ax.legend(loc="best")
        fig.savefig(path)
        plt.close(fig)


def plot_trace(trace, path, dt=1.0):
    X = trace.states
    t = np.arange(len(X)) * dt
    with plt.rc_context(RC):
        fig, axes = plt.subplots(3, 1, figsize=(4.8, 5.2), sharex=True)
        axes[0].plot(t, X[:, 0], lw=1.2)
        axes[0].set_ylabel("d [m]")
        axes[1].step(t[:-1], np.array(trace.u)[:, 0], where="post", lw=1.0, label="u")
        axes[1].step(t[:-1], np.array(trace.w)[:, 0], where="post", lw=1.0, label="w")
        axes[1].legend(loc="best")
        axes[1].set_ylabel("accel. [m/s$^2$]")
        axes[2].step(t[:-1], [Y.flat[0] for Y in trace.Y], where="post", lw=1.2)
        axes[2].set_ylabel("y*")
        axes[2].set_xlabel("time [s]")
        fig.savefig(path)
        plt.close(fig)


def plot_sweep(rows, path):
    lam = np.array([r.lam for r in rows])
    # log axis needs positive abscissae; lambda = 0 is drawn at the left margin
    pos = lam[lam > 0]
    floor = pos.min() / 10 if pos.size else 1e-2
    x = np.where(lam > 0, lam, floor)
    with plt.rc_context(RC):
        fig, axes = plt.subplots(2, 1, figsize=(4.2, 4.2), sharex=True)
        axes[0].plot(x, [r.y_star for r in rows], "o-")
        axes[0].set_ylabel("y*")
        axes[1].plot(x, [r.avg_distance for r in rows], "s-")
        axes[1].set_ylabel("average d [m]")
        axes[1].set_xlabel(r"$\lambda$")
        axes[1].set_xscale("log")
        fig.savefig(path)
        plt.close(fig)
