"""Figures for simulated traces, written next to the CSV/JSON artifacts."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FIG_WIDTH = 6.4
FIG_HEIGHT = 3.4

style = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.2,
}


def save_fig(fig, out_dir, name, formats=("png",)):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for ext in formats:
        path = out_dir / f"{name}.{ext}"
        fig.savefig(path, dpi=150, bbox_inches="tight")
        paths.append(path)
    plt.close(fig)
    return paths


def plot_state_norm(trace, plan):
    with plt.rc_context(style):
        fig, ax = plt.subplots(figsize=(FIG_WIDTH, FIG_HEIGHT))
        ax.plot(trace.times, np.linalg.norm(trace.x, axis=1), color="tab:blue", label=r"$\|\tilde x(t)\|$")
        if plan.K:
            ax.plot(plan.disruption_times, plan.H, "x", color="tab:blue", ms=7, label=r"$H_k$ at $t_k$")
            ax.plot(plan.disruption_times, plan.kappa, "o", mfc="none", color="tab:red", label=r"$\kappa_k$")
        ax.set_xlabel("time [s]")
        ax.legend(loc="upper left")
    return fig


def plot_output(trace):
    with plt.rc_context(style):
        fig, ax = plt.subplots(figsize=(FIG_WIDTH, FIG_HEIGHT))
        for i in range(trace.y.shape[1]):
            ax.plot(trace.times, trace.y[:, i], label=rf"$\tilde y_{i + 1}(t)$")
        s = trace.is_sensing
        for i in range(trace.y.shape[1]):
            ax.plot(trace.times[s], trace.y[s, i], "o", mfc="none", color="tab:red", ms=4,
                    label="samples" if i == 0 else None)
        ax.set_xlabel("time [s]")
        ax.legend(loc="upper left")
    return fig


def plot_attack(plan):
    with plt.rc_context(style):
        fig, ax = plt.subplots(figsize=(FIG_WIDTH, FIG_HEIGHT))
        if len(plan.a_bar):
            t = np.append(plan.hold_times(), len(plan.a_bar) * plan.T_a)
            for c in range(plan.p):
                vals = np.append(plan.a_bar[:, c], plan.a_bar[-1, c])
                ax.step(t, vals, where="post", label=rf"$a_{c + 1}(t)$")
            ax.legend(loc="upper left")
        ax.set_xlabel("time [s]")
    return fig


def plot_state_3d(trace, sys):
    """Trajectory against the plane ``ker C`` (three states, one output only)."""
    with plt.rc_context(style):
        fig = plt.figure(figsize=(FIG_WIDTH, FIG_WIDTH * 0.8))
        ax = fig.add_subplot(projection="3d")
        x = trace.x
        ax.plot(x[:, 0], x[:, 1], x[:, 2], color="tab:blue")
        s = trace.is_sensing
        ax.scatter(x[s, 0], x[s, 1], x[s, 2], color="tab:red", s=8)
        c = sys.C[0]
        lim = np.abs(x).max() or 1.0
        u, v = np.meshgrid(np.linspace(-lim, lim, 2), np.linspace(-lim, lim, 2))
        k = int(np.argmax(np.abs(c)))
        free = [i for i in range(3) if i != k]
        pts = np.zeros((3,) + u.shape)
        pts[free[0]], pts[free[1]] = u, v
        pts[k] = -(c[free[0]] * u + c[free[1]] * v) / c[k]
        ax.plot_surface(pts[0], pts[1], pts[2], alpha=0.15, color="gray")
        ax.set_xlabel(r"$\tilde x_1$")
        ax.set_ylabel(r"$\tilde x_2$")
        ax.set_zlabel(r"$\tilde x_3$")
    return fig


def render_figures(trace, plan, out_dir, prefix=""):
    """Write the standard figure set; returns the written paths."""
    paths = []
    paths += save_fig(plot_state_norm(trace, plan), out_dir, f"{prefix}state_norm")
    paths += save_fig(plot_output(trace), out_dir, f"{prefix}output")
    paths += save_fig(plot_attack(plan), out_dir, f"{prefix}attack")
    if trace.sys is not None and trace.sys.n == 3 and trace.sys.q == 1 and np.any(trace.sys.C):
        paths += save_fig(plot_state_3d(trace, trace.sys), out_dir, f"{prefix}state_3d")
    return paths
