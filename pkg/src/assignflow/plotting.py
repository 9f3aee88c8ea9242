"""PNG figures for the CLI report paths (Agg backend, no display needed)."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

LABEL_COLORS = np.array(
    [[0.85, 0.15, 0.15], [0.2, 0.65, 0.25], [0.2, 0.35, 0.85], [0.95, 0.75, 0.1], [0.55, 0.3, 0.7]]
)


def _colors(labels):
    labels = np.asarray(labels)
    return LABEL_COLORS[labels % len(LABEL_COLORS)]


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_labelings(path, before, after, titles=("input", "output")):
    """Side-by-side label grids."""
    fig, axes = plt.subplots(1, 2, figsize=(6, 3.2))
    for ax, lab, title in zip(axes, (before, after), titles):
        ax.imshow(_colors(lab), interpolation="nearest")
        ax.set_title(title)
        ax.set_xticks([])
        ax.set_yticks([])
    return _save(fig, path)


def plot_diagnostics(path, traj, threshold=None):
    fig, ax = plt.subplots(1, 2, figsize=(8, 3.2))
    ax[0].semilogy(traj.times, np.maximum(traj.avg_entropy, 1e-300), color="C0")
    if threshold is not None:
        ax[0].axhline(threshold, ls="--", color="0.5", lw=0.8)
    ax[0].set_xlabel("t")
    ax[0].set_ylabel("average entropy")
    if np.all(np.isnan(traj.lyapunov)):
        ax[1].plot(traj.times, traj.min_rowmax, color="C1")
        ax[1].set_ylabel("min row max")
    else:
        ax[1].plot(traj.times, traj.lyapunov, color="C1")
        ax[1].set_ylabel("<S, Omega_hat S>")
    ax[1].set_xlabel("t")
    return _save(fig, path)


def plot_spectrum(path, eigenvalues, title="spectrum"):
    lam = np.asarray(eigenvalues, dtype=complex)
    fig, ax = plt.subplots(figsize=(4, 3.2))
    ax.axvline(0.0, color="0.6", lw=0.8)
    ax.axhline(0.0, color="0.6", lw=0.8)
    ax.scatter(lam.real, lam.imag, s=14, color="C3")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_title(title)
    return _save(fig, path)


def _to_triangle(P):
    # barycentric -> planar equilateral triangle
    P = np.atleast_2d(P)
    x = P[:, 1] + 0.5 * P[:, 2]
    y = np.sqrt(3) / 2 * P[:, 2]
    return x, y


def plot_simplex_trajectories(path, trajectories, title=""):
    """Curves on the 2-simplex, one per ``(k, 3)`` array."""
    fig, ax = plt.subplots(figsize=(4, 3.6))
    corners = np.vstack([np.eye(3), np.eye(3)[:1]])
    ax.plot(*_to_triangle(corners), color="k", lw=0.8)
    for k, X in enumerate(trajectories):
        x, y = _to_triangle(X)
        ax.plot(x, y, lw=0.9, color=f"C{k % 10}")
        ax.plot(x[:1], y[:1], "o", ms=3, color=f"C{k % 10}")
    ax.set_aspect("equal")
    ax.axis("off")
    ax.set_title(title)
    return _save(fig, path)


def plot_portrait(path, rows, kind):
    """Quiver plot of phase-portrait samples."""
    rows = np.asarray(rows, dtype=float)
    fig, ax = plt.subplots(figsize=(4, 3.6))
    samples = np.unique(rows[:, 0]).astype(int)
    if kind == "representative":
        P = np.zeros((samples.size, 3))
        F = np.zeros((samples.size, 3))
        P[rows[:, 0].astype(int), rows[:, 2].astype(int)] = rows[:, 3]
        F[rows[:, 0].astype(int), rows[:, 2].astype(int)] = rows[:, 4]
        x, y = _to_triangle(P)
        u = F[:, 1] + 0.5 * F[:, 2]
        v = np.sqrt(3) / 2 * F[:, 2]
        corners = np.vstack([np.eye(3), np.eye(3)[:1]])
        ax.plot(*_to_triangle(corners), color="k", lw=0.8)
        ax.set_aspect("equal")
    else:
        sel = rows[rows[:, 2] == 0]
        m = int(sel[:, 1].max()) + 1
        if m != 2:
            plt.close(fig)
            return None
        X = np.zeros((samples.size, m))
        U = np.zeros((samples.size, m))
        X[sel[:, 0].astype(int), sel[:, 1].astype(int)] = sel[:, 3]
        U[sel[:, 0].astype(int), sel[:, 1].astype(int)] = sel[:, 4]
        x, y, u, v = X[:, 0], X[:, 1], U[:, 0], U[:, 1]
        ax.set_xlabel("S_00")
        ax.set_ylabel("S_10")
    ax.quiver(x, y, u, v, angles="xy", color="C0", width=0.004)
    return _save(fig, path)
