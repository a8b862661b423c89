"""Optional figure rendering; matplotlib is imported only when a figure is requested."""
from __future__ import annotations

from pathlib import Path

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_heatmap(png_path, omega_r, omega_t, values, title: str = "", markers=None,
                   level: float | None = 1.0) -> Path:
    """Write ``values`` (rows omega_r, columns omega_t) as an image with optional markers."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    extent = (omega_t[0], omega_t[-1], omega_r[0], omega_r[-1])
    im = ax.imshow(values, origin="lower", extent=extent, aspect="auto", cmap="viridis")
    if level is not None and np.nanmax(values) >= level * 0.5:
        ax.contour(omega_t, omega_r, values, levels=[level], colors="w", linewidths=0.6)
    if markers:
        ax.plot([m[1] for m in markers], [m[0] for m in markers], "r+", ms=9, mew=1.5)
    ax.set_xlabel(r"$\omega^t$")
    ax.set_ylabel(r"$\omega^r$")
    if title:
        ax.set_title(title)
    fig.colorbar(im, ax=ax, label=r"$\|\chi\|_2$")
    fig.tight_layout()
    png_path = Path(png_path)
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return png_path


def render_residuals(png_path, history) -> Path:
    """Primal/dual residual traces from ``SolveResult.history``."""
    plt = _pyplot()
    h = np.asarray(history, dtype=float)
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.semilogy(h[:, 0], h[:, 1], label="primal")
    ax.semilogy(h[:, 0], h[:, 2], label="dual")
    ax.set_xlabel("iteration")
    ax.set_ylabel("relative residual")
    ax.legend()
    fig.tight_layout()
    png_path = Path(png_path)
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return png_path
