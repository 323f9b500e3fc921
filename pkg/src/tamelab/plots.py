"""Figure rendering for report outputs.

Every function writes a PNG next to whatever delimited file the caller is
producing and returns the path.  The Agg backend is forced so headless
runs never touch a display.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def save_cost_curves(path, ns, curves: dict, title: str,
                     ylabel: str = "mean cost"):
    """Overlaid cost curves on a log2 n axis; curves maps label -> values."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for label, ys in curves.items():
        ax.plot(ns, ys, marker="o", markersize=3, linewidth=1.1, label=label)
    ax.set_xscale("log", base=2)
    ax.set_xlabel("n")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def save_residual_plot(path, ns, residuals, fluctuation=None,
                       title: str = "template residuals"):
    """Exact-minus-template residuals, optionally with the pole-pair
    prediction overlaid so oscillation structure is visible."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.plot(ns, residuals, "o-", markersize=3, linewidth=1.1,
            label="exact - template")
    if fluctuation is not None:
        ax.plot(ns, fluctuation, "--", linewidth=1.1,
                label="pole-pair prediction")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("n")
    ax.set_ylabel("residual")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.axhline(0.0, color="black", linewidth=0.6)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def save_spectrum_plot(path, xs, ys, xlabel: str = "s",
                       ylabel: str = "dominant eigenvalue",
                       marks=(), title: str = "operator spectrum"):
    """One curve against a real parameter, with optional vertical marks
    (e.g. pole ordinates)."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ys = np.asarray(ys, dtype=float)
    ax.plot(xs, ys, "o-", markersize=3, linewidth=1.1)
    for m in marks:
        ax.axvline(m, color="firebrick", linewidth=0.8, linestyle=":")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
