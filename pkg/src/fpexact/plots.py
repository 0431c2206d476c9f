"""Figure rendering for the rate report path (files only, Agg backend)."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .verify import RateFit


def plot_gap_curve(curve: Sequence[tuple[int, Fraction]],
                   fit: RateFit | None, path: str) -> str:
    """Log-log gap curve with the fitted power law overlaid; writes `path`."""
    ts = [t for t, _ in curve]
    gaps = [float(g) for _, g in curve]
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    ax.loglog(ts, gaps, "o", markersize=3, color="#1f6fb4",
              label="duality gap of averaged play")
    if fit is not None:
        lo, hi = fit.window
        xs = [lo, hi]
        ys = [fit.coefficient * x ** fit.exponent for x in xs]
        ax.loglog(xs, ys, "-", color="#c44e52",
                  label=f"fit {fit.coefficient:.3f} t^{fit.exponent:.3f}")
    ax.set_xlabel("t")
    ax.set_ylabel("duality gap")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
