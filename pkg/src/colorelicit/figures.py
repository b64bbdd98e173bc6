"""Figure rendering: chain color strips, diagnostic traces, scatter + KDE.

All renderers write lossless PNGs and are deterministic functions of their
inputs (plot metadata that would embed wall-clock time is suppressed), so
re-rendering a log produces byte-identical files.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from PIL import Image

from .colors import HslColor, hsl_to_rgb, kde
from .diagnostics import RhatTrace
from .errors import EmptySampleSet, EmptyTrace

CONVERGENCE_THRESHOLD = 1.1

_AXIS_LIMITS = {"h": (0, 360), "s": (0, 100), "l": (0, 100)}
_AXIS_LABELS = {"h": "Hue", "s": "Saturation", "l": "Lightness"}

# Cells beyond a chain's retained samples (ragged direct-sampling rows).
_PAD_RGB = (0, 0, 0)


def render_color_strip(
    chains: Sequence[Sequence[HslColor]],
    path: str | Path,
    cell_size: int = 1,
) -> Path:
    """One row per chain, one column per sample, each cell the sample color.

    ``cell_size`` scales each cell to a square of that many pixels for
    readability; the default keeps one pixel per sample.
    """
    chains = [list(c) for c in chains]
    if not chains or all(len(c) == 0 for c in chains):
        raise EmptySampleSet("color strip needs at least one sample")
    width = max(len(c) for c in chains)
    pixels = np.zeros((len(chains), width, 3), dtype=np.uint8)
    pixels[:, :] = _PAD_RGB
    for row, chain in enumerate(chains):
        for col, color in enumerate(chain):
            pixels[row, col] = hsl_to_rgb(color)
    if cell_size > 1:
        pixels = np.repeat(np.repeat(pixels, cell_size, axis=0), cell_size, axis=1)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(pixels, mode="RGB").save(path, format="PNG")
    return path


def render_rhat_trace(
    traces: Mapping[str, RhatTrace],
    path: str | Path,
    threshold: float = CONVERGENCE_THRESHOLD,
) -> Path:
    """Cumulative diagnostic traces with the convergence threshold rule.

    Infinite entries (degenerate separated chains) are clipped to the plot
    ceiling and marked.
    """
    if not traces:
        raise EmptyTrace("no traces to plot")
    for label, trace in traces.items():
        if not trace.values:
            raise EmptyTrace(f"trace {label!r} has no entries")
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    finite_max = max(
        (v for t in traces.values() for v in t.values if math.isfinite(v)),
        default=threshold,
    )
    ceiling = max(threshold * 1.5, min(finite_max, 10.0) * 1.1)
    for label, trace in traces.items():
        values = np.asarray(trace.values)
        clipped = np.minimum(values, ceiling)
        line, = ax.plot(trace.iterations, clipped, label=label, linewidth=1.2)
        infinite = ~np.isfinite(values)
        if infinite.any():
            its = np.asarray(trace.iterations)[infinite]
            ax.plot(
                its, np.full(its.shape, ceiling), linestyle="none",
                marker="^", markersize=4, color=line.get_color(),
            )
    ax.axhline(threshold, color="black", linestyle="--", linewidth=1.0)
    ax.set_ylim(bottom=0.8, top=ceiling * 1.05)
    ax.set_xlabel("Iteration")
    ax.set_ylabel("Cumulative diagnostic")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="png", metadata={"Date": None})
    plt.close(fig)
    return path


def render_scatter_kde(
    samples: Sequence[HslColor],
    path: str | Path,
    projection: tuple[str, str] = ("h", "s"),
    bandwidth: float = 1.0,
    kde_grid_step: float = 2.0,
) -> Path:
    """Scatter of samples on a dimension pair with KDE iso-density contours."""
    samples = list(samples)
    if not samples:
        raise EmptySampleSet("scatter needs at least one sample")
    estimate = kde(samples, bandwidth=bandwidth, projection=projection, grid_step=kde_grid_step)
    dx, dy = projection
    xs = [c.value(dx) for c in samples]
    ys = [c.value(dy) for c in samples]
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    ax.scatter(xs, ys, s=6, color="#33415c", alpha=0.5, linewidths=0)
    if estimate.density.max() > 0:
        levels = np.linspace(0, estimate.density.max(), 8)[1:]
        ax.contour(
            estimate.grid_x, estimate.grid_y, estimate.density.T,
            levels=levels, cmap="viridis", linewidths=0.8,
        )
    ax.set_xlim(*_AXIS_LIMITS[dx])
    ax.set_ylim(*_AXIS_LIMITS[dy])
    ax.set_xlabel(_AXIS_LABELS[dx])
    ax.set_ylabel(_AXIS_LABELS[dy])
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="png", metadata={"Date": None})
    plt.close(fig)
    return path
