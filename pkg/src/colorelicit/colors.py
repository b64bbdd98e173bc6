"""HSL sample space: canonical colors, grid binning, histograms, KDE, RGB.

Everything here is a pure function over immutable inputs. Colors are
integer-valued: hue in [0, 360), saturation and lightness in [0, 100].
"""

from __future__ import annotations

import colorsys
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptySampleSet, InvalidCoordinate

HUE_PERIOD = 360
SAT_MAX = 100
LIGHT_MAX = 100

GRID_SHAPE = (18, 10, 10)
HUE_BIN_WIDTH = 20
SAT_BIN_WIDTH = 10
LIGHT_BIN_WIDTH = 10

DIMENSIONS = ("h", "s", "l")

# Inclusive integer range of each dimension on the lattice.
DIMENSION_RANGES = {"h": (0, 359), "s": (0, 100), "l": (0, 100)}


def _round_half_away(x: float) -> int:
    """Round to the nearest integer, ties away from zero."""
    if x >= 0:
        return int(math.floor(x + 0.5))
    return int(math.ceil(x - 0.5))


@dataclass(frozen=True, order=True)
class HslColor:
    """A point on the integer HSL lattice."""

    h: int
    s: int
    l: int

    def __post_init__(self):
        for name, value in (("h", self.h), ("s", self.s), ("l", self.l)):
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise InvalidCoordinate(f"{name} must be an integer, got {value!r}")
        if not 0 <= self.h < HUE_PERIOD:
            raise InvalidCoordinate(f"h out of range [0, 360): {self.h}")
        if not 0 <= self.s <= SAT_MAX:
            raise InvalidCoordinate(f"s out of range [0, 100]: {self.s}")
        if not 0 <= self.l <= LIGHT_MAX:
            raise InvalidCoordinate(f"l out of range [0, 100]: {self.l}")
        # Normalize numpy integers so equality and serialization are uniform.
        object.__setattr__(self, "h", int(self.h))
        object.__setattr__(self, "s", int(self.s))
        object.__setattr__(self, "l", int(self.l))

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.h, self.s, self.l)

    def value(self, dim: str) -> int:
        if dim not in DIMENSIONS:
            raise ValueError(f"unknown dimension {dim!r}")
        return getattr(self, dim)

    def with_value(self, dim: str, value: int) -> "HslColor":
        if dim not in DIMENSIONS:
            raise ValueError(f"unknown dimension {dim!r}")
        parts = {"h": self.h, "s": self.s, "l": self.l}
        parts[dim] = value
        return HslColor(**parts)

    def __str__(self) -> str:
        return f"[{self.h}, {self.s}, {self.l}]"


def canonicalize(h: float, s: float, l: float) -> HslColor:
    """Map arbitrary finite coordinates onto the integer lattice.

    Hue wraps modulo 360 (circular); saturation and lightness clamp to
    [0, 100]. All three then round half-away-from-zero. Idempotent on
    canonical colors.
    """
    for name, value in (("h", h), ("s", s), ("l", l)):
        if not math.isfinite(value):
            raise InvalidCoordinate(f"{name} is not finite: {value!r}")
    hi = _round_half_away(h % HUE_PERIOD) % HUE_PERIOD
    si = _round_half_away(min(max(s, 0.0), float(SAT_MAX)))
    li = _round_half_away(min(max(l, 0.0), float(LIGHT_MAX)))
    return HslColor(hi, si, li)


def canonicalize_dimension(dim: str, value: float) -> tuple[int, bool]:
    """Wrap (hue) or clamp (saturation/lightness) a single coordinate.

    Returns the canonical integer and whether the input was out of range.
    """
    if not math.isfinite(value):
        raise InvalidCoordinate(f"{dim} is not finite: {value!r}")
    lo, hi = DIMENSION_RANGES[dim]
    out_of_range = not (lo <= value <= hi)
    if dim == "h":
        return _round_half_away(value % HUE_PERIOD) % HUE_PERIOD, out_of_range
    return _round_half_away(min(max(value, float(lo)), float(hi))), out_of_range


def bin_index(c: HslColor) -> tuple[int, int, int]:
    """Grid cell of a canonical color on the 18x10x10 grid.

    The closed upper boundaries (s=100, l=100) fall in the last bin.
    """
    i = min(c.h // HUE_BIN_WIDTH, GRID_SHAPE[0] - 1)
    j = min(c.s // SAT_BIN_WIDTH, GRID_SHAPE[1] - 1)
    k = min(c.l // LIGHT_BIN_WIDTH, GRID_SHAPE[2] - 1)
    return (i, j, k)


def bin_center(index: tuple[int, int, int]) -> HslColor:
    """Integer center of a grid cell (lower edge plus half the bin width)."""
    i, j, k = index
    return HslColor(
        i * HUE_BIN_WIDTH + HUE_BIN_WIDTH // 2,
        j * SAT_BIN_WIDTH + SAT_BIN_WIDTH // 2,
        k * LIGHT_BIN_WIDTH + LIGHT_BIN_WIDTH // 2,
    )


@dataclass(frozen=True, eq=False)
class GridHistogram:
    """Normalized probability mass on the 18x10x10 H-S-L grid."""

    bins: np.ndarray
    sample_count: int = 0

    def __post_init__(self):
        arr = np.asarray(self.bins, dtype=float)
        if arr.shape != GRID_SHAPE:
            raise ValueError(f"expected bins of shape {GRID_SHAPE}, got {arr.shape}")
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValueError("bins must be finite and nonnegative")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "bins", arr)

    @classmethod
    def from_mass(cls, mass: np.ndarray, sample_count: int = 0) -> "GridHistogram":
        """Normalize arbitrary nonnegative mass into a histogram."""
        arr = np.asarray(mass, dtype=float)
        total = arr.sum()
        if not np.isfinite(total) or total <= 0:
            raise ValueError("mass must have positive finite total")
        return cls(arr / total, sample_count)

    def allclose(self, other: "GridHistogram", atol: float = 1e-12) -> bool:
        return np.allclose(self.bins, other.bins, atol=atol)


def histogram(samples: Sequence[HslColor] | Iterable[HslColor]) -> GridHistogram:
    """Empirical grid histogram of a sample set (normalized counts)."""
    counts = grid_counts(samples)
    total = counts.sum()
    if total == 0:
        raise EmptySampleSet("cannot build a histogram from zero samples")
    return GridHistogram(counts / total, sample_count=int(total))


def grid_counts(samples: Iterable[HslColor]) -> np.ndarray:
    """Raw per-cell counts on the grid (float array, shape 18x10x10)."""
    counts = np.zeros(GRID_SHAPE, dtype=float)
    for c in samples:
        counts[bin_index(c)] += 1.0
    return counts


def _projection_axis(dim: str, step: float) -> np.ndarray:
    # Hue spans [0, 360) exclusive; saturation/lightness include the endpoint.
    if dim == "h":
        return np.arange(0.0, float(HUE_PERIOD), step)
    return np.arange(0.0, float(SAT_MAX) + step / 2, step)


@dataclass(frozen=True, eq=False)
class KdeEstimate:
    """2-D Gaussian kernel density on a projected dimension pair."""

    projection: tuple[str, str]
    grid_x: np.ndarray
    grid_y: np.ndarray
    density: np.ndarray  # shape (len(grid_x), len(grid_y))
    bandwidth: float

    def riemann_mass(self) -> float:
        """Riemann-sum of the density over the evaluation grid."""
        dx = float(self.grid_x[1] - self.grid_x[0]) if len(self.grid_x) > 1 else 1.0
        dy = float(self.grid_y[1] - self.grid_y[0]) if len(self.grid_y) > 1 else 1.0
        return float(self.density.sum() * dx * dy)


def kde(
    samples: Sequence[HslColor],
    bandwidth: float = 1.0,
    projection: tuple[str, str] = ("h", "s"),
    grid_step: float = 1.0,
) -> KdeEstimate:
    """Product-Gaussian kernel density of samples projected onto two dims.

    Hue is treated linearly (no circular kernel). The evaluation grid spans
    each dimension's full range at ``grid_step`` resolution.
    """
    samples = list(samples)
    if not samples:
        raise EmptySampleSet("kde needs at least one sample")
    if bandwidth <= 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    dx_name, dy_name = projection
    for name in (dx_name, dy_name):
        if name not in DIMENSIONS:
            raise ValueError(f"unknown projection dimension {name!r}")
    if grid_step <= 0:
        raise ValueError(f"grid_step must be positive, got {grid_step}")
    gx = _projection_axis(dx_name, grid_step)
    gy = _projection_axis(dy_name, grid_step)
    xs = np.array([c.value(dx_name) for c in samples], dtype=float)
    ys = np.array([c.value(dy_name) for c in samples], dtype=float)
    # Separable kernel: exp(-d^2/2bw^2) factors over the two axes.
    kx = np.exp(-0.5 * ((gx[:, None] - xs[None, :]) / bandwidth) ** 2)
    ky = np.exp(-0.5 * ((gy[:, None] - ys[None, :]) / bandwidth) ** 2)
    density = (kx @ ky.T) / (len(samples) * 2.0 * math.pi * bandwidth**2)
    density.setflags(write=False)
    gx = gx.copy()
    gy = gy.copy()
    gx.setflags(write=False)
    gy.setflags(write=False)
    return KdeEstimate((dx_name, dy_name), gx, gy, density, float(bandwidth))


def hsl_to_rgb(c: HslColor) -> tuple[int, int, int]:
    """Convert a canonical HSL color to 8-bit RGB (standard hue-sector map)."""
    r, g, b = colorsys.hls_to_rgb(c.h / HUE_PERIOD, c.l / LIGHT_MAX, c.s / SAT_MAX)
    return (
        _round_half_away(r * 255),
        _round_half_away(g * 255),
        _round_half_away(b * 255),
    )
