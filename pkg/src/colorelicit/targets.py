"""Ground-truth distributions over the integer HSL lattice.

A target exposes just enough structure for the synthetic oracle: pointwise
density, the lattice maximum, exact lattice sampling, and exact single
dimension conditionals. ``TargetSpec`` is the standard implementation, a
mixture of hue-wrapped Gaussians; other shapes can subclass
``LatticeTarget`` and supply a density cube.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .colors import (
    DIMENSIONS,
    GRID_SHAPE,
    GridHistogram,
    HslColor,
    HUE_BIN_WIDTH,
    HUE_PERIOD,
    LIGHT_BIN_WIDTH,
    LIGHT_MAX,
    SAT_BIN_WIDTH,
    SAT_MAX,
)
from .errors import DegenerateTarget

LATTICE_SHAPE = (HUE_PERIOD, SAT_MAX + 1, LIGHT_MAX + 1)

_AXIS_VALUES = {
    "h": np.arange(HUE_PERIOD, dtype=float),
    "s": np.arange(SAT_MAX + 1, dtype=float),
    "l": np.arange(LIGHT_MAX + 1, dtype=float),
}
_AXIS_INDEX = {"h": 0, "s": 1, "l": 2}


class LatticeTarget:
    """A distribution defined by its (unnormalized) density on the lattice.

    Subclasses provide ``density_cube``; everything else is derived from it.
    The cube is cached, so keep targets immutable after construction.
    """

    _cube: np.ndarray | None = None
    _flat_cdf: np.ndarray | None = None
    _max_density: float | None = None

    def density_cube(self) -> np.ndarray:
        raise NotImplementedError

    def _cached_cube(self) -> np.ndarray:
        if self._cube is None:
            cube = np.asarray(self.density_cube(), dtype=float)
            if cube.shape != LATTICE_SHAPE:
                raise ValueError(f"density cube must have shape {LATTICE_SHAPE}")
            if np.any(cube < 0) or not np.all(np.isfinite(cube)):
                raise DegenerateTarget("density must be finite and nonnegative")
            total = cube.sum()
            if not np.isfinite(total) or total <= 0:
                raise DegenerateTarget("target has zero total mass on the lattice")
            self._cube = cube
        return self._cube

    def density(self, c: HslColor) -> float:
        return float(self._cached_cube()[c.h, c.s, c.l])

    def max_density(self) -> float:
        if self._max_density is None:
            self._max_density = float(self._cached_cube().max())
        return self._max_density

    def lattice_total(self) -> float:
        return float(self._cached_cube().sum())

    def sample(self, rng: np.random.Generator) -> HslColor:
        """Exact lattice sample via inverse CDF over the enumerated cube."""
        if self._flat_cdf is None:
            flat = self._cached_cube().ravel()
            self._flat_cdf = np.cumsum(flat / flat.sum())
        idx = int(np.searchsorted(self._flat_cdf, rng.random(), side="right"))
        idx = min(idx, self._flat_cdf.size - 1)
        h, s, l = np.unravel_index(idx, LATTICE_SHAPE)
        return HslColor(int(h), int(s), int(l))

    def axis_marginal(self, dim: str) -> np.ndarray:
        """Normalized marginal along one dimension (others summed out)."""
        if dim not in DIMENSIONS:
            raise ValueError(f"unknown dimension {dim!r}")
        cube = self._cached_cube()
        axes = tuple(i for i in range(3) if i != _AXIS_INDEX[dim])
        line = cube.sum(axis=axes)
        return line / line.sum()

    def conditional(self, missing: str, fixed: Mapping[str, int]) -> np.ndarray:
        """Normalized conditional over one dimension, the other two fixed.

        Conditioning on a zero-mass slice is a measure-zero event where any
        version of the conditional is valid; this one falls back to the
        axis marginal, which keeps degenerate targets (point masses)
        reachable from any state.
        """
        if missing not in DIMENSIONS:
            raise ValueError(f"unknown dimension {missing!r}")
        cube = self._cached_cube()
        index: list[object] = [slice(None)] * 3
        for dim in DIMENSIONS:
            if dim != missing:
                index[_AXIS_INDEX[dim]] = int(fixed[dim])
        line = np.asarray(cube[tuple(index)], dtype=float)
        total = line.sum()
        if not np.isfinite(total):
            raise DegenerateTarget(
                f"conditional over {missing!r} is not finite at {dict(fixed)}"
            )
        if total <= 0:
            return self.axis_marginal(missing)
        return line / total

    def grid_histogram(self) -> GridHistogram:
        """Target mass aggregated onto the 18x10x10 grid, normalized.

        Saturation/lightness have 101 lattice points for 10 bins; the final
        point (value 100) belongs to the last bin.
        """
        cube = self._cached_cube()
        h_part = cube.reshape(GRID_SHAPE[0], HUE_BIN_WIDTH, SAT_MAX + 1, LIGHT_MAX + 1).sum(axis=1)
        s_edges = np.minimum(np.arange(SAT_MAX + 1) // SAT_BIN_WIDTH, GRID_SHAPE[1] - 1)
        l_edges = np.minimum(np.arange(LIGHT_MAX + 1) // LIGHT_BIN_WIDTH, GRID_SHAPE[2] - 1)
        out = np.zeros(GRID_SHAPE, dtype=float)
        for j in range(GRID_SHAPE[1]):
            part = h_part[:, s_edges == j, :].sum(axis=1)
            for k in range(GRID_SHAPE[2]):
                out[:, j, k] = part[:, l_edges == k].sum(axis=1)
        return GridHistogram.from_mass(out)


def _circular_hue_delta(values: np.ndarray, mean: float) -> np.ndarray:
    raw = np.abs(values - (mean % HUE_PERIOD))
    return np.minimum(raw, HUE_PERIOD - raw)


@dataclass(frozen=True)
class MixtureComponent:
    weight: float
    mean: tuple[float, float, float]
    stddev: tuple[float, float, float]

    def __post_init__(self):
        if not (self.weight > 0 and math.isfinite(self.weight)):
            raise DegenerateTarget(f"component weight must be positive: {self.weight}")
        if len(self.mean) != 3 or len(self.stddev) != 3:
            raise DegenerateTarget("mean and stddev must have three entries")
        if not all(math.isfinite(m) for m in self.mean):
            raise DegenerateTarget(f"component mean must be finite: {self.mean}")
        if not all(sd > 0 and math.isfinite(sd) for sd in self.stddev):
            raise DegenerateTarget(f"component stddevs must be positive: {self.stddev}")
        object.__setattr__(self, "weight", float(self.weight))
        object.__setattr__(self, "mean", tuple(float(m) for m in self.mean))
        object.__setattr__(self, "stddev", tuple(float(sd) for sd in self.stddev))


class TargetSpec(LatticeTarget):
    """Mixture of hue-wrapped Gaussians evaluated on the integer lattice.

    Hue distance is circular (min(|dh|, 360 - |dh|)); saturation and
    lightness are plain Gaussians. Weights must sum to 1. The separable
    per-component structure gives exact sampling and conditionals without
    materializing the full cube.
    """

    def __init__(self, components: Sequence[MixtureComponent | tuple]):
        comps = []
        for comp in components:
            if not isinstance(comp, MixtureComponent):
                comp = MixtureComponent(*comp)
            comps.append(comp)
        if not comps:
            raise DegenerateTarget("a mixture needs at least one component")
        total_weight = sum(c.weight for c in comps)
        if abs(total_weight - 1.0) > 1e-9:
            raise DegenerateTarget(f"component weights must sum to 1, got {total_weight}")
        self.components = tuple(comps)
        # Per-component axis profiles f(h), g(s), e(l) with normal constants,
        # the building blocks of density, sampling, and conditionals.
        self._profiles: dict[str, np.ndarray] = {}
        for dim, axis in _AXIS_VALUES.items():
            rows = []
            for comp in self.components:
                mu = comp.mean[_AXIS_INDEX[dim]]
                sd = comp.stddev[_AXIS_INDEX[dim]]
                delta = _circular_hue_delta(axis, mu) if dim == "h" else axis - mu
                rows.append(
                    np.exp(-0.5 * (delta / sd) ** 2) / (sd * math.sqrt(2.0 * math.pi))
                )
            self._profiles[dim] = np.asarray(rows)
        weights = np.array([c.weight for c in self.components])
        axis_sums = {dim: prof.sum(axis=1) for dim, prof in self._profiles.items()}
        # Lattice mass of each component and of the whole mixture.
        self._component_mass = (
            weights * axis_sums["h"] * axis_sums["s"] * axis_sums["l"]
        )
        total = self._component_mass.sum()
        if not np.isfinite(total) or total <= 0:
            raise DegenerateTarget("mixture has zero total mass on the lattice")
        self._weights = weights
        self._component_cdf = np.cumsum(self._component_mass / total)
        self._axis_cdfs = {
            dim: np.cumsum(prof, axis=1) / prof.sum(axis=1, keepdims=True)
            for dim, prof in self._profiles.items()
        }

    def density(self, c: HslColor) -> float:
        f = self._profiles["h"][:, c.h]
        g = self._profiles["s"][:, c.s]
        e = self._profiles["l"][:, c.l]
        return float(np.dot(self._weights, f * g * e))

    def density_cube(self) -> np.ndarray:
        wf = self._weights[:, None] * self._profiles["h"]
        return np.einsum("ch,cs,cl->hsl", wf, self._profiles["s"], self._profiles["l"])

    def lattice_total(self) -> float:
        return float(self._component_mass.sum())

    def sample(self, rng: np.random.Generator) -> HslColor:
        """Exact draw from the lattice-normalized mixture.

        Component densities are separable, so a component index followed by
        three per-axis inverse-CDF draws reproduces the cube-enumerated
        distribution exactly.
        """
        ci = int(np.searchsorted(self._component_cdf, rng.random(), side="right"))
        ci = min(ci, len(self.components) - 1)
        coords = {}
        for dim in DIMENSIONS:
            cdf = self._axis_cdfs[dim][ci]
            idx = int(np.searchsorted(cdf, rng.random(), side="right"))
            coords[dim] = min(idx, cdf.size - 1)
        return HslColor(coords["h"], coords["s"], coords["l"])

    def axis_marginal(self, dim: str) -> np.ndarray:
        if dim not in DIMENSIONS:
            raise ValueError(f"unknown dimension {dim!r}")
        scale = self._weights.copy()
        for other in DIMENSIONS:
            if other != dim:
                scale = scale * self._profiles[other].sum(axis=1)
        line = scale @ self._profiles[dim]
        return line / line.sum()

    def conditional(self, missing: str, fixed: Mapping[str, int]) -> np.ndarray:
        if missing not in DIMENSIONS:
            raise ValueError(f"unknown dimension {missing!r}")
        scale = self._weights.copy()
        for dim in DIMENSIONS:
            if dim != missing:
                scale = scale * self._profiles[dim][:, int(fixed[dim])]
        line = scale @ self._profiles[missing]
        total = line.sum()
        if not np.isfinite(total):
            raise DegenerateTarget(
                f"conditional over {missing!r} is not finite at {dict(fixed)}"
            )
        if total <= 0:
            # Zero-mass conditioning slice (deep underflow): fall back to
            # the axis marginal, as in the generic lattice target.
            return self.axis_marginal(missing)
        return line / total

    def grid_histogram(self) -> GridHistogram:
        s_bins = np.minimum(np.arange(SAT_MAX + 1) // SAT_BIN_WIDTH, GRID_SHAPE[1] - 1)
        l_bins = np.minimum(np.arange(LIGHT_MAX + 1) // LIGHT_BIN_WIDTH, GRID_SHAPE[2] - 1)
        out = np.zeros(GRID_SHAPE, dtype=float)
        for ci in range(len(self.components)):
            fh = self._profiles["h"][ci].reshape(GRID_SHAPE[0], HUE_BIN_WIDTH).sum(axis=1)
            gs = np.bincount(s_bins, weights=self._profiles["s"][ci], minlength=GRID_SHAPE[1])
            el = np.bincount(l_bins, weights=self._profiles["l"][ci], minlength=GRID_SHAPE[2])
            out += self._weights[ci] * np.einsum("i,j,k->ijk", fh, gs, el)
        return GridHistogram.from_mass(out)

    def to_dict(self) -> dict:
        return {
            "components": [
                {"weight": c.weight, "mean": list(c.mean), "stddev": list(c.stddev)}
                for c in self.components
            ]
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "TargetSpec":
        comps = [
            MixtureComponent(
                weight=entry["weight"],
                mean=tuple(entry["mean"]),
                stddev=tuple(entry["stddev"]),
            )
            for entry in data["components"]
        ]
        return cls(comps)
