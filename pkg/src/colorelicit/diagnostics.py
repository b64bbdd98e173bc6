"""Convergence diagnostics and representational-alignment metrics.

All functions here are pure. Chains enter as plain value sequences (or
HslColor sequences treated per dimension); distributions enter as grid
histograms on the shared 18x10x10 grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .colors import (
    DIMENSIONS,
    GRID_SHAPE,
    GridHistogram,
    HslColor,
    bin_center,
    bin_index,
    grid_counts,
)
from .errors import EmptyTrace, GridMismatch, MissingReference
from .samplers import ChainOutput


def gelman_rubin(chains: Sequence[Sequence[float]]) -> float:
    """Potential scale reduction factor over >= 2 equal-length chains.

    W is the mean within-chain sample variance (denominator n-1) and B/n
    the unbiased variance of the chain means; the pooled estimate is
    V = ((n-1)/n) W + B/n and the statistic sqrt(V/W).

    Degenerate cases: all chains constant and identical gives 1.0; chains
    constant but separated gives +inf.
    """
    arr = np.asarray(chains, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 2:
        raise ValueError("gelman_rubin needs at least 2 chains of equal length")
    m, n = arr.shape
    if n < 2:
        raise ValueError("gelman_rubin needs at least 2 values per chain")
    w = float(arr.var(axis=1, ddof=1).mean())
    b_over_n = float(arr.mean(axis=1).var(ddof=1))
    if w == 0.0:
        return 1.0 if b_over_n == 0.0 else math.inf
    v = (n - 1) / n * w + b_over_n
    return math.sqrt(v / w)


def _dimension_matrix(chains: Sequence[Sequence[HslColor]], dim: str) -> np.ndarray:
    return np.asarray(
        [[c.value(dim) for c in chain] for chain in chains], dtype=float
    )


def rhat_vector(chains: Sequence[Sequence[HslColor]], t: int) -> float:
    """Max over H, S, L of the per-dimension statistic on the first t samples."""
    if t < 2:
        raise ValueError(f"t must be >= 2, got {t}")
    return max(
        gelman_rubin(_dimension_matrix(chains, dim)[:, :t]) for dim in DIMENSIONS
    )


@dataclass
class RhatTrace:
    """Cumulative diagnostic values for t = 2..T (max over dimensions)."""

    iterations: list[int]
    values: list[float]
    per_dimension: dict[str, list[float]]
    degenerate: list[bool]

    def final(self) -> float:
        if not self.values:
            raise EmptyTrace("trace has no entries")
        return self.values[-1]

    def first_below(self, threshold: float = 1.1) -> int | None:
        """Earliest t whose cumulative value is at or below the threshold."""
        for t, v in zip(self.iterations, self.values):
            if v <= threshold:
                return t
        return None


def cumulative_rhat(chains: Sequence[Sequence[HslColor]]) -> RhatTrace:
    """Cumulative per-dimension diagnostic over growing prefixes.

    Uses prefix sums so the whole trace costs the same as one pass over
    the chains. Entries where every chain prefix has zero within-chain
    variance are flagged degenerate (value 1.0 if the chains agree, +inf
    if they are apart).
    """
    lengths = {len(chain) for chain in chains}
    if len(chains) < 2:
        raise ValueError("cumulative_rhat needs at least 2 chains")
    if len(lengths) != 1:
        raise ValueError(f"chains must share one length, got {sorted(lengths)}")
    n = lengths.pop()
    if n < 2:
        raise EmptyTrace("chains of length < 2 yield an empty trace")
    ts = np.arange(2, n + 1)
    per_dim: dict[str, np.ndarray] = {}
    degenerate = np.zeros(len(ts), dtype=bool)
    for dim in DIMENSIONS:
        arr = _dimension_matrix(chains, dim)  # (m, n)
        m = arr.shape[0]
        cs = np.cumsum(arr, axis=1)[:, 1:]  # prefix sums at t = 2..n
        css = np.cumsum(arr * arr, axis=1)[:, 1:]
        means = cs / ts
        within = np.maximum(css - ts * means**2, 0.0) / (ts - 1)
        w = within.mean(axis=0)
        grand = means.mean(axis=0)
        b_over_n = ((means - grand) ** 2).sum(axis=0) / (m - 1)
        zero_w = w == 0.0
        degenerate |= zero_w
        with np.errstate(divide="ignore", invalid="ignore"):
            v = (ts - 1) / ts * w + b_over_n
            values = np.sqrt(v / w)
        values[zero_w & (b_over_n == 0.0)] = 1.0
        values[zero_w & (b_over_n > 0.0)] = math.inf
        per_dim[dim] = values
    stacked = np.vstack([per_dim[d] for d in DIMENSIONS])
    return RhatTrace(
        iterations=[int(t) for t in ts],
        values=[float(v) for v in stacked.max(axis=0)],
        per_dimension={d: [float(v) for v in per_dim[d]] for d in DIMENSIONS},
        degenerate=[bool(d) for d in degenerate],
    )


def hellinger(p: GridHistogram, q: GridHistogram) -> float:
    """Hellinger distance sqrt(0.5 * sum((sqrt(p) - sqrt(q))^2)) in [0, 1]."""
    if p.bins.shape != q.bins.shape:
        raise GridMismatch(f"grids differ: {p.bins.shape} vs {q.bins.shape}")
    diff = np.sqrt(p.bins) - np.sqrt(q.bins)
    # Normalized inputs keep this in [0, 1]; rounding can overshoot by ulps.
    return min(1.0, float(math.sqrt(0.5 * float((diff * diff).sum()))))


def mode_of(h: GridHistogram) -> HslColor:
    """Center of the maximal-mass grid cell (ties: lowest linear index)."""
    idx = np.unravel_index(int(np.argmax(h.bins)), GRID_SHAPE)
    return bin_center(idx)


def mode_distance(a: HslColor, b: HslColor, hue_metric: str = "linear") -> float:
    """Euclidean distance between two colors.

    Hue difference is plain (linear) by default; the circular option uses
    min(|dh|, 360 - |dh|).
    """
    dh = float(a.h - b.h)
    if hue_metric == "circular":
        dh = min(abs(dh), 360.0 - abs(dh))
    elif hue_metric != "linear":
        raise ValueError(f"unknown hue metric {hue_metric!r}")
    ds = float(a.s - b.s)
    dl = float(a.l - b.l)
    return math.sqrt(dh * dh + ds * ds + dl * dl)


@dataclass
class ProgressionCurve:
    """Alignment metrics as a function of iteration count (Fig.-5 style)."""

    iterations: list[int]
    hellinger_mean: list[float]
    hellinger_sem: list[float]
    mode_mean: list[float]
    mode_sem: list[float]


@dataclass
class AlignmentRow:
    object: str
    method: str
    hellinger: float
    mode_distance: float
    repetitions: int


@dataclass
class AlignmentReport:
    rows: list[AlignmentRow]
    curves: dict[tuple[str, str], ProgressionCurve] = field(default_factory=dict)

    def row(self, obj: str, method: str) -> AlignmentRow:
        for r in self.rows:
            if r.object == obj and r.method == method:
                return r
        raise KeyError((obj, method))

    def objects(self) -> list[str]:
        seen: list[str] = []
        for r in self.rows:
            if r.object not in seen:
                seen.append(r.object)
        return seen

    def methods(self) -> list[str]:
        seen: list[str] = []
        for r in self.rows:
            if r.method not in seen:
                seen.append(r.method)
        return seen


def _sem(values: np.ndarray) -> float:
    values = values[np.isfinite(values)]
    if values.size <= 1:
        return 0.0
    return float(values.std(ddof=1) / math.sqrt(values.size))


def _chain_metrics(
    chain: ChainOutput,
    reference: GridHistogram,
    hue_metric: str,
    burn_in: int,
) -> tuple[float, float] | None:
    samples = chain.samples[burn_in:]
    if not samples:
        return None
    counts = grid_counts(samples)
    hist = GridHistogram(counts / counts.sum(), sample_count=len(samples))
    ref_mode = mode_of(reference)
    return (
        hellinger(hist, reference),
        mode_distance(mode_of(hist), ref_mode, hue_metric),
    )


def _progression(
    chains: list[ChainOutput],
    reference: GridHistogram,
    hue_metric: str,
) -> ProgressionCurve:
    horizon = max((c.sample_iterations[-1] + 1) if c.sample_iterations else 0 for c in chains)
    ref_sqrt = np.sqrt(reference.bins)
    ref_mode = mode_of(reference)
    hel = np.full((len(chains), horizon), np.nan)
    mod = np.full((len(chains), horizon), np.nan)
    for ci, chain in enumerate(chains):
        counts = np.zeros(GRID_SHAPE)
        total = 0
        cursor = 0
        for t in range(horizon):
            while (
                cursor < len(chain.sample_iterations)
                and chain.sample_iterations[cursor] == t
            ):
                counts[bin_index(chain.samples[cursor])] += 1.0
                total += 1
                cursor += 1
            if total == 0:
                continue
            diff = np.sqrt(counts / total) - ref_sqrt
            hel[ci, t] = math.sqrt(0.5 * float((diff * diff).sum()))
            idx = np.unravel_index(int(np.argmax(counts)), GRID_SHAPE)
            mod[ci, t] = mode_distance(bin_center(idx), ref_mode, hue_metric)
    iterations = list(range(1, horizon + 1))
    with np.errstate(invalid="ignore"):
        return ProgressionCurve(
            iterations=iterations,
            hellinger_mean=[float(np.nanmean(hel[:, t])) if np.isfinite(hel[:, t]).any() else math.nan for t in range(horizon)],
            hellinger_sem=[_sem(hel[:, t]) for t in range(horizon)],
            mode_mean=[float(np.nanmean(mod[:, t])) if np.isfinite(mod[:, t]).any() else math.nan for t in range(horizon)],
            mode_sem=[_sem(mod[:, t]) for t in range(horizon)],
        )


def build_alignment_report(
    outputs: Sequence[ChainOutput],
    references: Mapping[str, GridHistogram],
    hue_metric: str = "linear",
    burn_in: int = 0,
    curves: bool = True,
) -> AlignmentReport:
    """Per object x method alignment against reference histograms.

    Metrics are computed per chain and averaged over the (complete) chains,
    mirroring the average-over-repetitions reporting; progression curves
    carry the mean and standard error across chains at every iteration
    count. Failed chains and chains with no retained samples are excluded.
    """
    groups: dict[tuple[str, str], list[ChainOutput]] = {}
    for out in outputs:
        groups.setdefault((out.object, out.method), []).append(out)
    report = AlignmentReport(rows=[])
    for (obj, method), chains in groups.items():
        if obj not in references:
            raise MissingReference(f"no reference histogram for object {obj!r}")
        reference = references[obj]
        usable = [c for c in chains if c.complete]
        metrics = []
        for chain in usable:
            pair = _chain_metrics(chain, reference, hue_metric, burn_in)
            if pair is not None:
                metrics.append(pair)
        if not metrics:
            continue
        hels = np.array([m[0] for m in metrics])
        mods = np.array([m[1] for m in metrics])
        report.rows.append(
            AlignmentRow(
                object=obj,
                method=method,
                hellinger=float(hels.mean()),
                mode_distance=float(mods.mean()),
                repetitions=len(metrics),
            )
        )
        if curves:
            report.curves[(obj, method)] = _progression(usable, reference, hue_metric)
    return report
