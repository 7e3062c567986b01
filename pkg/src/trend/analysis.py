"""Empirical feature diagnostics: truncation, peakedness, inter-dimension
correlation, and histogram export.

These are the checks that motivate the density model: how much mass sits
exactly at zero, how far each dimension's shape is from Gaussian once
that mass is excluded, and how correlated dimensions are with each other.
Kurtosis is reported in the convention where the normal reference is 3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .feature_io import FeatureMatrix

__all__ = [
    "DimensionStats",
    "PccSummary",
    "dimension_stats",
    "histogram",
    "pairwise_pcc",
    "pcc",
    "stats_to_tsv",
    "histogram_to_tsv",
    "pcc_to_tsv",
]


def _matrix(features) -> np.ndarray:
    if isinstance(features, FeatureMatrix):
        return features.values
    arr = np.asarray(features)
    if arr.ndim != 2:
        raise ValueError("features must be a FeatureMatrix or 2-D array")
    return arr


@dataclass(frozen=True)
class DimensionStats:
    index: int
    zero_fraction: float
    mean: float
    std: float
    kurtosis: float  # NaN when fewer than 4 nonzero values


def _kurtosis(values: np.ndarray) -> float:
    centered = values - values.mean()
    m2 = float(np.mean(centered**2))
    if m2 == 0.0:
        return math.nan
    m4 = float(np.mean(centered**4))
    return m4 / (m2 * m2)


def dimension_stats(features) -> list[DimensionStats]:
    """Per-dimension zero fraction, moments, and zero-excluded kurtosis."""
    arr = _matrix(features)
    n = arr.shape[0]
    if n < 4:
        raise ValueError(f"kurtosis needs at least 4 samples, got {n}")
    out = []
    for i in range(arr.shape[1]):
        col = arr[:, i].astype(np.float64)
        nonzero = col[col != 0.0]
        kurt = _kurtosis(nonzero) if nonzero.size >= 4 else math.nan
        out.append(DimensionStats(
            index=i,
            zero_fraction=float(np.count_nonzero(col == 0.0)) / n,
            mean=float(col.mean()),
            std=float(col.std()),
            kurtosis=kurt,
        ))
    return out


class _CenteredCache:
    """Lazily centered columns with their sums of squares."""

    def __init__(self, arr: np.ndarray):
        self._arr = arr
        self._cache: dict[int, tuple[np.ndarray, float]] = {}

    def get(self, i: int) -> tuple[np.ndarray, float]:
        hit = self._cache.get(i)
        if hit is None:
            col = self._arr[:, i].astype(np.float64)
            centered = col - col.mean()
            hit = (centered, float(centered @ centered))
            self._cache[i] = hit
        return hit


def _pair_pcc(cache: _CenteredCache, i: int, j: int) -> float:
    ti, si = cache.get(i)
    tj, sj = cache.get(j)
    if si == 0.0 or sj == 0.0:
        return math.nan
    return float(ti @ tj) / math.sqrt(si * sj)


def pcc(features, i: int, j: int) -> float:
    """Pearson correlation of two dimensions; NaN if either is constant."""
    arr = _matrix(features)
    d = arr.shape[1]
    if not (0 <= i < d and 0 <= j < d):
        raise ValueError(f"dimension indices ({i}, {j}) out of range for d={d}")
    cache = _CenteredCache(arr)
    if i == j:
        _, s = cache.get(i)
        return 1.0 if s > 0.0 else math.nan
    return _pair_pcc(cache, i, j)


@dataclass(frozen=True)
class PccSummary:
    mean_abs_pcc: float
    std_abs_pcc: float
    mean_pcc: float
    std_pcc: float
    n_pairs: int
    n_undefined: int


def _decode_pair(t: int, d: int) -> tuple[int, int]:
    # Linear index over the strict upper triangle, row-major.  Row i
    # starts at i*(2d-i-1)/2; the float solve lands within one row of the
    # right answer and the loops correct any rounding.
    i = int((2 * d - 1 - math.sqrt((2 * d - 1) ** 2 - 8 * t)) / 2)
    i = max(i, 0)
    while (i + 1) * (2 * d - i - 2) // 2 <= t:
        i += 1
    while i * (2 * d - i - 1) // 2 > t:
        i -= 1
    offset = t - i * (2 * d - i - 1) // 2
    return i, i + 1 + offset


def pairwise_pcc(features, k: int | None = 100_000, seed=0):
    """PCCs over dimension pairs: (pairs, values, summary).

    k pairs are sampled without replacement, deterministically for a given
    seed; k=None enumerates all d*(d-1)/2 pairs.  Pairs touching a
    constant dimension get NaN and are excluded from the summary, which
    reports both signed and absolute-value statistics.
    """
    arr = _matrix(features)
    if arr.shape[0] < 3:
        raise ValueError("correlation needs at least 3 samples")
    d = arr.shape[1]
    n_all = d * (d - 1) // 2
    if n_all == 0:
        raise ValueError("need at least 2 dimensions for pairwise correlation")
    if k is None or k >= n_all:
        chosen = np.arange(n_all)
    else:
        if k < 1:
            raise ValueError("k must be a positive pair count")
        rng = np.random.default_rng(seed)
        chosen = np.sort(rng.choice(n_all, size=k, replace=False))
    cache = _CenteredCache(arr)
    pairs = np.empty((chosen.size, 2), dtype=np.int64)
    values = np.empty(chosen.size)
    for row, t in enumerate(chosen):
        i, j = _decode_pair(int(t), d)
        pairs[row] = (i, j)
        values[row] = _pair_pcc(cache, i, j)
    defined = values[~np.isnan(values)]
    if defined.size:
        summary = PccSummary(
            mean_abs_pcc=float(np.mean(np.abs(defined))),
            std_abs_pcc=float(np.std(np.abs(defined))),
            mean_pcc=float(np.mean(defined)),
            std_pcc=float(np.std(defined)),
            n_pairs=int(values.size),
            n_undefined=int(values.size - defined.size),
        )
    else:
        summary = PccSummary(math.nan, math.nan, math.nan, math.nan,
                             int(values.size), int(values.size))
    return pairs, values, summary


def histogram(features, dim: int, bins: int) -> tuple[np.ndarray, np.ndarray]:
    """Equal-width histogram of one dimension over [0, max].

    Returns (edges, counts) with counts summing to n.  The lower edge
    extends below zero only if the data do.
    """
    arr = _matrix(features)
    if not 0 <= dim < arr.shape[1]:
        raise ValueError(f"dimension {dim} out of range for d={arr.shape[1]}")
    if bins < 1:
        raise ValueError("bins must be a positive integer")
    col = arr[:, dim].astype(np.float64)
    lo = min(0.0, float(col.min()))
    hi = float(col.max())
    if not hi > lo:
        hi = lo + 1.0
    edges = np.linspace(lo, hi, bins + 1)
    counts, _ = np.histogram(col, bins=edges)
    return edges, counts


# --- delimiter-separated export for external plotting -------------------

def stats_to_tsv(stats: list[DimensionStats]) -> str:
    lines = ["index\tzero_fraction\tmean\tstd\tkurtosis"]
    for s in stats:
        lines.append(f"{s.index}\t{s.zero_fraction!r}\t{s.mean!r}\t{s.std!r}\t{s.kurtosis!r}")
    return "\n".join(lines) + "\n"


def histogram_to_tsv(edges: np.ndarray, counts: np.ndarray) -> str:
    lines = ["bin_left\tbin_right\tcount"]
    for left, right, count in zip(edges[:-1], edges[1:], counts):
        lines.append(f"{left!r}\t{right!r}\t{int(count)}")
    return "\n".join(lines) + "\n"


def pcc_to_tsv(pairs: np.ndarray, values: np.ndarray) -> str:
    lines = ["i\tj\tpcc"]
    for (i, j), v in zip(pairs, values):
        lines.append(f"{int(i)}\t{int(j)}\t{float(v)!r}")
    return "\n".join(lines) + "\n"
