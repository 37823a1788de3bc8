"""Log-binned histograms and power-law tail slopes.

Sparse bins are the trap here: once a log bin holds a single sample its
density is 1 / (width * total), and since widths grow like x the far tail
traces a spurious slope of -1 whatever the true exponent. Tail fits
therefore drop bins below a minimum count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scaling import FitError, FitWindow, ScalingFit, fit_power_law

__all__ = ["LogBinnedHistogram", "log_bin_histogram", "tail_slope", "one_per_bin_sample", "pareto_sample"]

DEFAULT_BINS_PER_DECADE = 10
DEFAULT_MIN_COUNT = 2


@dataclass(frozen=True)
class LogBinnedHistogram:
    """Histogram on geometric bins; ``densities`` are count / width / total."""

    bin_edges: np.ndarray
    densities: np.ndarray
    raw_counts: np.ndarray
    zero_count: int
    total: int

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    @property
    def centers(self) -> np.ndarray:
        """Geometric mean of each bin's edges."""
        return np.sqrt(self.bin_edges[:-1] * self.bin_edges[1:])

    def sparse_bins(self, min_count: int = DEFAULT_MIN_COUNT) -> np.ndarray:
        """Occupied bins below ``min_count``: the region prone to the slope -1 artifact."""
        return (self.raw_counts > 0) & (self.raw_counts < min_count)

    def binned_mass(self) -> float:
        return float(np.sum(self.densities * self.widths))


def log_bin_histogram(values, bins_per_decade: int = DEFAULT_BINS_PER_DECADE) -> LogBinnedHistogram:
    """Bin non-negative values on edges ``min_pos * 10**(j / bins_per_decade)``.

    Zeros cannot sit on a log axis; they are tallied in ``zero_count`` but do
    count towards the normalising total.
    """
    x = np.asarray(values, dtype=float).ravel()
    if int(bins_per_decade) != bins_per_decade or bins_per_decade < 1:
        raise ValueError(f"bins_per_decade must be an integer >= 1, got {bins_per_decade}")
    if not np.all(np.isfinite(x)):
        raise ValueError("histogram input contains non-finite values")
    if np.any(x < 0):
        raise ValueError("histogram input must be non-negative")
    pos = x[x > 0]
    if pos.size == 0:
        raise ValueError("histogram needs at least one positive value")

    lo, hi = pos.min(), pos.max()
    k = int(math.floor(math.log10(hi / lo) * bins_per_decade)) + 1
    edges = lo * 10.0 ** (np.arange(k + 1) / bins_per_decade)
    edges[0] = lo
    if edges[-1] <= hi:  # rounding put the maximum on the last edge
        edges = np.append(edges, lo * 10.0 ** ((k + 1) / bins_per_decade))
    idx = np.searchsorted(edges, pos, side="right") - 1
    counts = np.bincount(idx, minlength=edges.size - 1).astype(np.int64)
    dens = counts / np.diff(edges) / x.size
    for a in (edges, dens, counts):
        a.setflags(write=False)
    return LogBinnedHistogram(edges, dens, counts, int(x.size - pos.size), int(x.size))


def tail_slope(
    h: LogBinnedHistogram, window: FitWindow | None = None, min_count: int = DEFAULT_MIN_COUNT
) -> ScalingFit:
    """Log-log slope of density against bin center, over well-populated bins only.

    Bins with fewer than ``min_count`` samples are dropped before fitting.
    The returned exponent is negative for a decaying tail.
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    centers = h.centers
    keep = h.raw_counts >= min_count
    if window is not None:
        keep &= window.mask(centers)
    if keep.sum() < 3:
        where = "" if window is None else f" in [{window.lo:g}, {window.hi:g}]"
        raise FitError(
            f"tail fit needs >= 3 bins{where} passing the artifact filter "
            f"(raw count >= {min_count}); found {int(keep.sum())}",
            "histogram",
        )
    x, y = centers[keep], h.densities[keep]
    return fit_power_law(x, y, FitWindow(x[0], x[-1]) if x.size > 1 else None, name="histogram")


def pareto_sample(rng: np.random.Generator, gamma: float, size: int, x_min: float = 1.0) -> np.ndarray:
    """Draws with density proportional to x**(-gamma) on [x_min, inf)."""
    if gamma <= 1:
        raise ValueError("gamma must exceed 1 for a normalisable tail")
    u = 1.0 - rng.random(size)  # in (0, 1]
    return x_min * u ** (-1.0 / (gamma - 1.0))


def one_per_bin_sample(decades: int, bins_per_decade: int = DEFAULT_BINS_PER_DECADE, x_min: float = 1.0):
    """Exactly one value in each log bin of a histogram anchored at ``x_min``.

    The first value is ``x_min`` itself (it fixes the lowest edge); the rest
    sit mid-bin, clear of any edge.
    """
    j = np.arange(1, decades * bins_per_decade) + 0.5
    return np.concatenate([[x_min], x_min * 10.0 ** (j / bins_per_decade)])
