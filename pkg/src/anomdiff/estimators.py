"""Ensemble and time statistics of trajectory ensembles.

All series carry a 1-based axis: calendar step ``t`` for time series and
lag ``delta`` for displacement series.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .trajectory import Ensemble

__all__ = [
    "StatSeries",
    "CenterMode",
    "SERIES_KINDS",
    "ensemble_stats",
    "tamsd_single",
    "ea_tamsd",
    "moses_series",
    "noah_series",
    "variance_series",
    "eb_ratio",
    "default_dmax",
]

SERIES_KINDS = ("EA", "EATA", "EA_over_EATA", "variance", "moses", "noah", "hurst_var", "tamsd", "eb_ratio")
_NONNEGATIVE = {"variance", "hurst_var", "tamsd", "noah"}


class CenterMode(str, Enum):
    ENSEMBLE_MEAN = "ensemble_mean"
    ENSEMBLE_MEDIAN = "ensemble_median"

    @classmethod
    def parse(cls, value) -> "CenterMode":
        if isinstance(value, cls):
            return value
        aliases = {"mean": cls.ENSEMBLE_MEAN, "median": cls.ENSEMBLE_MEDIAN}
        try:
            return aliases.get(value) or cls(value)
        except ValueError:
            raise ValueError(f"unknown center mode {value!r}; use mean or median") from None


@dataclass(frozen=True)
class StatSeries:
    axis: np.ndarray
    values: np.ndarray
    kind: str

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if self.kind not in SERIES_KINDS:
            raise ValueError(f"unknown series kind {self.kind!r}")
        if axis.shape != values.shape or axis.ndim != 1:
            raise ValueError("axis and values must be 1-d arrays of equal length")
        if np.any(np.diff(axis) <= 0):
            raise ValueError("series axis must be strictly increasing")
        if self.kind in _NONNEGATIVE and np.any(values < 0):
            raise ValueError(f"{self.kind} series has negative values")
        axis.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.axis.size


def _require_members(e: Ensemble):
    if e.empty:
        raise ValueError(f"ensemble {e.label!r} has no trajectories")


def default_dmax(T: int) -> int:
    """Largest lag used by default: floor(T/3), at least 1."""
    return max(1, T // 3)


def ensemble_stats(e: Ensemble) -> dict[str, StatSeries]:
    """EA, EATA, their ratio, and the population variance of increments per step."""
    _require_members(e)
    c = e.increments
    t = e.times
    ea = c.mean(axis=0)
    eata = (np.cumsum(c, axis=1) / t).mean(axis=0)
    ok = eata > 0
    dev = c - ea
    var = (dev * dev).mean(axis=0)
    var[np.all(c == c[0], axis=0)] = 0.0
    return {
        "EA": StatSeries(t, ea, "EA"),
        "EATA": StatSeries(t, eata, "EATA"),
        "ratio": StatSeries(t[ok], ea[ok] / eata[ok], "EA_over_EATA"),
        "variance": StatSeries(t, var, "variance"),
    }


def tamsd_single(y, dmax: int) -> StatSeries:
    """Time-averaged MSD of one trajectory for lags 1..dmax.

    Each lag averages ``(y[k+lag] - y[k])**2`` over every admissible start
    ``k``; the divisor is the number of windows, ``len(y) - lag``.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise ValueError("trajectory must be one-dimensional")
    T = y.size
    if not 1 <= dmax <= T - 1:
        raise ValueError(f"dmax must satisfy 1 <= dmax <= T-1 = {T - 1}, got {dmax}")
    out = np.empty(dmax)
    for lag in range(1, dmax + 1):
        d = y[lag:] - y[:-lag]
        out[lag - 1] = np.mean(d * d)
    return StatSeries(np.arange(1, dmax + 1, dtype=float), out, "tamsd")


def anchored_trajectories(e: Ensemble) -> np.ndarray:
    """Trajectories with the origin Y(0) = 0 prepended, shape (N, T+1)."""
    return np.concatenate([np.zeros((e.n, 1)), e.trajectories()], axis=1)


def ea_tamsd(e: Ensemble, dmax: int | None = None) -> StatSeries:
    """Ensemble mean of the per-trajectory TA-MSD, windows starting at the origin."""
    _require_members(e)
    if dmax is None:
        dmax = default_dmax(e.T)
    if not 1 <= dmax <= e.T - 1:
        raise ValueError(f"dmax must satisfy 1 <= dmax <= T-1 = {e.T - 1}, got {dmax}")
    y = anchored_trajectories(e)
    out = np.empty(dmax)
    for lag in range(1, dmax + 1):
        d = y[:, lag:] - y[:, :-lag]
        # per-trajectory window mean first, then ensemble mean
        out[lag - 1] = np.mean(np.mean(d * d, axis=1))
    return StatSeries(np.arange(1, dmax + 1, dtype=float), out, "tamsd")


def moses_series(e: Ensemble) -> StatSeries:
    """<sum_{s<=t} |C(s)|> / sqrt(t); its log-log slope is the Moses exponent.

    For count data the absolute value is a no-op and the numerator is <Y_t>.
    """
    _require_members(e)
    t = e.times
    vals = np.cumsum(np.abs(e.increments), axis=1).mean(axis=0) / np.sqrt(t)
    return StatSeries(t, vals, "moses")


def noah_series(e: Ensemble, center: CenterMode | str = CenterMode.ENSEMBLE_MEAN) -> StatSeries:
    """<Z_t> with Z_i(t) = sum_{s<=t} (C_i(s) - c(s))**2.

    ``c(s)`` is the sampled ensemble mean or median of the increments at step s.
    """
    _require_members(e)
    center = CenterMode.parse(center)
    c = e.increments
    if center is CenterMode.ENSEMBLE_MEAN:
        ref = c.mean(axis=0)
    else:
        ref = np.median(c, axis=0)
    ref = np.where(np.all(c == c[0], axis=0), c[0], ref)
    dev = c - ref
    z = np.cumsum(dev * dev, axis=1)
    return StatSeries(e.times, z.mean(axis=0), "noah")


def variance_series(e: Ensemble) -> StatSeries:
    """Population variance of Y_i(t) across the ensemble."""
    _require_members(e)
    y = e.trajectories()
    dev = y - y.mean(axis=0)
    var = (dev * dev).mean(axis=0)
    # exact zero where every trajectory agrees
    var[np.all(y == y[0], axis=0)] = 0.0
    return StatSeries(e.times, var, "hurst_var")


def eb_ratio(e: Ensemble, dmax: int | None = None) -> StatSeries:
    """<TA-MSD(delta)> / <Y(delta)^2>, the ergodicity-breaking ratio.

    Lags where every trajectory is still at the origin are dropped.
    """
    num = ea_tamsd(e, dmax)
    lags = num.axis.astype(int)
    y = e.trajectories()[:, lags - 1]
    den = (y * y).mean(axis=0)
    ok = den > 0
    if not ok.any():
        raise ValueError("ergodicity-breaking ratio undefined: <Y^2> is zero at every lag")
    return StatSeries(num.axis[ok], num.values[ok] / den[ok], "eb_ratio")
