"""Log-log power-law fits and the (M, J, L, H) exponent decomposition."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .estimators import (
    CenterMode,
    StatSeries,
    default_dmax,
    ea_tamsd,
    moses_series,
    noah_series,
    variance_series,
)
from .trajectory import Ensemble

__all__ = [
    "FitError",
    "FitWindow",
    "ScalingFit",
    "ExponentReport",
    "loglog_fit",
    "fit_power_law",
    "auto_window",
    "default_windows",
    "estimate_exponents",
    "summed_hurst",
]

# Earliest step used by default for the M, L and H fits; the J fit starts at lag 2.
DEFAULT_T_MIN = 10
DEFAULT_LAG_MIN = 2
# Fitted L below 1/2 by more than this is reported as 1/2.
L_FLOOR_TOLERANCE = 0.05
_R2_TIE = 1e-9


class FitError(ValueError):
    """A scaling fit could not be performed; ``series`` names the offending input."""

    def __init__(self, message: str, series: str | None = None):
        super().__init__(message)
        self.series = series


@dataclass(frozen=True)
class FitWindow:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"fit window needs lo < hi, got [{self.lo}, {self.hi}]")

    @classmethod
    def parse(cls, text: str) -> "FitWindow":
        """Parse ``"LO:HI"``."""
        try:
            lo, hi = text.split(":")
            return cls(float(lo), float(hi))
        except ValueError:
            raise ValueError(f"bad fit window {text!r}; expected LO:HI") from None

    def mask(self, axis: np.ndarray) -> np.ndarray:
        return (axis >= self.lo) & (axis <= self.hi)


@dataclass(frozen=True)
class ScalingFit:
    exponent: float
    log_intercept: float
    r_squared: float
    window: FitWindow
    n_points: int

    def predict(self, x):
        return np.exp(self.log_intercept) * np.asarray(x, dtype=float) ** self.exponent

    def as_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "log_intercept": self.log_intercept,
            "r_squared": self.r_squared,
            "window": [self.window.lo, self.window.hi],
            "n_points": self.n_points,
        }


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    if np.all(y == y[0]):
        return 0.0, float(y[0]), 1.0
    xm, ym = x.mean(), y.mean()
    dx, dy = x - xm, y - ym
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    slope = float(dx @ dy) / sxx
    intercept = ym - slope * xm
    resid = dy - slope * dx
    r2 = 1.0 - float(resid @ resid) / syy
    return slope, float(intercept), min(1.0, max(0.0, r2))


def loglog_fit(series: StatSeries, window: FitWindow | None = None) -> ScalingFit:
    """Ordinary least squares of log(values) on log(axis) inside ``window``.

    A constant response is a power law with exponent 0 and R^2 = 1.
    """
    return fit_power_law(series.axis, series.values, window, name=series.kind)


def fit_power_law(x, y, window: FitWindow | None = None, name: str = "series") -> ScalingFit:
    """Power-law fit of ``y`` against ``x``; the workhorse behind :func:`loglog_fit`."""
    axis = np.asarray(x, dtype=float)
    values = np.asarray(y, dtype=float)
    if window is None:
        if axis.size == 0:
            raise FitError(f"{name} series is empty", name)
        if axis.size == 1:
            raise FitError(f"{name} series has a single point", name)
        window = FitWindow(axis.min(), axis.max())
    sel = window.mask(axis)
    n = int(sel.sum())
    if n < 3:
        raise FitError(
            f"{name}: window [{window.lo:g}, {window.hi:g}] holds {n} point(s), need >= 3",
            name,
        )
    x, y = axis[sel], values[sel]
    bad = np.flatnonzero(~(y > 0))
    if bad.size:
        raise FitError(
            f"{name}: non-positive value {y[bad[0]]:g} at axis point {x[bad[0]]:g}",
            name,
        )
    if np.any(x <= 0):
        raise FitError(f"{name}: axis must be positive for a log-log fit", name)
    slope, intercept, r2 = _ols(np.log(x), np.log(y))
    return ScalingFit(slope, intercept, r2, window, n)


def auto_window(series: StatSeries, min_points: int = 5, min_decades: float = 0.5) -> FitWindow:
    """Contiguous window with the best straight-line behaviour on log-log axes.

    Candidates are runs of strictly positive points with at least ``min_points``
    entries spanning at least ``min_decades`` decades of the axis. The highest
    R^2 wins; near-ties go to the window with more points, then to larger lo.
    """
    if min_points < 3:
        raise ValueError("min_points must be >= 3")
    axis, values = series.axis, series.values
    pos = (values > 0) & (axis > 0)
    if pos.sum() < min_points:
        raise FitError(
            f"{series.kind}: fewer than {min_points} positive points; give the fit window manually",
            series.kind,
        )

    best = None  # (r2, n_points, lo_index, hi_index)
    # split into maximal runs of positive values; windows may not straddle a gap
    edges = np.flatnonzero(np.diff(np.concatenate([[0], pos.astype(int), [0]])))
    for start, stop in zip(edges[::2], edges[1::2]):
        if stop - start < min_points:
            continue
        lx = np.log(axis[start:stop])
        ly = np.log(values[start:stop])
        lx = lx - lx.mean()
        ly = ly - ly.mean()
        zero = np.zeros(1)
        s1 = np.concatenate([zero, np.cumsum(np.ones_like(lx))])
        sx = np.concatenate([zero, np.cumsum(lx)])
        sy = np.concatenate([zero, np.cumsum(ly)])
        sxx = np.concatenate([zero, np.cumsum(lx * lx)])
        syy = np.concatenate([zero, np.cumsum(ly * ly)])
        sxy = np.concatenate([zero, np.cumsum(lx * ly)])
        m = lx.size
        i, j = np.triu_indices(m + 1, k=min_points)  # window is [i, j)
        span = (np.log(axis[start + j - 1]) - np.log(axis[start + i])) / math.log(10)
        keep = span >= min_decades - 1e-12
        i, j = i[keep], j[keep]
        if i.size == 0:
            continue
        n = s1[j] - s1[i]
        cxx = (sxx[j] - sxx[i]) - (sx[j] - sx[i]) ** 2 / n
        cyy = (syy[j] - syy[i]) - (sy[j] - sy[i]) ** 2 / n
        cxy = (sxy[j] - sxy[i]) - (sx[j] - sx[i]) * (sy[j] - sy[i]) / n
        flat = cyy <= 1e-14 * np.maximum(syy[j] - syy[i], 1e-300)
        with np.errstate(divide="ignore", invalid="ignore"):
            r2 = np.where(flat, 1.0, cxy * cxy / (cxx * cyy))
        r2 = np.clip(np.nan_to_num(r2, nan=0.0), 0.0, 1.0)
        top = r2.max()
        cand = np.flatnonzero(r2 >= top - _R2_TIE)
        # most points, then largest lo
        order = np.lexsort((i[cand], n[cand]))
        k = cand[order[-1]]
        entry = (float(r2[k]), int(n[k]), start + int(i[k]), start + int(j[k]) - 1)
        if best is None or _better(entry, best):
            best = entry
    if best is None:
        raise FitError(
            f"{series.kind}: no window with >= {min_points} points spanning {min_decades} decades; "
            "give the fit window manually",
            series.kind,
        )
    return FitWindow(float(axis[best[2]]), float(axis[best[3]]))


def _better(a, b) -> bool:
    if abs(a[0] - b[0]) > _R2_TIE:
        return a[0] > b[0]
    if a[1] != b[1]:
        return a[1] > b[1]
    return a[2] > b[2]


@dataclass(frozen=True)
class ExponentReport:
    """Moses, Joseph, Latent and Hurst exponents with the summation residual.

    ``L`` is the headline value (floored at 1/2 when the raw fit falls
    clearly below it); ``L_raw`` keeps the fitted value.
    """

    M: float
    J: float
    L: float
    H: float
    L_raw: float
    fits: dict = field(default_factory=dict)
    l_floored: bool = False
    label: str = ""

    @property
    def summed(self) -> float:
        return summed_hurst(self.M, self.J, self.L)

    @property
    def residual(self) -> float:
        return self.H - (self.J + self.L + self.M - 1.0)

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "M": self.M,
            "J": self.J,
            "L": self.L,
            "H": self.H,
            "J+L+M-1": self.summed,
            "residual": self.residual,
            "L_raw": self.L_raw,
            "L_floored": self.l_floored,
            "fits": {k: v.as_dict() for k, v in self.fits.items()},
        }


def summed_hurst(M: float, J: float, L: float) -> float:
    """Hurst exponent implied by the summation relation, J + L + M - 1."""
    return J + L + M - 1.0


def default_windows(T: int, dmax: int) -> dict[str, FitWindow]:
    """Start the time fits at t = 10 and the lag fit at lag 2, when there is room."""
    t_lo = DEFAULT_T_MIN if T - DEFAULT_T_MIN + 1 >= 3 else 1
    lag_lo = DEFAULT_LAG_MIN if dmax - DEFAULT_LAG_MIN + 1 >= 3 else 1
    tw = FitWindow(t_lo, T)
    return {"M": tw, "L": tw, "H": tw, "J": FitWindow(lag_lo, dmax)}


def estimate_exponents(
    e: Ensemble,
    windows: dict | str | None = None,
    center: CenterMode | str = CenterMode.ENSEMBLE_MEAN,
    dmax: int | None = None,
    min_points: int = 5,
) -> ExponentReport:
    """Fit M, J, L and H for an ensemble.

    ``windows`` maps any of ``"M", "J", "L", "H"`` to a :class:`FitWindow` or
    ``"auto"``; the string ``"auto"`` applies automatic selection to all four.
    Unspecified exponents use :func:`default_windows`.
    """
    if e.empty:
        raise FitError(f"ensemble {e.label!r} has no trajectories")
    if e.T < 4:
        raise FitError(f"ensemble {e.label!r}: T = {e.T} is too short for scaling fits")
    if dmax is None:
        dmax = default_dmax(e.T)
    chosen = default_windows(e.T, dmax)
    if windows == "auto":
        windows = dict.fromkeys(chosen, "auto")
    for key, w in (windows or {}).items():
        if key not in chosen:
            raise ValueError(f"unknown exponent {key!r} in fit windows")
        chosen[key] = w

    series = {
        "M": moses_series(e),
        "J": ea_tamsd(e, dmax),
        "L": noah_series(e, center),
        "H": variance_series(e),
    }
    fits = {}
    for key in ("M", "J", "L", "H"):
        s = series[key]
        try:
            w = chosen[key]
            if w == "auto":
                w = auto_window(s, min_points)
            fits[key] = loglog_fit(s, w)
        except FitError as exc:
            raise FitError(f"{key} fit on {s.kind} series failed: {exc}", s.kind) from exc

    M = fits["M"].exponent
    J = fits["J"].exponent / 2.0
    L_raw = (fits["L"].exponent - 2.0 * M + 1.0) / 2.0
    H = fits["H"].exponent / 2.0
    L = L_raw
    floored = False
    if L_raw < 0.5 - L_FLOOR_TOLERANCE:
        warnings.warn(
            f"fitted Latent exponent {L_raw:.3f} is below 1/2; reporting 1/2",
            RuntimeWarning,
            stacklevel=2,
        )
        L, floored = 0.5, True
    return ExponentReport(M=M, J=J, L=L, H=H, L_raw=L_raw, fits=fits, l_floored=floored, label=e.label)
