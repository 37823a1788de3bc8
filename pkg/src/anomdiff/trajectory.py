"""Increment series, cumulative trajectories and ensembles of aligned trajectories.

Time is 1-based in everything we report (t = 1 is the first recorded step,
e.g. the publication year), while arrays are stored 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "COUNTS",
    "REALS",
    "Ensemble",
    "CohortSpec",
    "cumulate",
    "total_count",
    "split_cohorts",
]

COUNTS = "counts"
REALS = "reals"


def _as_series(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"increment series must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("increment series is empty")
    return arr


def is_count_data(values) -> bool:
    """True if every value is a finite non-negative integer."""
    arr = np.asarray(values, dtype=float)
    return bool(np.all(np.isfinite(arr)) and np.all(arr >= 0) and np.all(arr == np.floor(arr)))


def cumulate(increments) -> np.ndarray:
    """Cumulative sum Y(t) = sum_{n<=t} C(n) of an increment series."""
    return np.cumsum(_as_series(increments))


def total_count(increments) -> float:
    """Sum of all increments, i.e. the final value of the trajectory."""
    return float(cumulate(increments)[-1])


@dataclass(frozen=True)
class Ensemble:
    """N aligned increment series of common length T.

    ``increments`` is stored as a read-only ``(N, T)`` float array. Ragged input
    is rejected; nothing is padded.
    """

    increments: np.ndarray
    label: str = ""
    data_kind: str = REALS
    ids: tuple = field(default=())

    def __post_init__(self):
        arr = self.increments
        if not isinstance(arr, np.ndarray):
            rows = [_as_series(r) for r in arr]
            if not rows:
                raise ValueError("ensemble needs at least one series")
            for k, r in enumerate(rows):
                if r.size != rows[0].size:
                    raise ValueError(
                        f"ragged ensemble: series {k} has length {r.size}, expected {rows[0].size}"
                    )
            arr = np.vstack(rows)
        arr = np.array(arr, dtype=float, copy=True)
        if arr.ndim == 1:
            arr = arr[None, :]
        if arr.ndim != 2:
            raise ValueError(f"increments must be a 2-d (N, T) array, got shape {arr.shape}")
        n, t = arr.shape
        if t < 1:
            raise ValueError("series length T must be >= 1")
        if not np.all(np.isfinite(arr)):
            raise ValueError("increments contain non-finite values")
        if self.data_kind not in (COUNTS, REALS):
            raise ValueError(f"unknown data_kind {self.data_kind!r}")
        if self.data_kind == COUNTS and n and not is_count_data(arr):
            raise ValueError("count ensemble contains negative or non-integral increments")
        arr.setflags(write=False)
        object.__setattr__(self, "increments", arr)

        ids = tuple(str(i) for i in self.ids) if self.ids else tuple(str(i) for i in range(n))
        if len(ids) != n:
            raise ValueError(f"got {len(ids)} ids for {n} series")
        object.__setattr__(self, "ids", ids)

    @classmethod
    def from_series(cls, series: Sequence, label: str = "", data_kind: str | None = None, ids=()):
        """Build an ensemble, inferring ``data_kind`` when it is not given."""
        arr = cls(list(series)).increments
        if data_kind is None:
            data_kind = COUNTS if is_count_data(arr) else REALS
        return cls(arr, label=label, data_kind=data_kind, ids=ids)

    @property
    def empty(self) -> bool:
        return self.n == 0

    @property
    def n(self) -> int:
        return self.increments.shape[0]

    @property
    def T(self) -> int:
        return self.increments.shape[1]

    @property
    def times(self) -> np.ndarray:
        """1-based time axis."""
        return np.arange(1, self.T + 1, dtype=float)

    def trajectories(self) -> np.ndarray:
        """Cumulative sums Y_i(t), shape (N, T)."""
        return np.cumsum(self.increments, axis=1)

    def totals(self) -> np.ndarray:
        return self.trajectories()[:, -1] if self.n else np.zeros(0)

    def subset(self, mask, label: str) -> "Ensemble":
        idx = np.flatnonzero(mask)
        return Ensemble(
            self.increments[idx].reshape(len(idx), self.T),
            label=label,
            data_kind=self.data_kind,
            ids=tuple(self.ids[i] for i in idx),
        )


@dataclass(frozen=True)
class CohortSpec:
    """Total-count thresholds; cohorts are (low, high] with an open top cohort."""

    boundaries: tuple

    def __post_init__(self):
        b = tuple(float(x) for x in self.boundaries)
        if not b:
            raise ValueError("cohort spec needs at least one boundary")
        if any(x <= 0 for x in b):
            raise ValueError("cohort boundaries must be > 0")
        if any(b1 >= b2 for b1, b2 in zip(b, b[1:])):
            raise ValueError("cohort boundaries must be strictly increasing")
        object.__setattr__(self, "boundaries", b)

    def labels(self) -> list[str]:
        def fmt(x):
            return str(int(x)) if float(x).is_integer() else repr(x)

        b = self.boundaries
        out = [f"<={fmt(b[0])}"]
        out += [f"({fmt(lo)},{fmt(hi)}]" for lo, hi in zip(b, b[1:])]
        out.append(f">{fmt(b[-1])}")
        return out


def split_cohorts(ensemble: Ensemble, spec: CohortSpec) -> list[tuple[str, Ensemble]]:
    """Partition an ensemble by total count.

    Every cohort is returned, including empty ones (``N == 0``), lowest first.
    A total exactly on a boundary goes to the cohort below it.
    """
    totals = ensemble.totals()
    # side="left": searchsorted returns k with b[k-1] < total <= b[k]
    which = np.searchsorted(np.asarray(spec.boundaries), totals, side="left")
    out = []
    for k, label in enumerate(spec.labels()):
        out.append((label, ensemble.subset(which == k, label=label)))
    return out
