"""Seeded synthetic ensembles with known scaling exponents.

Every trajectory ``i`` draws from its own substream
``np.random.SeedSequence(seed, spawn_key=(i,))`` of a PCG64 generator, so
the ensemble does not depend on the order (or parallelism) in which members
are produced, and the first k members of a larger ensemble equal a
k-member ensemble drawn with the same seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .trajectory import COUNTS, REALS, Ensemble

__all__ = ["KINDS", "SyntheticSpec", "generate", "expected_exponents", "fgn_autocovariance"]

KINDS = ("gaussian_iid", "fbm", "sbm", "levy", "citation_pa")

_DEFAULTS = {
    "gaussian_iid": {},
    "fbm": {"h": 0.5},
    "sbm": {"h": 0.5},
    "levy": {"alpha": 1.5},
    "citation_pa": {"c": 4.0, "lam": 1.0, "r": 2.0, "fitness_shape": 6.0},
}

# Exact-covariance generation is O(T^2); beyond this it becomes slow and memory hungry.
MAX_FBM_T = 4096


@dataclass(frozen=True)
class SyntheticSpec:
    kind: str
    n: int
    T: int
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}; expected one of {KINDS}")
        unknown = set(self.params) - set(_DEFAULTS[self.kind])
        if unknown:
            raise ValueError(f"unknown parameter(s) for {self.kind}: {sorted(unknown)}")
        full = {**_DEFAULTS[self.kind], **{k: float(v) for k, v in self.params.items()}}
        object.__setattr__(self, "params", full)
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be an integer >= 1, got {self.n}")
        if int(self.T) != self.T or self.T < 2:
            raise ValueError(f"T must be an integer >= 2, got {self.T}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "T", int(self.T))
        object.__setattr__(self, "seed", int(self.seed))

        p = full
        if self.kind == "fbm":
            if not 0 < p["h"] < 1:
                raise ValueError(f"fbm needs 0 < h < 1, got {p['h']}")
            if self.T > MAX_FBM_T:
                raise ValueError(f"fbm generation is exact O(T^2); T must be <= {MAX_FBM_T}")
        elif self.kind == "sbm":
            if not 0 < p["h"] <= 1:
                raise ValueError(f"sbm needs 0 < h <= 1, got {p['h']}")
        elif self.kind == "levy":
            if not 0 < p["alpha"] <= 2:
                raise ValueError(f"levy needs 0 < alpha <= 2, got {p['alpha']}")
        elif self.kind == "citation_pa":
            if p["c"] <= 0:
                raise ValueError("citation_pa needs c > 0")
            if p["lam"] < 0:
                raise ValueError("citation_pa needs lam >= 0")
            if p["r"] <= 0:
                raise ValueError("citation_pa needs r > 0")
            if p["fitness_shape"] <= 0:
                raise ValueError("citation_pa needs fitness_shape > 0")

    def as_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n, "T": self.T, "seed": self.seed, "params": dict(self.params)}


def member_rng(seed: int, i: int) -> np.random.Generator:
    """Generator for trajectory ``i``; independent of every other member."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(i,))))


def _member_normals(spec: SyntheticSpec, size: int) -> np.ndarray:
    out = np.empty((spec.n, size))
    for i in range(spec.n):
        out[i] = member_rng(spec.seed, i).standard_normal(size)
    return out


def fgn_autocovariance(h: float, max_lag: int) -> np.ndarray:
    """Autocovariance of unit-variance fractional Gaussian noise at lags 0..max_lag."""
    k = np.arange(max_lag + 1, dtype=float)
    two_h = 2.0 * h
    return 0.5 * (np.abs(k + 1) ** two_h - 2 * np.abs(k) ** two_h + np.abs(k - 1) ** two_h)


def _hosking(white: np.ndarray, h: float) -> np.ndarray:
    """Map i.i.d. N(0,1) rows to fGn rows by Durbin-Levinson conditional sampling.

    Step t draws X_t ~ N(sum_j phi_{t,j} X_{t-j}, v_t), which reproduces the
    Toeplitz covariance exactly. The coefficients are shared by all rows, so
    the recursion is vectorised across the ensemble.
    """
    n, T = white.shape
    gamma = fgn_autocovariance(h, T)
    x = np.empty_like(white)
    x[:, 0] = white[:, 0] * math.sqrt(gamma[0])
    phi = np.zeros(0)
    v = gamma[0]
    for t in range(1, T):
        # Levinson update for order t
        k = (gamma[t] - phi @ gamma[1:t][::-1]) / v if t > 1 else gamma[1] / v
        phi = np.concatenate([phi - k * phi[::-1], [k]])
        v *= 1.0 - k * k
        mean = x[:, t - 1 :: -1][:, :t] @ phi if t > 1 else x[:, 0] * phi[0]
        x[:, t] = mean + math.sqrt(v) * white[:, t]
    return x


def _symmetric_stable(rng: np.random.Generator, alpha: float, size: int) -> np.ndarray:
    """Chambers-Mallows-Stuck draw of standard symmetric alpha-stable variates."""
    v = rng.uniform(-math.pi / 2, math.pi / 2, size)
    w = rng.standard_exponential(size)
    if alpha == 1.0:
        return np.tan(v)
    return (
        np.sin(alpha * v)
        / np.cos(v) ** (1.0 / alpha)
        * (np.cos(v - alpha * v) / w) ** ((1.0 - alpha) / alpha)
    )


def _citation_pa(spec: SyntheticSpec) -> np.ndarray:
    """Fitness-weighted linear preferential attachment with power-law aging.

    Paper i has a Gamma(k, 1/k) fitness eta_i (mean 1) and gains
    C_i(t) ~ Poisson(r * eta_i * (1 + Y_i(t-1) / c) * t**(-lam)).
    In the mean-field limit with lam = 1, Y_i + c grows like t**(r * eta_i / c),
    so papers with r * eta_i / c > 1 accelerate and the rest fade out.
    """
    p = spec.params
    c, lam, r, k = p["c"], p["lam"], p["r"], p["fitness_shape"]
    n, T = spec.n, spec.T
    rngs = [member_rng(spec.seed, i) for i in range(n)]
    eta = np.array([g.gamma(k, 1.0 / k) for g in rngs])
    y = np.zeros(n)
    out = np.empty((n, T))
    for t in range(1, T + 1):
        rate = r * eta * (1.0 + y / c) * t ** (-lam)
        out[:, t - 1] = [g.poisson(lam_i) for g, lam_i in zip(rngs, rate)]
        y += out[:, t - 1]
    return out


def generate(spec: SyntheticSpec) -> Ensemble:
    """Draw the ensemble described by ``spec``; identical specs give identical output."""
    kind, n, T, p = spec.kind, spec.n, spec.T, spec.params
    label = f"{kind}(" + ",".join(f"{k}={v:g}" for k, v in p.items()) + ")"
    if kind == "gaussian_iid":
        inc = _member_normals(spec, T)
    elif kind == "fbm":
        inc = _hosking(_member_normals(spec, T), p["h"])
    elif kind == "sbm":
        t = np.arange(1, T + 1, dtype=float)
        scale = np.sqrt(t ** (2 * p["h"]) - (t - 1) ** (2 * p["h"]))
        inc = _member_normals(spec, T) * scale
    elif kind == "levy":
        inc = np.vstack([_symmetric_stable(member_rng(spec.seed, i), p["alpha"], T) for i in range(n)])
    else:
        inc = _citation_pa(spec)
        return Ensemble(inc, label=label, data_kind=COUNTS)
    return Ensemble(inc, label=label, data_kind=REALS)


def expected_exponents(spec: SyntheticSpec):
    """Theoretical (M, J, L, H) of the generating process, or ``None`` when unknown."""
    p = spec.params
    if spec.kind == "gaussian_iid":
        return (0.5, 0.5, 0.5, 0.5)
    if spec.kind == "fbm":
        return (0.5, p["h"], 0.5, p["h"])
    if spec.kind == "sbm":
        return (p["h"], 0.5, 0.5, p["h"])
    if spec.kind == "levy":
        a = p["alpha"]
        if a == 2.0:
            return (0.5, 0.5, 0.5, 0.5)
        if 1 < a < 2:
            return (0.5, 0.5, 1 / a, 1 / a)
        return None
    return None
