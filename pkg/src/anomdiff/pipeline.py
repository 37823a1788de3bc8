"""End-to-end analysis: load or generate, estimate, fit, write plot-ready files.

Output layout under ``out``::

    manifest.json
    exponents.json
    series/<scope>/<kind>.<csv|json>
    histograms/year_<t>.<csv|json>

``scope`` is ``all`` for the whole ensemble and ``cohort_<k>`` for cohorts,
lowest first. Every float is written with ``ANOMDIFF_PRECISION`` significant
digits (12 unless set), so outputs are byte-stable across runs.
"""

from __future__ import annotations

import json
import os
import platform
import shutil
import tempfile
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .distributions import DEFAULT_BINS_PER_DECADE, log_bin_histogram
from .estimators import CenterMode, default_dmax, ea_tamsd, ensemble_stats, eb_ratio
from .estimators import moses_series, noah_series, variance_series
from .io import FORMATS, ingest
from .scaling import FitError, estimate_exponents
from .synth import SyntheticSpec, generate
from .trajectory import COUNTS, CohortSpec, Ensemble, split_cohorts

__all__ = ["RunConfig", "PipelineError", "run_pipeline", "precision", "PRECISION_ENV"]

PRECISION_ENV = "ANOMDIFF_PRECISION"
EMIT_FORMATS = ("json", "csv")


class PipelineError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


def precision() -> int:
    raw = os.environ.get(PRECISION_ENV, "").strip()
    if not raw:
        return 12
    try:
        p = int(raw)
    except ValueError:
        raise PipelineError("config", f"{PRECISION_ENV} must be an integer, got {raw!r}") from None
    if not 1 <= p <= 17:
        raise PipelineError("config", f"{PRECISION_ENV} must lie in 1..17, got {p}")
    return p


@dataclass(frozen=True)
class RunConfig:
    """Everything a run depends on. Exactly one of ``input`` and ``synthetic`` is set."""

    out: str
    input: str | None = None
    fmt: str | None = None
    synthetic: SyntheticSpec | None = None
    cohorts: tuple = ()
    dmax: int | None = None
    center: str = "mean"
    windows: dict | str | None = None
    emit: str = "json"
    hist_years: tuple = ()
    bins_per_decade: int = DEFAULT_BINS_PER_DECADE

    def __post_init__(self):
        if (self.input is None) == (self.synthetic is None):
            raise ValueError("give exactly one of an input file and a synthetic spec")
        if self.fmt is not None and self.fmt not in FORMATS:
            raise ValueError(f"unknown input format {self.fmt!r}")
        if self.emit not in EMIT_FORMATS:
            raise ValueError(f"unknown emit format {self.emit!r}; expected json or csv")
        if self.dmax is not None and self.dmax < 1:
            raise ValueError("dmax must be >= 1")
        CenterMode.parse(self.center)
        if self.cohorts:
            CohortSpec(tuple(self.cohorts))
        if any(int(y) != y or y < 1 for y in self.hist_years):
            raise ValueError("histogram years are 1-based integers")
        if self.windows not in (None, "auto") and not isinstance(self.windows, dict):
            raise ValueError("windows must be None, 'auto' or a mapping")

    def as_dict(self) -> dict:
        """Echo for the manifest. The output directory is left out: it does not affect results."""
        windows = self.windows
        if isinstance(windows, dict):
            windows = {k: (v if v == "auto" else [v.lo, v.hi]) for k, v in sorted(windows.items())}
        return {
            "input": self.input,
            "format": self.fmt,
            "synthetic": self.synthetic.as_dict() if self.synthetic else None,
            "cohorts": list(self.cohorts),
            "dmax": self.dmax,
            "center": CenterMode.parse(self.center).value,
            "windows": windows,
            "emit": self.emit,
            "hist_years": list(self.hist_years),
            "bins_per_decade": self.bins_per_decade,
        }


def _round(obj, digits: int):
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not np.isfinite(x):
            return None
        return float(f"{x:.{digits}g}")
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, dict):
        return {k: _round(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v, digits) for v in obj]
    if isinstance(obj, np.ndarray):
        return _round(obj.tolist(), digits)
    return obj


def _dump_json(path: Path, obj, digits: int):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_round(obj, digits), indent=2, sort_keys=False) + "\n")


def _dump_table(path: Path, header: list, columns: list, digits: int):
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(_fmt(v, digits) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _fmt(v, digits: int) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.{digits}g}"


def _write_series(base: Path, s, emit: str, digits: int):
    if emit == "csv":
        _dump_table(base.with_suffix(".csv"), ["axis", "value"], [s.axis, s.values], digits)
    else:
        _dump_json(base.with_suffix(".json"), [[a, v] for a, v in zip(s.axis, s.values)], digits)


def _all_series(e: Ensemble, cfg: RunConfig, dmax: int):
    """Every series kind for one scope; kinds that are undefined come back as errors."""
    stats = ensemble_stats(e)
    makers = {
        "EA": lambda: stats["EA"],
        "EATA": lambda: stats["EATA"],
        "EA_over_EATA": lambda: stats["ratio"],
        "variance": lambda: stats["variance"],
        "moses": lambda: moses_series(e),
        "noah": lambda: noah_series(e, cfg.center),
        "hurst_var": lambda: variance_series(e),
        "tamsd": lambda: ea_tamsd(e, dmax),
        "eb_ratio": lambda: eb_ratio(e, dmax),
    }
    out, errors = {}, {}
    for kind, make in makers.items():
        try:
            out[kind] = make()
        except ValueError as exc:
            errors[kind] = str(exc)
    return out, errors


def _fit(e: Ensemble, cfg: RunConfig, dmax: int) -> dict:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            rep = estimate_exponents(e, cfg.windows, cfg.center, dmax)
        except FitError as exc:
            return {"label": e.label, "n": e.n, "status": "failed", "stage": "fit", "series": exc.series,
                    "error": str(exc)}
    d = {"label": e.label, "n": e.n, "status": "ok", **rep.as_dict()}
    d["label"] = e.label
    d["warnings"] = [str(w.message) for w in caught]
    return d


def _load(cfg: RunConfig) -> Ensemble:
    if cfg.synthetic is not None:
        try:
            return generate(cfg.synthetic)
        except Exception as exc:
            raise PipelineError("generate", str(exc)) from exc
    try:
        return ingest(cfg.input, cfg.fmt)
    except (OSError, ValueError) as exc:
        raise PipelineError("ingest", str(exc)) from exc


def _run_into(cfg: RunConfig, out: Path, digits: int):
    e = _load(cfg)
    dmax = cfg.dmax if cfg.dmax is not None else default_dmax(e.T)
    if not 1 <= dmax <= e.T - 1:
        raise PipelineError("config", f"dmax = {dmax} outside 1..T-1 for T = {e.T}")

    scopes = [("all", e.label or "all", e)]
    if cfg.cohorts:
        if e.data_kind != COUNTS:
            raise PipelineError("cohorts", "cohort splitting needs count data")
        for k, (label, sub) in enumerate(split_cohorts(e, CohortSpec(tuple(cfg.cohorts)))):
            scopes.append((f"cohort_{k}", label, sub))

    reports = []
    for scope, label, sub in scopes:
        entry = {"scope": scope}
        if sub.empty:
            entry.update({"label": label, "n": 0, "status": "failed", "stage": "cohorts",
                          "error": "cohort has no trajectories"})
            reports.append(entry)
            continue
        try:
            series, errors = _all_series(sub, cfg, dmax)
        except ValueError as exc:
            raise PipelineError("estimate", f"{scope}: {exc}") from exc
        for kind, s in series.items():
            _write_series(out / "series" / scope / kind, s, cfg.emit, digits)
        entry.update(_fit(sub, cfg, dmax))
        entry["label"] = label
        if errors:
            entry["series_errors"] = errors
        reports.append(entry)
    _dump_json(out / "exponents.json", {"ensemble": reports[0], "cohorts": reports[1:]}, digits)

    for year in cfg.hist_years:
        if year > e.T:
            raise PipelineError("histogram", f"year {year} is beyond T = {e.T}")
        try:
            h = log_bin_histogram(e.increments[:, int(year) - 1], cfg.bins_per_decade)
        except ValueError as exc:
            raise PipelineError("histogram", f"year {year}: {exc}") from exc
        base = out / "histograms" / f"year_{int(year)}"
        cols = [h.bin_edges[:-1], h.bin_edges[1:], h.centers, h.densities, h.raw_counts]
        names = ["lo", "hi", "center", "density", "count"]
        if cfg.emit == "csv":
            _dump_table(base.with_suffix(".csv"), names, cols, digits)
        else:
            _dump_json(base.with_suffix(".json"),
                       {"year": int(year), "zero_count": h.zero_count, "total": h.total,
                        "bins": [dict(zip(names, row)) for row in zip(*cols)]}, digits)

    manifest = {
        "config": cfg.as_dict(),
        "seed": cfg.synthetic.seed if cfg.synthetic else None,
        "ensemble": {"label": e.label, "n": e.n, "T": e.T, "data_kind": e.data_kind, "dmax": dmax},
        "precision": digits,
        "versions": {"anomdiff": __version__, "numpy": np.__version__, "python": platform.python_version()},
    }
    _dump_json(out / "manifest.json", manifest, digits)


def run_pipeline(cfg: RunConfig) -> Path:
    """Run the analysis and return the output directory.

    Files are staged in a scratch directory and moved into place only when
    every stage succeeded, so a failed run leaves nothing behind.
    """
    digits = precision()
    out = Path(cfg.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=f".{out.name}.", dir=out.parent))
    try:
        _run_into(cfg, stage, digits)
        out.mkdir(exist_ok=True)
        for item in sorted(stage.iterdir()):
            dest = out / item.name
            if dest.is_dir():
                shutil.rmtree(dest)
            elif dest.exists():
                dest.unlink()
            shutil.move(str(item), dest)
    except PipelineError:
        raise
    except ValueError as exc:
        raise PipelineError("analysis", str(exc)) from exc
    except OSError as exc:
        raise PipelineError("write", str(exc)) from exc
    finally:
        shutil.rmtree(stage, ignore_errors=True)
    return out
