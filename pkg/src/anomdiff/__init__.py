"""Scaling exponents (Moses, Joseph, Latent, Hurst) of ensembles of growth trajectories."""

__version__ = "0.1.0"

from .trajectory import COUNTS, REALS, CohortSpec, Ensemble, cumulate, split_cohorts, total_count  # noqa: E402
from .estimators import (  # noqa: E402
    CenterMode,
    StatSeries,
    ea_tamsd,
    eb_ratio,
    ensemble_stats,
    moses_series,
    noah_series,
    tamsd_single,
    variance_series,
)
from .scaling import (  # noqa: E402
    ExponentReport,
    FitError,
    FitWindow,
    ScalingFit,
    auto_window,
    estimate_exponents,
    loglog_fit,
    summed_hurst,
)
from .distributions import LogBinnedHistogram, log_bin_histogram, tail_slope  # noqa: E402
from .synth import SyntheticSpec, expected_exponents, generate  # noqa: E402

__all__ = [
    "COUNTS",
    "REALS",
    "Ensemble",
    "CohortSpec",
    "cumulate",
    "total_count",
    "split_cohorts",
    "CenterMode",
    "StatSeries",
    "ensemble_stats",
    "tamsd_single",
    "ea_tamsd",
    "moses_series",
    "noah_series",
    "variance_series",
    "eb_ratio",
    "FitError",
    "FitWindow",
    "ScalingFit",
    "ExponentReport",
    "loglog_fit",
    "auto_window",
    "estimate_exponents",
    "summed_hurst",
    "LogBinnedHistogram",
    "log_bin_histogram",
    "tail_slope",
    "SyntheticSpec",
    "generate",
    "expected_exponents",
]
