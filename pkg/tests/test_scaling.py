import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from anomdiff.estimators import StatSeries
from anomdiff.scaling import (
    FitError,
    FitWindow,
    auto_window,
    default_windows,
    estimate_exponents,
    loglog_fit,
    summed_hurst,
)
from anomdiff.synth import SyntheticSpec, generate
from anomdiff.trajectory import COUNTS, Ensemble

T = np.arange(1, 101, dtype=float)


def series(values, axis=T, kind="EA"):
    return StatSeries(axis, values, kind)


def test_exact_square():
    fit = loglog_fit(series(T**2), FitWindow(3, 70))
    assert fit.exponent == pytest.approx(2, abs=1e-12)
    assert fit.r_squared == pytest.approx(1, abs=1e-12)
    assert fit.n_points == 68
    np.testing.assert_allclose(fit.predict([5, 10]), [25, 100], rtol=1e-10)


def test_constant_is_exponent_zero():
    fit = loglog_fit(series(np.full(T.size, 4.2)))
    assert fit.exponent == 0
    assert fit.r_squared == 1
    assert fit.log_intercept == pytest.approx(math.log(4.2))


def test_noisy_power_law():
    rng = np.random.default_rng(11)
    y = T**0.75 * np.exp(rng.normal(0, 0.05, T.size))
    assert loglog_fit(series(y)).exponent == pytest.approx(0.75, abs=0.05)


def test_nonpositive_value_named():
    y = T.copy()
    y[40] = 0
    with pytest.raises(FitError, match="axis point 41"):
        loglog_fit(series(y))
    # outside the window it does not matter
    assert loglog_fit(series(y), FitWindow(50, 100)).exponent == pytest.approx(1)


def test_too_few_points():
    with pytest.raises(FitError, match="need >= 3"):
        loglog_fit(series(T), FitWindow(10, 11))


def test_window_parse():
    assert FitWindow.parse("10:34") == FitWindow(10, 34)
    for bad in ["10", "a:b", "5:5", "1:2:3"]:
        with pytest.raises(ValueError):
            FitWindow.parse(bad)


@given(st.floats(-3, 3), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_fit_equivariance(k, c, a):
    y = T**k * np.exp(0.1 * np.sin(T))
    base = loglog_fit(series(y))
    scaled = loglog_fit(series(c * y))
    assert scaled.exponent == pytest.approx(base.exponent, abs=1e-9)
    assert scaled.r_squared == pytest.approx(base.r_squared, abs=1e-9)
    assert scaled.log_intercept == pytest.approx(base.log_intercept + math.log(c), abs=1e-9)
    moved = loglog_fit(series(y, axis=a * T))
    assert moved.exponent == pytest.approx(base.exponent, abs=1e-9)


def test_auto_window_full_axis_for_pure_power_law():
    w = auto_window(series(3 * T**1.3))
    assert (w.lo, w.hi) == (1, 100)


def test_auto_window_crossover():
    y = np.where(T <= 25, T, T**2 / 25)
    w = auto_window(series(y))
    assert w.hi <= 25 or w.lo >= 25
    again = auto_window(series(y))
    assert again == w


def test_auto_window_skips_zero_runs():
    y = T**0.5
    y[:20] = 0
    w = auto_window(series(y))
    assert w.lo >= 21


def test_auto_window_all_zero():
    with pytest.raises(FitError, match="manually"):
        auto_window(series(np.zeros(T.size)))


def test_default_windows():
    w = default_windows(1024, 341)
    assert w["M"] == FitWindow(10, 1024) and w["J"] == FitWindow(2, 341)
    # not enough room for t >= 10: fall back to the full axis
    assert default_windows(8, 2)["M"] == FitWindow(1, 8)
    assert default_windows(8, 2)["J"] == FitWindow(1, 2)


@pytest.mark.parametrize(
    "row, summed, residual",
    [
        ((0.10, 0.92, 0.85, 0.92), 0.87, 0.05),
        ((0.89, 0.94, 0.58, 1.46), 1.41, 0.05),
    ],
)
def test_summed_relation(row, summed, residual):
    M, J, L, H = row
    assert summed_hurst(M, J, L) == pytest.approx(summed, abs=1e-9)
    assert H - summed_hurst(M, J, L) == pytest.approx(residual, abs=1e-9)


@pytest.fixture(scope="module")
def brownian_report():
    return estimate_exponents(generate(SyntheticSpec("gaussian_iid", 400, 512, seed=5)))


def test_brownian_exponents(brownian_report):
    r = brownian_report
    for name in "MJLH":
        assert getattr(r, name) == pytest.approx(0.5, abs=0.06), name
    assert abs(r.residual) < 0.06


def test_report_fields_consistent(brownian_report):
    d = brownian_report.as_dict()
    assert d["residual"] == d["H"] - d["J+L+M-1"]
    assert d["residual"] == pytest.approx(d["H"] - d["J"] - d["L"] - d["M"] + 1, abs=1e-15)
    assert d["J+L+M-1"] == d["J"] + d["L"] + d["M"] - 1
    assert set(d["fits"]) == {"M", "J", "L", "H"}


def test_fbm_report():
    r = estimate_exponents(generate(SyntheticSpec("fbm", 500, 1024, seed=3, params={"h": 0.75})))
    assert (r.M, r.L) == (pytest.approx(0.5, abs=0.05), pytest.approx(0.5, abs=0.1))
    assert (r.J, r.H) == (pytest.approx(0.75, abs=0.05), pytest.approx(0.75, abs=0.07))
    assert abs(r.residual) <= 0.1


def test_auto_windows_run(brownian_report):
    e = generate(SyntheticSpec("gaussian_iid", 200, 256, seed=8))
    r = estimate_exponents(e, windows="auto")
    assert all(f.n_points >= 5 for f in r.fits.values())
    assert r.M == pytest.approx(0.5, abs=0.1)


def test_latent_floor_warns():
    # M fit sees a growing mean while fluctuations stay tiny and constant
    rng = np.random.default_rng(0)
    t = np.arange(1, 201)
    inc = np.round(t / 10.0) + rng.integers(0, 2, (300, t.size))
    e = Ensemble(inc, data_kind=COUNTS)
    with pytest.warns(RuntimeWarning, match="below 1/2"):
        r = estimate_exponents(e)
    assert r.l_floored and r.L == 0.5 and r.L_raw < 0.45


def test_no_warning_near_half(brownian_report):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        estimate_exponents(generate(SyntheticSpec("gaussian_iid", 100, 128, seed=1)))


def test_fit_error_names_series():
    e = Ensemble(np.zeros((5, 40)), data_kind=COUNTS)
    with pytest.raises(FitError, match="M fit on moses") as info:
        estimate_exponents(e)
    assert info.value.series == "moses"


def test_unknown_window_key():
    with pytest.raises(ValueError, match="unknown exponent"):
        estimate_exponents(Ensemble(np.ones((3, 40))), windows={"Q": FitWindow(1, 5)})
