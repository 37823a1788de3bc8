import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from anomdiff.cli import format_table, main, parse_windows
from anomdiff.estimators import ensemble_stats
from anomdiff.io import IngestError, ingest, serialize
from anomdiff.pipeline import PRECISION_ENV, RunConfig, run_pipeline
from anomdiff.scaling import FitWindow
from anomdiff.synth import SyntheticSpec, generate
from anomdiff.trajectory import COUNTS, REALS, Ensemble


def write(path, text):
    path.write_text(text)
    return path


def test_ingest_csv_row(tmp_path):
    e = ingest(write(tmp_path / "a.csv", "p1,1,0,2\n"))
    assert (e.n, e.T, e.ids, e.data_kind) == (1, 3, ("p1",), COUNTS)
    np.testing.assert_array_equal(e.increments[0], [1, 0, 2])


def test_ragged_names_line(tmp_path):
    with pytest.raises(IngestError, match="line 2"):
        ingest(write(tmp_path / "a.csv", "a,1,2,3\nb,1,2\n"))
    with pytest.raises(IngestError, match="line 2"):
        ingest(write(tmp_path / "a.jsonl", '{"id": 1, "increments": [1]}\n{"id": 2, "increments": [1, 2]}\n'))


def test_jsonl_zero_row(tmp_path):
    e = ingest(write(tmp_path / "z.jsonl", '{"id": "q", "increments": [0, 0, 0]}\n'))
    assert e.totals().tolist() == [0]
    assert e.data_kind == COUNTS


@pytest.mark.parametrize(
    "name, text, match",
    [
        ("neg.csv", "a,1,-2\n", "negative count"),
        ("empty.csv", "", "no trajectories"),
        ("blank.jsonl", "\n\n", "no trajectories"),
        ("bad.csv", "a,1,x\n", "bad increment"),
        ("bad.jsonl", "{oops\n", "invalid JSON"),
        ("noinc.jsonl", '{"id": 1}\n', "increments"),
    ],
)
def test_ingest_errors(tmp_path, name, text, match):
    with pytest.raises(IngestError, match=match):
        ingest(write(tmp_path / name, text))


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        ingest(tmp_path / "nope.csv")


def test_reals_with_negatives_are_reals(tmp_path):
    e = ingest(write(tmp_path / "r.csv", "a,1.5,-2.0\n"))
    assert e.data_kind == REALS


count_ens = arrays(np.int64, st.tuples(st.integers(1, 6), st.integers(1, 8)), elements=st.integers(0, 10**9))
real_ens = arrays(
    np.float64, st.tuples(st.integers(1, 6), st.integers(1, 8)), elements=st.floats(-1e300, 1e300)
)


@settings(suppress_health_check=[HealthCheck.function_scoped_fixture], max_examples=40)
@given(st.one_of(count_ens.map(lambda a: (a, COUNTS)), real_ens.map(lambda a: (a, REALS))), st.sampled_from(["csv", "jsonl"]))
def test_roundtrip_bit_exact(tmp_path, data, fmt):
    arr, kind = data
    e = Ensemble(arr, data_kind=kind, ids=[f"id{i}" for i in range(arr.shape[0])])
    path = tmp_path / f"rt.{fmt}"
    serialize(e, path)
    back = ingest(path)
    assert back.data_kind == kind and back.ids == e.ids
    assert back.increments.tobytes() == e.increments.tobytes()


def test_parse_windows():
    assert parse_windows(None) is None
    assert parse_windows(["auto"]) == "auto"
    got = parse_windows(["10:100", "J=2:30", "H=auto"])
    assert got == {"M": FitWindow(10, 100), "L": FitWindow(10, 100), "H": "auto", "J": FitWindow(2, 30)}
    with pytest.raises(ValueError):
        parse_windows(["Q=1:4"])


def read_exponents(out):
    return json.loads((out / "exponents.json").read_text())


def test_gaussian_pipeline(tmp_path):
    out = tmp_path / "run"
    assert main(["analyze", "--kind", "gaussian_iid", "--n", "1000", "--t", "1024", "--seed", "42",
                 "--out", str(out)]) == 0
    rep = read_exponents(out)["ensemble"]
    assert rep["status"] == "ok"
    for k in "MJLH":
        assert 0.45 <= rep[k] <= 0.55, k
    assert rep["residual"] == pytest.approx(rep["H"] - (rep["J"] + rep["L"] + rep["M"] - 1), abs=1e-11)
    kinds = {p.stem for p in (out / "series" / "all").iterdir()}
    assert kinds == {"EA", "EATA", "EA_over_EATA", "variance", "moses", "noah", "hurst_var", "tamsd", "eb_ratio"}
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 42 and "numpy" in manifest["versions"]


def test_citation_cohorts(tmp_path, capsys):
    out = tmp_path / "pa"
    rc = main(["analyze", "--kind", "citation_pa", "--n", "10000", "--t", "34", "--seed", "42",
               "--cohorts", "900", "--hist-years", "5", "--emit", "csv", "--out", str(out)])
    assert rc == 0
    doc = read_exponents(out)
    low, high = doc["cohorts"]
    assert (low["label"], high["label"]) == ("<=900", ">900")
    assert low["status"] == high["status"] == "ok"
    assert high["M"] > low["M"]
    lines = (out / "histograms" / "year_5.csv").read_text().splitlines()
    assert lines[0] == "lo,hi,center,density,count"
    assert main(["report", "--in", str(out)]) == 0
    table = capsys.readouterr().out
    assert "J+L+M-1" in table and ">900" in table


def test_empty_cohort_is_recorded(tmp_path):
    src = write(tmp_path / "d.csv", "".join(f"p{i},{i % 3},1,0,2,1,0,1,3,0,1,2,0\n" for i in range(30)))
    out = tmp_path / "o"
    assert main(["analyze", "--input", str(src), "--cohorts", "5,1000", "--out", str(out)]) == 0
    cohorts = read_exponents(out)["cohorts"]
    assert [c["n"] for c in cohorts] == [0, 30, 0]
    assert cohorts[0]["status"] == "failed" and "no trajectories" in cohorts[0]["error"]
    assert "failed" in format_table(read_exponents(out))


def test_missing_input_leaves_nothing(tmp_path, capsys):
    out = tmp_path / "never"
    rc = main(["analyze", "--input", str(tmp_path / "missing.csv"), "--out", str(out)])
    assert rc != 0
    assert "stage ingest" in capsys.readouterr().err
    assert not out.exists()
    assert list(tmp_path.iterdir()) == []


def test_failing_stage_removes_partial_output(tmp_path, capsys):
    out = tmp_path / "o"
    rc = main(["analyze", "--kind", "gaussian_iid", "--n", "20", "--t", "40", "--hist-years", "3",
               "--out", str(out)])
    assert rc == 1
    assert "stage histogram" in capsys.readouterr().err
    assert list(tmp_path.iterdir()) == []


def test_input_and_kind_exclusive(tmp_path, capsys):
    assert main(["analyze", "--out", str(tmp_path / "x")]) == 1
    assert "exactly one" in capsys.readouterr().err


def test_generate_then_analyze(tmp_path):
    data = tmp_path / "fbm.jsonl"
    assert main(["generate", "--kind", "fbm", "--h", "0.75", "--n", "50", "--t", "128", "--seed", "3",
                 "--out", str(data)]) == 0
    e = ingest(data)
    assert (e.n, e.T, e.data_kind) == (50, 128, REALS)
    out = tmp_path / "r"
    assert main(["analyze", "--input", str(data), "--window", "auto", "--dmax", "20", "--out", str(out)]) == 0
    rep = read_exponents(out)["ensemble"]
    assert rep["fits"]["J"]["window"][1] <= 20


def test_generate_rejects_foreign_param(tmp_path, capsys):
    rc = main(["generate", "--kind", "levy", "--h", "0.3", "--out", str(tmp_path / "x.csv")])
    assert rc == 1 and "unknown parameter" in capsys.readouterr().err
    assert not (tmp_path / "x.csv").exists()


def test_config_file_and_override(tmp_path):
    cfg = write(tmp_path / "run.cfg", "# synthetic run\nkind = sbm\nh = 0.25\nn = 200\nt = 128\nseed = 4\n"
                "window = M=10:128 J=2:42\ncenter = median\n")
    out = tmp_path / "o"
    assert main(["analyze", "--config", str(cfg), "--seed", "5", "--out", str(out)]) == 0
    m = json.loads((out / "manifest.json").read_text())
    assert m["config"]["synthetic"]["params"] == {"h": 0.25}
    assert m["seed"] == 5
    assert m["config"]["center"] == "ensemble_median"
    assert m["config"]["windows"]["J"] == [2, 42]


def test_config_unknown_key(tmp_path):
    cfg = write(tmp_path / "bad.cfg", "colour = blue\n")
    with pytest.raises(SystemExit):
        main(["analyze", "--config", str(cfg), "--out", str(tmp_path / "o")])


def test_precision_env(tmp_path, monkeypatch):
    spec = SyntheticSpec("gaussian_iid", 30, 40, seed=1)
    monkeypatch.setenv(PRECISION_ENV, "4")
    out = run_pipeline(RunConfig(out=str(tmp_path / "p4"), synthetic=spec, emit="csv"))
    row = (out / "series" / "all" / "EA.csv").read_text().splitlines()[1]
    ea = ensemble_stats(generate(spec))["EA"].values[0]
    assert row == f"1,{ea:.4g}"
    monkeypatch.setenv(PRECISION_ENV, "zero")
    with pytest.raises(Exception, match=PRECISION_ENV):
        run_pipeline(RunConfig(out=str(tmp_path / "bad"), synthetic=spec))


def test_runconfig_validation():
    spec = SyntheticSpec("gaussian_iid", 3, 10)
    with pytest.raises(ValueError, match="exactly one"):
        RunConfig(out="x", input="a.csv", synthetic=spec)
    with pytest.raises(ValueError, match="dmax"):
        RunConfig(out="x", synthetic=spec, dmax=0)


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "anomdiff", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "anomdiff" in res.stdout
