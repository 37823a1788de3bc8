"""Reading and writing ensembles as CSV or JSON-lines.

CSV rows are ``id,c1,c2,...,cT``; JSONL lines are ``{"id": ..., "increments": [...]}``.
Integer tokens mark count data, so negative integers are rejected, while
any decimal point or exponent marks real-valued data. Writing reals with
``repr`` makes ``read(write(e))`` bit-exact.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .trajectory import COUNTS, REALS, Ensemble

__all__ = ["FORMATS", "ingest", "serialize", "guess_format", "IngestError"]

FORMATS = ("csv", "jsonl")


class IngestError(ValueError):
    pass


def guess_format(path) -> str:
    return "jsonl" if Path(path).suffix.lower() in (".jsonl", ".ndjson") else "csv"


def _number(tok, lineno: int):
    if isinstance(tok, bool):
        raise IngestError(f"line {lineno}: boolean is not a valid increment")
    if isinstance(tok, (int, float)):
        return tok
    if not isinstance(tok, str):
        raise IngestError(f"line {lineno}: bad increment {tok!r}")
    tok = tok.strip()
    try:
        return int(tok)
    except ValueError:
        pass
    try:
        return float(tok)
    except ValueError:
        raise IngestError(f"line {lineno}: bad increment {tok!r}") from None


def _rows_csv(path: Path):
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < 2:
                raise IngestError(f"line {lineno}: need an id followed by at least one increment")
            yield lineno, row[0].strip(), [_number(tok, lineno) for tok in row[1:]]


def _rows_jsonl(path: Path):
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestError(f"line {lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict) or "increments" not in obj:
                raise IngestError(f"line {lineno}: expected an object with an 'increments' list")
            inc = obj["increments"]
            if not isinstance(inc, list) or not inc:
                raise IngestError(f"line {lineno}: 'increments' must be a non-empty list")
            ident = obj.get("id", "")
            yield lineno, str(ident), [_number(tok, lineno) for tok in inc]


def ingest(path, fmt: str | None = None, label: str | None = None) -> Ensemble:
    """Load an ensemble; the data kind is counts iff every token is an integer."""
    path = Path(path)
    fmt = fmt or guess_format(path)
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    if not path.is_file():
        raise FileNotFoundError(f"input file not found: {path}")
    reader = _rows_csv if fmt == "csv" else _rows_jsonl

    ids, rows = [], []
    integral = True
    width = None
    for lineno, ident, vals in reader(path):
        if width is None:
            width = len(vals)
        elif len(vals) != width:
            raise IngestError(f"line {lineno}: ragged row with {len(vals)} increments, expected {width}")
        if all(isinstance(v, int) for v in vals):
            neg = [v for v in vals if v < 0]
            if neg:
                raise IngestError(f"line {lineno}: negative count {neg[0]}")
        else:
            integral = False
        ids.append(ident or str(len(ids)))
        rows.append(vals)
    if not rows:
        raise IngestError(f"{path}: file contains no trajectories")

    arr = np.array(rows, dtype=float)
    kind = COUNTS if integral else REALS
    return Ensemble(arr, label=label if label is not None else path.stem, data_kind=kind, ids=tuple(ids))


def _tokens(e: Ensemble, row: np.ndarray) -> list:
    if e.data_kind == COUNTS:
        return [int(v) for v in row]
    return [float(v) for v in row]


def serialize(e: Ensemble, path, fmt: str | None = None) -> None:
    """Write ``e`` so that :func:`ingest` recovers it exactly."""
    path = Path(path)
    fmt = fmt or guess_format(path)
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    if e.empty:
        raise ValueError("cannot serialize an empty ensemble")
    with open(path, "w", newline="") as fh:
        if fmt == "csv":
            w = csv.writer(fh, lineterminator="\n")
            for ident, row in zip(e.ids, e.increments):
                w.writerow([ident] + [repr(v) for v in _tokens(e, row)])
        else:
            for ident, row in zip(e.ids, e.increments):
                fh.write(json.dumps({"id": ident, "increments": _tokens(e, row)}) + "\n")
