"""Command-line front end.

    anomdiff analyze --input papers.csv --cohorts 100,200,900 --out results/
    anomdiff analyze --kind fbm --h 0.75 --n 500 --t 1024 --seed 42 --out results/
    anomdiff generate --kind sbm --h 0.25 --n 1000 --t 1024 --seed 7 --out sbm.csv
    anomdiff report --in results/

``--config FILE`` reads flat ``key = value`` lines using the long flag names
(``cohorts = 100,200``); flags given on the command line win.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .io import FORMATS, guess_format, serialize
from .pipeline import PipelineError, RunConfig, run_pipeline
from .scaling import FitWindow
from .synth import KINDS, SyntheticSpec, generate

_EXPONENTS = ("M", "J", "L", "H")
# generator flag -> SyntheticSpec parameter name
_GEN_PARAMS = {"h": "h", "alpha": "alpha", "c": "c", "lam": "lam", "r": "r", "fitness_shape": "fitness_shape"}


def _cohorts(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.replace(" ", "").split(",") if x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad cohort list {text!r}; expected e.g. 100,200,900") from None


def _years(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.replace(" ", "").split(",") if x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad year list {text!r}") from None


def parse_windows(items) -> dict | str | None:
    """``auto``, ``LO:HI`` (time fits M, L, H) or ``KEY=LO:HI`` / ``KEY=auto`` per exponent."""
    if not items:
        return None
    if isinstance(items, str):
        items = items.split()
    if list(items) == ["auto"]:
        return "auto"
    out = {}
    for item in items:
        key, sep, val = item.partition("=")
        keys = [key] if sep else ["M", "L", "H"]
        val = val if sep else item
        for k in keys:
            if k not in _EXPONENTS:
                raise ValueError(f"unknown exponent {k!r} in --window {item!r}")
            out[k] = "auto" if val == "auto" else FitWindow.parse(val)
    return out


def _read_config(path: str) -> dict:
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        out[key.strip().replace("-", "_")] = val.strip()
    return out


def _add_generator_flags(p: argparse.ArgumentParser, required: bool):
    g = p.add_argument_group("synthetic ensemble")
    g.add_argument("--kind", choices=KINDS, required=required)
    g.add_argument("--h", type=float, help="Hurst index (fbm, sbm)")
    g.add_argument("--alpha", type=float, help="stability index (levy)")
    g.add_argument("--c", type=float, help="initial attractiveness (citation_pa)")
    g.add_argument("--lam", type=float, help="aging exponent (citation_pa)")
    g.add_argument("--r", type=float, help="base rate (citation_pa)")
    g.add_argument("--fitness-shape", type=float, help="gamma shape of paper fitness (citation_pa)")
    g.add_argument("--n", type=int, default=1000, help="trajectories (default 1000)")
    g.add_argument("--t", type=int, default=1024, help="steps per trajectory (default 1024)")
    g.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="anomdiff", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="estimate series and exponents for an ensemble")
    a.add_argument("--config", help="flat key = value file of defaults")
    a.add_argument("--input", help="CSV or JSONL ensemble")
    a.add_argument("--format", choices=FORMATS, help="input format (default: from extension)")
    a.add_argument("--cohorts", type=_cohorts, default=(), help="total-count boundaries, e.g. 100,200,900")
    a.add_argument("--dmax", type=int, help="largest TA-MSD lag (default T//3)")
    a.add_argument("--center", choices=("mean", "median"), default="mean")
    a.add_argument("--window", nargs="+", metavar="SPEC", help="auto, LO:HI or KEY=LO:HI (KEY in M,J,L,H)")
    a.add_argument("--hist-years", type=_years, default=(), help="1-based steps to histogram, e.g. 1,10")
    a.add_argument("--bins-per-decade", type=int, default=10)
    a.add_argument("--out", required=True, help="output directory")
    a.add_argument("--emit", choices=("json", "csv"), default="json")
    _add_generator_flags(a, required=False)

    g = sub.add_parser("generate", help="write a synthetic ensemble")
    g.add_argument("--config", help="flat key = value file of defaults")
    _add_generator_flags(g, required=True)
    g.add_argument("--format", choices=FORMATS, help="output format (default: from extension)")
    g.add_argument("--out", required=True, help="output file")

    r = sub.add_parser("report", help="print the exponent table of an analysis")
    r.add_argument("--in", dest="indir", required=True, help="analysis output directory")
    r.add_argument("--digits", type=int, default=2)
    return parser


def _parse(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            defaults = _read_config(args.config)
        except (OSError, ValueError) as exc:
            parser.error(f"config: {exc}")
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        known = {act.dest for act in subparser._actions}
        unknown = set(defaults) - known
        if unknown:
            parser.error(f"config: unknown key(s) {sorted(unknown)}")
        subparser.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def _spec(args) -> SyntheticSpec:
    params = {name: getattr(args, flag) for flag, name in _GEN_PARAMS.items() if getattr(args, flag) is not None}
    return SyntheticSpec(args.kind, int(args.n), int(args.t), int(args.seed), params)


def _cmd_analyze(args) -> int:
    if (args.input is None) == (args.kind is None):
        raise PipelineError("config", "give exactly one of --input and --kind")
    windows = parse_windows(args.window)
    cfg = RunConfig(
        out=args.out,
        input=args.input,
        fmt=args.format,
        synthetic=_spec(args) if args.kind else None,
        cohorts=tuple(args.cohorts),
        dmax=None if args.dmax is None else int(args.dmax),
        center=args.center,
        windows=windows,
        emit=args.emit,
        hist_years=tuple(args.hist_years),
        bins_per_decade=int(args.bins_per_decade),
    )
    out = run_pipeline(cfg)
    print(f"wrote {out}")
    return 0


def _cmd_generate(args) -> int:
    e = generate(_spec(args))
    serialize(e, args.out, args.format or guess_format(args.out))
    print(f"wrote {e.n} x {e.T} {e.data_kind} ensemble to {args.out}")
    return 0


def format_table(doc: dict, digits: int = 2) -> str:
    """Exponent table: one row per scope with M, J, L, H and J+L+M-1."""
    rows = [doc["ensemble"], *doc.get("cohorts", [])]
    head = ["field", "N", "M", "J", "L", "H", "J+L+M-1"]
    body = []
    for r in rows:
        name = r.get("label") or r.get("scope", "")
        if r.get("status") == "ok":
            vals = [f"{r[k]:.{digits}f}" for k in ("M", "J", "L", "H", "J+L+M-1")]
        else:
            vals = ["-"] * 5
            name = f"{name} (failed: {r.get('error', '')})" if len(r.get("error", "")) < 60 else f"{name} (failed)"
        body.append([name, str(r.get("n", ""))] + vals)
    widths = [max(len(x) for x in col) for col in zip(head, *body)]
    lines = ["  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(row, widths)))
             for row in [head, *body]]
    return "\n".join(lines)


def _cmd_report(args) -> int:
    path = Path(args.indir) / "exponents.json"
    try:
        doc = json.loads(path.read_text())
    except (OSError, ValueError) as exc:
        raise PipelineError("report", f"cannot read {path}: {exc}") from exc
    print(format_table(doc, args.digits))
    return 0


def main(argv=None) -> int:
    args = _parse(argv)
    handler = {"analyze": _cmd_analyze, "generate": _cmd_generate, "report": _cmd_report}[args.command]
    try:
        return handler(args)
    except PipelineError as exc:
        print(f"anomdiff: error in stage {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        stage = {"analyze": "config", "generate": "generate", "report": "report"}[args.command]
        print(f"anomdiff: error in stage {stage}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
