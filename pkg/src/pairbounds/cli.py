"""Command-line front end.

Exit codes: 0 success, 1 numeric mismatch, 2 input error, 3 construction
case error, 4 dimension cap, 5 unexpected infeasibility.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import applications, closed, extremal, lp, tables
from .core import BivariateSpec, Number, identical, validate_marginals
from .errors import (
    BoundsError,
    CaseUnsupported,
    CaseViolation,
    DimensionCap,
    SolverFailure,
)
from .formats import load_problem

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_CASE, EXIT_CAP, EXIT_INFEASIBLE = 0, 1, 2, 3, 4, 5


@dataclass
class RunConfig:
    """Parsed command line: the command, its flags and output settings."""

    command: str
    args: argparse.Namespace
    fmt: str = "table"
    digits: int = 6
    tolerance: float | None = None
    seed: int | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tolerance is not None and not self.tolerance > 0:
            raise BoundsError(f"--tolerance must be positive, got {self.tolerance}")
        if self.digits < 0:
            raise BoundsError(f"--digits must be non-negative, got {self.digits}")

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        return cls(
            ns.command,
            ns,
            getattr(ns, "format", "table"),
            getattr(ns, "digits", 6),
            getattr(ns, "tolerance", None),
            getattr(ns, "seed", None),
        )


def _fmt(v: Number, digits: int) -> str:
    return f"{float(v):.{digits}f}"


def _json_num(v):
    if isinstance(v, Fraction):
        return str(v)
    return v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return _json_num(obj)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _exactify(values, exact: bool):
    if not exact:
        return values
    return [v if isinstance(v, Fraction) else Fraction(str(v)) for v in values]


def _marginals(args, need_k: bool = True):
    """Marginals, threshold and bivariates from ``--p``, ``--p-file`` or ``--n/--prob``."""
    biv = None
    k = getattr(args, "k", None)
    if getattr(args, "p_file", None):
        prob = load_problem(args.p_file)
        p, biv = prob.p, prob.bivariates
        if k is None:
            k = prob.k
    elif getattr(args, "p", None):
        p = validate_marginals(args.p)
    elif getattr(args, "n", None) is not None and getattr(args, "prob", None) is not None:
        p = identical(args.n, args.prob)
    else:
        raise BoundsError("p: supply --p, --p-file or --n with --prob")
    if getattr(args, "exact", False):
        p = validate_marginals(_exactify(p.original(), True))
    if need_k and k is None:
        raise BoundsError("k: supply --k")
    return p, k, biv


# -- bounds -------------------------------------------------------------------


def _applicable(p, k: int) -> dict:
    """Every bound defined at ``(p, k)``, keyed by method name."""
    methods = {name: (lambda f: lambda: f(p, k))(f) for name, f in closed.UPPER_METHODS.items()}
    if k == 1:
        methods["boole_union"] = lambda: closed.boole_union(p)
        methods["union_tight"] = lambda: closed.union_tight(p)
    if k == p.n:
        methods["intersection_tight_lower"] = lambda: closed.intersection_tight_lower(p)
        methods["frechet_intersection_lower"] = lambda: closed.frechet_intersection_lower(p)
    if len(set(p.probs)) == 1:
        methods["identical_tight"] = lambda: closed.identical_tight(p.n, k, p.probs[0])
        methods["identical_tight_lower"] = lambda: closed.identical_tight_lower(p.n, k, p.probs[0], lp_fallback=p.n <= lp.DEFAULT_CAP)
    return methods


def cmd_bounds(cfg: RunConfig) -> int:
    args = cfg.args
    p, k, _ = _marginals(args)
    if not 1 <= k <= p.n:
        raise BoundsError(f"k: {k} outside [1, {p.n}]")
    avail = _applicable(p, k)
    if args.methods:
        names = [m.strip() for m in args.methods.split(",") if m.strip()]
        unknown = [m for m in names if m not in avail]
        if unknown:
            raise BoundsError(f"methods: {', '.join(unknown)} not available for n={p.n}, k={k}; "
                              f"choose from {', '.join(sorted(avail))}")
    else:
        names = list(avail)
    reports = []
    for name in names:
        try:
            reports.append(avail[name]())
        except (CaseUnsupported, closed.RegionUnsupported):
            if args.methods:
                raise
    reports.sort(key=lambda r: (float(r.value), r.method))
    d = cfg.digits
    if cfg.fmt == "json":
        text = json.dumps(
            [{"method": r.method, "value": _json_num(r.value), "detail": _jsonable(r.detail)} for r in reports],
            indent=2,
        ) + "\n"
    elif cfg.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method", "value", "detail"])
        for r in reports:
            w.writerow([r.method, _fmt(r.value, d), json.dumps(_jsonable(r.detail), sort_keys=True)])
        text = buf.getvalue()
    else:
        lines = []
        for r in reports:
            extra = " ".join(f"{key}={val}" for key, val in r.detail.items() if val is not None)
            lines.append(f"{r.method}, {_fmt(r.value, d)}" + (f"  ({extra})" if extra else ""))
        text = "\n".join(lines) + "\n"
    _emit(text, getattr(args, "out", None))
    return EXIT_OK


# -- extremal -----------------------------------------------------------------


def _build(args):
    """Return ``(distribution, marginals, bivariate spec, k, closed-form value)``."""
    kind = args.kind
    if kind in ("identical", "almost-identical"):
        if args.n is None or args.k is None or args.prob is None:
            raise BoundsError("n/k/prob: identical constructions need --n, --k and --prob")
        prob = Fraction(args.prob) if args.exact or "/" in args.prob else float(args.prob)
        if kind == "identical":
            dist = extremal.build_identical_extremal(args.n, args.k, prob)
            return dist, identical(args.n, prob), None, args.k, closed.identical_tight(args.n, args.k, prob).value
        if args.q is None:
            raise BoundsError("q: almost-identical needs --q")
        q = Fraction(args.q) if args.exact or "/" in args.q else float(args.q)
        dist = extremal.build_almost_identical_extremal(args.n, args.k, prob, q)
        p = validate_marginals([prob] * (args.n - 1) + [q])
        return dist, p, None, args.k, closed.almost_identical_tight(args.n, args.k, prob, q).value
    p, _, _ = _marginals(args, need_k=False)
    if kind == "union":
        return extremal.build_union_extremal(p), p, None, 1, closed.union_tight(p).value
    if kind == "intersection":
        return extremal.build_intersection_extremal(p), p, None, p.n, closed.intersection_tight_lower(p).value
    if args.scale is None:
        raise BoundsError("scale: supply --scale")
    scale = Fraction(args.scale) if p.exact else float(Fraction(args.scale))
    if kind == "scaled":
        return extremal.build_scaled_bivariate(p, scale), p, BivariateSpec.scaled(p, scale), 1, None
    return extremal.build_complement_scaled(p, scale), p, BivariateSpec.complement_scaled(p, scale), 1, None


def cmd_extremal(cfg: RunConfig) -> int:
    args = cfg.args
    dist, p, biv, k, bound = _build(args)
    report = extremal.verify_distribution(dist, p, biv, k, tol=cfg.tolerance or 1e-9)
    gap = None if bound is None else abs(report.objective_mass - bound)
    ok = report.passed and (gap is None or gap <= (0 if p.exact else (cfg.tolerance or 1e-9)))
    if cfg.fmt == "csv" and isinstance(dist, extremal.JointDistribution):
        text = extremal.distribution_to_csv(dist)
    else:
        text = extremal.distribution_to_json(dist) + "\n"
    _emit(text, args.out)
    summary = {
        "construction": args.kind,
        "objective": _json_num(report.objective_mass),
        "closed_form": _json_num(bound),
        "total_mass_error": report.total_mass_error,
        "max_univariate_error": report.max_univariate_error,
        "max_bivariate_error": report.max_bivariate_error,
        "min_mass": report.min_mass,
        "pass": ok,
    }
    stream = sys.stdout if args.out else sys.stderr
    if args.verify or args.out:
        for key, val in summary.items():
            print(f"{key}: {val}", file=stream)
    return EXIT_OK if ok else EXIT_MISMATCH


# -- lp -----------------------------------------------------------------------


def _compare_value(name: str, p, k: int):
    if name in closed.UPPER_METHODS:
        return closed.UPPER_METHODS[name](p, k).value
    table = {
        "union_tight": lambda: closed.union_tight(p).value,
        "boole_union": lambda: closed.boole_union(p).value,
        "intersection_tight_lower": lambda: closed.intersection_tight_lower(p).value,
        "frechet_intersection_lower": lambda: closed.frechet_intersection_lower(p).value,
        "identical_tight": lambda: closed.identical_tight(p.n, k, p.probs[0]).value,
        "identical_tight_lower": lambda: closed.identical_tight_lower(p.n, k, p.probs[0]).value,
    }
    if name not in table:
        raise BoundsError(f"compare: unknown method {name!r}")
    return table[name]()


def cmd_lp(cfg: RunConfig) -> int:
    args = cfg.args
    if args.aggregated:
        if args.n is None or args.prob is None or args.k is None:
            raise BoundsError("n/k/prob: --aggregated needs --n, --k and --prob")
        out = lp.solve_aggregated_twise(args.n, args.k, Fraction(args.prob), args.t, args.sense)
        p = identical(args.n, float(Fraction(args.prob)))
        k = args.k
    else:
        p, k, biv = _marginals(args, need_k=not args.feasibility)
        if args.n is not None and args.n != p.n:
            raise BoundsError(f"n: --n {args.n} disagrees with {p.n} marginals")
        if args.feasibility:
            out = lp.check_bivariate_feasibility(p, biv or BivariateSpec.pairwise_independent(p), cap=args.cap)
        else:
            if not 1 <= k <= p.n:
                raise BoundsError(f"k: {k} outside [1, {p.n}]")
            out = lp.solve_exact(p, biv, k, args.sense, cap=args.cap)
    d = cfg.digits
    payload = out.to_dict()
    if cfg.fmt == "json":
        print(json.dumps(payload, indent=2))
    else:
        value = "nan" if payload["value"] is None else _fmt(out.value, d)
        print(f"status: {out.status}")
        print(f"value: {value}")
        print(f"iterations: {out.iterations}")
    if args.out and out.primal is not None:
        Path(args.out).write_text(payload.get("distribution_csv") or json.dumps(payload.get("distribution"), indent=2))
    if out.status != "optimal":
        return EXIT_INFEASIBLE if args.expect_feasible else EXIT_OK
    if args.compare:
        ref = _compare_value(args.compare, p, k)
        diff = abs(out.value - float(ref))
        tol = cfg.tolerance or 1e-6
        print(f"compare {args.compare}: {_fmt(ref, d)}  |diff| {diff:.3e}  tol {tol:.1e}")
        if diff > tol:
            return EXIT_MISMATCH
    return EXIT_OK


# -- table --------------------------------------------------------------------


def cmd_table(cfg: RunConfig) -> int:
    args = cfg.args
    if args.table_id not in tables.TABLE_IDS:
        raise BoundsError(f"table: unknown id {args.table_id!r}; choose from {', '.join(tables.TABLE_IDS)}")
    diff = tables.diff_table(args.table_id, cfg.tolerance)
    d = cfg.digits
    by_row: dict = {}
    for c in diff.cells:
        by_row.setdefault((c.key, c.row), []).append(c)
    if cfg.fmt == "json":
        doc = {
            "table": diff.name,
            "ok": diff.ok,
            "cells": [
                {"row": c.row, "p": c.key or None, "k": c.k, "computed": c.computed, "printed": c.printed, "ok": c.ok}
                for c in diff.cells
            ],
            "marks": [{"row": m.row, "p": m.key or None, "printed": list(m.expected), "computed": list(m.computed)} for m in diff.marks],
        }
        print(json.dumps(doc, indent=2))
    else:
        for (key, row), cells in by_row.items():
            label = f"{row}" + (f" p={key}" if key else "")
            vals = " ".join(_fmt(c.computed, d) + ("*" if not c.ok else " ") for c in cells)
            print(f"{label:<24} {vals}")
        for line in diff.report_lines(d):
            print(line)
    return EXIT_OK if diff.ok else EXIT_MISMATCH


# -- scan ---------------------------------------------------------------------


def _write_csv(header, rows, digits) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{v:.{digits}f}" if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def cmd_scan(cfg: RunConfig) -> int:
    args = cfg.args
    d = cfg.digits
    if args.kind == "ratio":
        extra = [[float(Fraction(t)) for t in e.split(",")] for e in args.extra or []]
        res = applications.ratio_scan(args.n, args.samples, args.seed, args.workers, extra)
        header = [f"p{i + 1}" for i in range(args.n)] + ["boole", "tight", "ratio"]
        rows = [list(map(float, res.marginals[i])) + [float(res.boole[i]), float(res.tight[i]), float(res.ratio[i])]
                for i in range(len(res.ratio))]
        summary = res.summary()
    else:
        if args.k is None:
            raise BoundsError("k: ordered-improvement needs --k")
        res = applications.improvement_scan(args.n, args.k, args.samples, args.seed, args.low, args.high, args.workers)
        header = ["instance"] + res.columns()
        rows = [[i] + [float(v) for v in row] for i, row in enumerate(res.rows())]
        summary = res.summary()
    text = _write_csv(header, rows, d)
    if cfg.fmt == "json":
        _emit(json.dumps({"summary": summary, "columns": header, "rows": rows}, indent=2) + "\n", args.out)
    else:
        _emit(text, args.out)
    summary_text = json.dumps(summary, indent=2, sort_keys=True)
    if args.summary:
        Path(args.summary).write_text(summary_text + "\n")
    print(summary_text, file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def _common(sp, k: bool = True):
    src = sp.add_argument_group("marginals")
    src.add_argument("--p", help="comma-separated marginals; 'a/b' entries switch to exact arithmetic")
    src.add_argument("--p-file", help="problem JSON {p, k, bivariates} or a bundled dataset name (n12.json)")
    src.add_argument("--n", type=int, help="number of identical marginals (with --prob)")
    src.add_argument("--prob", help="identical marginal value, decimal or 'a/b'")
    if k:
        sp.add_argument("--k", type=int, help="threshold k in P(sum >= k)")
    sp.add_argument("--format", choices=("table", "csv", "json"), default="table")
    sp.add_argument("--digits", type=int, default=6, help="decimals in printed probabilities")
    sp.add_argument("--out", help="write the main output to this file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pairbounds", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", help="evaluate closed-form bounds")
    _common(b)
    b.add_argument("--methods", help="comma-separated method names (default: all applicable)")
    b.add_argument("--exact", action="store_true", help="use rational arithmetic")

    e = sub.add_parser("extremal", help="build and verify an extremal distribution")
    e.add_argument("kind", choices=("union", "intersection", "scaled", "complement-scaled", "identical", "almost-identical"))
    _common(e)
    e.add_argument("--q", help="the odd marginal for almost-identical")
    e.add_argument("--scale", help="scale parameter for the scaled constructions")
    e.add_argument("--exact", action="store_true", help="use rational arithmetic")
    e.add_argument("--verify", action="store_true", help="print the moment check")
    e.add_argument("--tolerance", type=float, help="moment error tolerance (default 1e-9)")

    lpp = sub.add_parser("lp", help="solve the full moment LP")
    _common(lpp)
    lpp.add_argument("--sense", choices=("max", "min"), default="max")
    lpp.add_argument("--cap", type=int, default=lp.DEFAULT_CAP, help=f"largest n to solve (absolute limit {lp.HARD_CAP})")
    lpp.add_argument("--compare", help="closed-form method to compare against")
    lpp.add_argument("--tolerance", type=float, help="comparison tolerance (default 1e-6)")
    lpp.add_argument("--expect-feasible", action="store_true", help="exit 5 if the LP is infeasible")
    lpp.add_argument("--feasibility", action="store_true", help="only test whether a joint law exists")
    lpp.add_argument("--aggregated", action="store_true", help="solve the (n+1)-variable identical-marginal LP")
    lpp.add_argument("--t", type=int, default=2, help="independence order for --aggregated")
    lpp.add_argument("--exact", action="store_true", help=argparse.SUPPRESS)

    t = sub.add_parser("table", help="regenerate a published table and diff it")
    t.add_argument("table_id", help="n12 or n11")
    t.add_argument("--tolerance", type=float, help="absolute tolerance (default: half a unit in the last printed place)")
    t.add_argument("--format", choices=("table", "json"), default="table")
    t.add_argument("--digits", type=int, default=6)

    s = sub.add_parser("scan", help="seeded random scans")
    s.add_argument("kind", choices=("ratio", "ordered-improvement"))
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int)
    s.add_argument("--samples", type=int, default=1000)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--low", type=float, default=0.0)
    s.add_argument("--high", type=float, default=1.0)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--extra", action="append", help="extra marginal vector to include (repeatable)")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--digits", type=int, default=6)
    s.add_argument("--out", help="write per-instance rows here")
    s.add_argument("--summary", help="write the summary JSON here")
    return parser


COMMANDS = {
    "bounds": cmd_bounds,
    "extremal": cmd_extremal,
    "lp": cmd_lp,
    "table": cmd_table,
    "scan": cmd_scan,
}


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_args(ns)
        return COMMANDS[cfg.command](cfg)
    except (CaseViolation, CaseUnsupported) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CASE
    except DimensionCap as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (BoundsError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH


if __name__ == "__main__":
    sys.exit(main())
