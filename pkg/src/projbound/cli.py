"""``projbound`` command-line front end.

Exit status: 0 on success, 1 when an identity or bound check fails, 2 for
usage and input errors.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .bounds import DEFAULT_GRID, FORMULA_NOTES, SANDWICH_RTOL, BoundRecord, evaluate_all
from .experiments import (
    DEFAULT_EPSILON_GRID,
    EnsembleSpec,
    SvProfile,
    SweepReport,
    equal_rank_ensemble,
    example_41_sweep,
    example_42_sweep,
    intro_examples,
    mixed_ensemble,
    tightness_benchmark,
)
from .identities import DeviationPair, all_identities, deviation_exact
from .linalg import DimensionError, TolerancePolicy, make_pair
from .report import (
    SCHEMA_VERSION,
    MatrixParseError,
    Series,
    json_text,
    line_chart_svg,
    parse_grid,
    read_matrix,
    write_csv,
    write_json,
    write_text,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
FORMATS = ("csv", "json", "svg")

IDENTITY_HEADER = ["identity_id", "applicable", "lhs", "rhs", "abs_residual", "max_residual", "tolerance", "status"]
BOUND_HEADER = [
    "key", "bound_id", "kind", "target", "params", "w_primal", "w_dual", "applicable",
    "value", "exact", "slack", "rel_gap", "status", "reason",
]
SWEEP_HEADER = ["scenario", "label", "epsilon", "primal", "dual"] + BOUND_HEADER
TABLE12_HEADER = [
    "epsilon", "primal", "CHEN_UP", "ref_chen", "LI_UP", "ref_li",
    "NEW_UP1", "NEW_UP2", "NEW_LOW1", "NEW_LOW2",
]
TABLE34_HEADER = [
    "epsilon", "primal", "dual", "C1", "ref_C1", "C2", "ref_C2", "L1",
    "CHEN_COMB1", "ref_chen_comb1", "CORUP_1_1", "LI_COMB1", "ref_li_comb1", "CORUP_1_2",
    "CORLOW_1_1", "CORLOW_1_2",
]
BENCH_HEADER = ["key", "kind", "applicable", "mean_gap", "median_gap", "max_gap"]
REFERENCE_RTOL = 1e-10

# (file stem, source table, title, plotted columns) for the reproduced figures.
FIGURES = (
    ("fig1_left", "tables12", "Upper bounds on the primal deviation", ("CHEN_UP", "NEW_UP1")),
    ("fig1_right", "tables12", "Upper bounds on the primal deviation", ("LI_UP", "NEW_UP2")),
    ("fig2_left", "tables34", "Combined upper bounds on C1", ("CHEN_COMB1", "CORUP_1_1")),
    ("fig2_right", "tables34", "Combined upper bounds on C2", ("LI_COMB1", "CORUP_1_2")),
)


class UsageError(Exception):
    """Bad flags or unreadable input; maps to exit status 2."""


def _timestamp() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


# -- argument handling -------------------------------------------------------

def _formats(text: str) -> tuple[str, ...]:
    fmts = tuple(f.strip().lower() for f in text.split(",") if f.strip())
    bad = [f for f in fmts if f not in FORMATS]
    if not fmts or bad:
        raise argparse.ArgumentTypeError(f"formats must be a non-empty subset of {','.join(FORMATS)}")
    return fmts


def _grid(text: str) -> list[float]:
    try:
        return parse_grid(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _nonneg(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v >= 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="projbound",
        description="Exact projector deviations and perturbation bounds for a matrix pair.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=Path("."), help="output directory (default: .)")
    common.add_argument("--format", type=_formats, default=None,
                        help="comma list from csv,json,svg (default depends on command)")
    common.add_argument("--tol", type=_nonneg, default=None,
                        help="relative numerical-rank tolerance (default max(m,n)*eps)")
    common.add_argument("--rtol", type=_nonneg, default=SANDWICH_RTOL,
                        help=f"identity/sandwich tolerance relative to max(1, exact) (default {SANDWICH_RTOL:g})")
    common.add_argument("--force-general-rank", action="store_true",
                        help="treat equal-rank formulas as not applicable")
    common.add_argument("--quiet", "-q", action="store_true", help="suppress the stdout summary")

    pair_args = argparse.ArgumentParser(add_help=False)
    pair_args.add_argument("--a", required=True, type=Path, help="matrix file for A")
    pair_args.add_argument("--b", required=True, type=Path, help="matrix file for B")

    sp = sub.add_parser("verify", parents=[common, pair_args], help="check the exact deviation identities")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("bounds", parents=[common, pair_args], help="evaluate every bound on a pair")
    sp.add_argument("--grid", type=_grid, default=list(DEFAULT_GRID),
                    help="parameter grid for the combined families (default 0:1:5)")
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("sweep", parents=[common], help="evaluate bounds along a worked-example epsilon sweep")
    sp.add_argument("--scenario", choices=("example-4.1", "example-4.2", "intro"), default="example-4.1")
    sp.add_argument("--grid", type=_grid, default=None, help="epsilon grid (default 0.11:0.99:90)")
    sp.add_argument("--param-grid", type=_grid, default=None,
                    help="parameter grid for the combined families (default: corollary points only)")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("reproduce", parents=[common], help="write the example tables and figures")
    sp.add_argument("--grid", type=_grid, default=None, help="epsilon grid (default 0.11:0.99:90)")
    sp.set_defaults(func=cmd_reproduce)

    sp = sub.add_parser("bench", parents=[common], help="tightness benchmark over random pairs")
    sp.add_argument("--seed", type=_seed, default=0)
    sp.add_argument("--samples", type=int, default=100)
    sp.add_argument("--ensemble", choices=("mixed", "equal-rank", "custom"), default="mixed")
    sp.add_argument("--m", type=int, default=6)
    sp.add_argument("--n", type=int, default=4)
    sp.add_argument("--rank-a", type=int, default=2)
    sp.add_argument("--rank-b", type=int, default=2)
    sp.add_argument("--profile", default="uniform", help="uniform | geometric:<ratio> | explicit:<v1,...>")
    sp.add_argument("--perturb-scale", type=_nonneg, default=None,
                    help="build B = A + scale*G (default: draw B independently)")
    sp.add_argument("--grid", type=_grid, default=None,
                    help="parameter grid for the combined families (default: corollary points only)")
    sp.add_argument("--workers", type=int, default=1, help="worker processes (output is identical)")
    sp.set_defaults(func=cmd_bench)
    return p


def _policy(args) -> TolerancePolicy:
    return TolerancePolicy(rtol=args.tol)


def _out_dir(args) -> Path:
    out = args.out
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {out}: {exc.strerror or exc}") from None
    return out


def _fmts(args, default: tuple[str, ...]) -> tuple[str, ...]:
    return args.format if args.format is not None else default


def _config(args, **extra) -> dict:
    cfg = {
        "command": args.command,
        "rank_rtol": args.tol,
        "rtol": args.rtol,
        "force_general_rank": args.force_general_rank,
        "formula_notes": dict(FORMULA_NOTES),
    }
    cfg.update(extra)
    return cfg


def _say(args, text: str) -> None:
    if not args.quiet:
        print(text)


def _load_pair(args):
    try:
        a = read_matrix(args.a)
        b = read_matrix(args.b)
        return make_pair(a, b, _policy(args))
    except (MatrixParseError, DimensionError) as exc:
        raise UsageError(str(exc)) from None


# -- record rows -------------------------------------------------------------

def _status(rec: BoundRecord, dev: DeviationPair, rtol: float) -> str:
    if not rec.applicable:
        return "n/a"
    return "ok" if rec.satisfied(dev, rtol) else "VIOLATION"


def record_row(rec: BoundRecord, dev: DeviationPair, rtol: float) -> list:
    params = ";".join(f"{k}={v:g}" for k, v in rec.params)
    wp, wd = rec.combined_weights if rec.combined_weights else (1.0, 0.0)
    if rec.applicable:
        exact = rec.exact_target(dev)
        slack = rec.slack(dev)
        gap = abs(rec.value - exact) / max(1.0, abs(exact))
    else:
        exact = slack = gap = float("nan")
    return [
        rec.key, rec.bound_id, rec.kind.value, rec.target.value, params, wp, wd, rec.applicable,
        rec.value, exact, slack, gap, _status(rec, dev, rtol), rec.inapplicability_reason or "",
    ]


def _record_dict(rec: BoundRecord, dev: DeviationPair, rtol: float) -> dict:
    return dict(zip(BOUND_HEADER, record_row(rec, dev, rtol)))


# -- commands ----------------------------------------------------------------

def cmd_verify(args) -> int:
    pair = _load_pair(args)
    reports = all_identities(pair)
    rows = []
    failed = []
    for rep in reports:
        tol = args.rtol * max(1.0, abs(rep.lhs))
        ok = rep.within(args.rtol)
        status = "ok" if rep.applicable and ok else ("n/a" if not rep.applicable else "VIOLATION")
        if not ok:
            failed.append(rep.identity_id.value)
        rows.append([rep.identity_id.value, rep.applicable, rep.lhs, rep.rhs,
                     rep.abs_residual, rep.max_residual, tol, status])
    out = _out_dir(args)
    fmts = _fmts(args, ("csv",))
    dev = deviation_exact(pair)
    if "csv" in fmts:
        write_csv(out / "identities.csv", IDENTITY_HEADER, rows)
    if "json" in fmts:
        write_json(out / "identities.json", {
            "schema_version": SCHEMA_VERSION,
            "config": _config(args, a=str(args.a), b=str(args.b)),
            "rows": [dict(zip(IDENTITY_HEADER, r)) for r in rows],
            "aggregates": {"primal": dev.primal, "dual": dev.dual, "failed": failed},
            "metadata": {"timestamp": _timestamp()},
        })
    for r in rows:
        _say(args, f"{r[0]:<16} {r[-1]:<10} residual={r[5]:.3e}")
    if failed:
        print(f"identity check failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_bounds(args) -> int:
    for v in args.grid:
        if not 0.0 <= v <= 1.0:
            raise UsageError(f"parameter grid values must lie in [0, 1], got {v}")
    pair = _load_pair(args)
    dev = deviation_exact(pair)
    records = evaluate_all(pair, args.grid, args.force_general_rank)
    rows = [record_row(r, dev, args.rtol) for r in records]
    out = _out_dir(args)
    fmts = _fmts(args, ("csv",))
    if "csv" in fmts:
        write_csv(out / "bounds.csv", BOUND_HEADER, rows)
    violations = [r[0] for r in rows if r[12] == "VIOLATION"]
    if "json" in fmts:
        write_json(out / "bounds.json", {
            "schema_version": SCHEMA_VERSION,
            "config": _config(args, a=str(args.a), b=str(args.b), grid=args.grid),
            "rows": [dict(zip(BOUND_HEADER, r)) for r in rows],
            "aggregates": {"primal": dev.primal, "dual": dev.dual,
                           "rank_a": pair.rank_a, "rank_b": pair.rank_b, "violations": violations},
            "metadata": {"timestamp": _timestamp()},
        })
    _say(args, f"primal={dev.primal:.17g} dual={dev.dual:.17g} ranks=({pair.rank_a},{pair.rank_b})")
    for r in rows:
        if "[" not in r[0]:
            _say(args, f"{r[0]:<18} {r[2]:<6} {r[8]:>24.17g} {r[12]}")
    if violations:
        print(f"sandwich violated by: {', '.join(violations)}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _sweep_report(scenario: str, grid, param_grid, force_general_rank: bool = False) -> SweepReport:
    try:
        if scenario == "example-4.1":
            return example_41_sweep(grid or DEFAULT_EPSILON_GRID, param_grid, force_general_rank)
        if scenario == "example-4.2":
            return example_42_sweep(grid or DEFAULT_EPSILON_GRID, param_grid, force_general_rank)
        return intro_examples(grid) if grid else intro_examples()
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_sweep(args) -> int:
    if args.param_grid is not None and any(not 0 <= v <= 1 for v in args.param_grid):
        raise UsageError("parameter grid values must lie in [0, 1]")
    try:
        report = _sweep_report(args.scenario, args.grid, args.param_grid, args.force_general_rank)
    except AssertionError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FAIL
    rows, violations = [], []
    for row in report.rows:
        for rec in row.records:
            r = record_row(rec, row.deviation, args.rtol)
            if r[12] == "VIOLATION":
                violations.append(f"{row.label}:{rec.key}")
            rows.append([report.scenario_id, row.label, row.epsilon, row.deviation.primal, row.deviation.dual] + r)
    out = _out_dir(args)
    fmts = _fmts(args, ("csv",))
    stem = f"sweep_{report.scenario_id}"
    if "csv" in fmts:
        write_csv(out / f"{stem}.csv", SWEEP_HEADER, rows)
    if "json" in fmts:
        write_json(out / f"{stem}.json", _sweep_json(report, args, violations))
    _say(args, f"{report.scenario_id}: {len(report.rows)} rows, {len(violations)} violations")
    if violations:
        print(f"sandwich violated by: {', '.join(violations[:10])}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _sweep_json(report: SweepReport, args, violations) -> dict:
    meta = dict(report.metadata)
    ts = meta.pop("timestamp", _timestamp())
    return {
        "schema_version": SCHEMA_VERSION,
        "config": _config(args, scenario=report.scenario_id, epsilon_grid=report.epsilon_grid, scenario_metadata=meta),
        "rows": [
            {
                "label": row.label,
                "epsilon": row.epsilon,
                "primal": row.deviation.primal,
                "dual": row.deviation.dual,
                "reference": row.reference,
                "records": [_record_dict(r, row.deviation, args.rtol) for r in row.records],
            }
            for row in report.rows
        ],
        "aggregates": {"violations": violations},
        "metadata": {"timestamp": ts},
    }


def reproduce_tables(grid: Sequence[float]) -> tuple[list[list[float]], list[list[float]]]:
    """Wide rows for the single-deviation and combined example tables."""
    t12, t34 = [], []
    for row in example_41_sweep(grid).rows:
        t12.append([row.epsilon, row.deviation.primal]
                   + [row.value(k) if not k.startswith("ref_") else row.reference[k] for k in TABLE12_HEADER[2:]])
    for row in example_42_sweep(grid).rows:
        vals = [row.epsilon, row.deviation.primal, row.deviation.dual]
        for k in TABLE34_HEADER[3:]:
            vals.append(row.reference[k] if k in row.reference else row.value(k))
        t34.append(vals)
    return t12, t34


# (computed column, reference column) pairs that must agree.
_TABLE_CHECKS = {
    "tables12": (("CHEN_UP", "ref_chen"), ("LI_UP", "ref_li"), ("NEW_UP1", "primal"), ("NEW_UP2", "primal"),
                 ("NEW_LOW1", "primal"), ("NEW_LOW2", "primal")),
    "tables34": (("C1", "ref_C1"), ("C2", "ref_C2"), ("CHEN_COMB1", "ref_chen_comb1"),
                 ("LI_COMB1", "ref_li_comb1"), ("CORUP_1_1", "C1"), ("CORUP_1_2", "C2"),
                 ("CORLOW_1_1", "L1"), ("CORLOW_1_2", "C2")),
}


def table_mismatches(name: str, header: Sequence[str], rows, rtol: float = REFERENCE_RTOL) -> list[str]:
    idx = {h: i for i, h in enumerate(header)}
    bad = []
    for row in rows:
        for got, want in _TABLE_CHECKS[name]:
            g, w = row[idx[got]], row[idx[want]]
            if not abs(g - w) <= rtol * max(1.0, abs(w)):
                bad.append(f"eps={row[0]:.6g}:{got}")
    return bad


def cmd_reproduce(args) -> int:
    grid = args.grid or list(DEFAULT_EPSILON_GRID)
    try:
        t12, t34 = reproduce_tables(grid)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    tables = {"tables12": (TABLE12_HEADER, t12), "tables34": (TABLE34_HEADER, t34)}
    out = _out_dir(args)
    fmts = _fmts(args, ("csv", "svg"))
    if "csv" in fmts:
        write_csv(out / "tables1-2.csv", TABLE12_HEADER, t12)
        write_csv(out / "tables3-4.csv", TABLE34_HEADER, t34)
    if "svg" in fmts:
        for stem, table, title, keys in FIGURES:
            header, rows = tables[table]
            xs = [r[0] for r in rows]
            series = [Series(k, xs, [r[header.index(k)] for r in rows]) for k in keys]
            write_text(out / f"{stem}.svg", line_chart_svg(series, title, "epsilon", "bound value", log_y=True))
    mismatches = table_mismatches("tables12", *tables["tables12"]) + table_mismatches("tables34", *tables["tables34"])
    if "json" in fmts:
        write_json(out / "reproduce.json", {
            "schema_version": SCHEMA_VERSION,
            "config": _config(args, epsilon_grid=grid),
            "rows": {name: [dict(zip(h, r)) for r in rows] for name, (h, rows) in tables.items()},
            "aggregates": {"reference_rtol": REFERENCE_RTOL, "mismatches": mismatches},
            "metadata": {"timestamp": _timestamp()},
        })
    _say(args, f"wrote {len(t12)} + {len(t34)} table rows to {out}")
    if mismatches:
        print(f"reference mismatch: {', '.join(mismatches[:10])}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _bench_specs(args):
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    if args.ensemble == "mixed":
        return mixed_ensemble(args.samples, args.seed)
    if args.ensemble == "equal-rank":
        return equal_rank_ensemble(args.samples, args.seed)
    try:
        spec = EnsembleSpec(args.m, args.n, args.rank_a, args.rank_b, SvProfile.parse(args.profile),
                            args.perturb_scale, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return spec


def bench_payload(args) -> tuple[list[list], dict]:
    """CSV rows and the JSON payload (timestamp under ``metadata``)."""
    specs = _bench_specs(args)
    if args.grid is not None and any(not 0 <= v <= 1 for v in args.grid):
        raise UsageError("parameter grid values must lie in [0, 1]")
    kw = dict(grid=args.grid, workers=args.workers, tol_policy=_policy(args),
              force_general_rank=args.force_general_rank)
    try:
        if isinstance(specs, EnsembleSpec):
            res = tightness_benchmark(specs, args.samples, **kw)
        else:
            res = tightness_benchmark(specs, **kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = [[k, res.kinds[k], s["applicable"], s["mean_gap"], s["median_gap"], s["max_gap"]]
            for k, s in res.stats.items()]
    spec = {"m": args.m, "n": args.n, "rank_a": args.rank_a, "rank_b": args.rank_b,
            "profile": args.profile, "perturb_scale": args.perturb_scale}
    payload = {
        "schema_version": SCHEMA_VERSION,
        "config": _config(args, seed=args.seed, samples=args.samples, ensemble=args.ensemble,
                          grid=args.grid, spec=spec if args.ensemble == "custom" else None,
                          sandwich_rtol=SANDWICH_RTOL),
        "rows": [dict(zip(BENCH_HEADER, r)) for r in rows],
        "aggregates": {
            "n_samples": res.n_samples,
            "violations": res.violations,
            "violation_keys": res.violation_keys,
            "win_rate": res.win_rate,
            "ties": res.ties,
        },
        "metadata": {"timestamp": _timestamp()},
    }
    return rows, payload


def cmd_bench(args) -> int:
    rows, payload = bench_payload(args)
    out = _out_dir(args)
    fmts = _fmts(args, ("csv", "json"))
    if "csv" in fmts:
        write_csv(out / "bench.csv", BENCH_HEADER, rows)
    if "json" in fmts:
        write_text(out / "bench.json", json_text(payload))
    n_viol = payload["aggregates"]["violations"]
    _say(args, f"{payload['aggregates']['n_samples']} samples, {len(rows)} records, {n_viol} violations")
    if n_viol:
        print(f"sandwich violations: {n_viol}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"projbound {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"projbound {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
