"""Command-line front end.

Settings come from an optional JSON file (``--config``) and are overridden by
explicit flags. Recognised config keys::

    problem, params, scheme, boundary, alpha, schedule, max_rows, M, N,
    out, formats, verbatim_history, regenerate_B, measure_time, workers,
    stability_report

Exit status: 0 success, 1 invalid input, 2 numerical failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import io as fio
from .analysis import SCHEDULES, ConvergenceTable, history_errors, named_schedule, sweep
from .golden import compare, load_golden, tiered
from .l1 import l1_weights
from .model import PROBLEMS, check_alpha, make_problem
from .numerics import SingularMatrixError
from .solver import BOUNDARY_MODES, SCHEMES, Mesh, NumericalFailure, solve_problem
from .stability import check_stability
from .weights import weight_matrices

log = logging.getLogger("fracdqm")

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    problem: Optional[str] = None
    params: dict = field(default_factory=dict)
    scheme: Optional[str] = None
    boundary: Optional[str] = None
    alpha: list = field(default_factory=lambda: [0.5])
    schedule: object = None  # name or list of (M, N)
    max_rows: Optional[int] = None
    M: int = 20
    N: int = 100
    out: str = "out"
    formats: list = field(default_factory=lambda: ["csv", "json"])
    verbatim_history: bool = False
    regenerate_B: bool = False
    measure_time: str = "final"
    workers: int = 1
    stability_report: bool = False

    def validate(self) -> "RunConfig":
        self.alpha = [check_alpha(a) for a in self.alpha]
        if self.problem is not None and self.problem not in PROBLEMS:
            raise ConfigError(f"unknown problem {self.problem!r}; choose from {sorted(PROBLEMS)}")
        if self.scheme is not None and self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.boundary is not None and self.boundary not in BOUNDARY_MODES:
            raise ConfigError(f"unknown boundary mode {self.boundary!r}")
        if self.measure_time not in ("final", "max"):
            raise ConfigError(f"measure_time must be 'final' or 'max', got {self.measure_time!r}")
        bad = set(self.formats) - {"csv", "json"}
        if bad:
            raise ConfigError(f"unknown output formats {sorted(bad)}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        return self


def _parse_alpha(text: str) -> list[float]:
    try:
        return [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad alpha list {text!r}") from None


def _parse_schedule(text: str):
    if text in SCHEDULES:
        return text
    pairs = []
    for item in text.split(","):
        try:
            M, N = item.lower().split("x")
            pairs.append((int(M), int(N)))
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"schedule must be one of {sorted(SCHEDULES)} or pairs like 10x10,20x100; got {text!r}"
            ) from None
    return pairs


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("run configuration")
    g.add_argument("--config", type=Path, help="JSON config file; flags override its values")
    g.add_argument("--problem", choices=sorted(PROBLEMS))
    g.add_argument("--alpha", type=_parse_alpha, help="comma-separated fractional orders")
    g.add_argument("--scheme", choices=SCHEMES)
    g.add_argument("--boundary", choices=BOUNDARY_MODES)
    g.add_argument("--out", help="output directory (default: out)")
    g.add_argument("--formats", type=lambda s: s.split(","), help="csv,json")
    g.add_argument("--verbatim-history", action="store_const", const=True, dest="verbatim_history")
    g.add_argument("--regenerate-B", action="store_const", const=True, dest="regenerate_B")
    g.add_argument("--measure-time", choices=("final", "max"), dest="measure_time")
    g.add_argument("--workers", type=int)
    g.add_argument("-v", "--verbose", action="store_true")


def _mesh_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--M", type=int, help="space intervals")
    p.add_argument("--N", type=int, help="time steps")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracdqm", description="Time-fractional Black-Scholes solver (L1 in time, B-spline DQM in space)"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one problem and print an error summary")
    _common(p)
    _mesh_args(p)
    p.add_argument("--history", action="store_true", help="also write every time level as CSV")

    p = sub.add_parser("convergence", help="run a refinement sweep")
    _common(p)
    p.add_argument("--schedule", type=_parse_schedule, help=f"{', '.join(sorted(SCHEDULES))} or MxN,MxN,...")
    p.add_argument("--max-rows", type=int, dest="max_rows")
    p.add_argument("--stability-report", action="store_const", const=True, dest="stability_report")
    p.add_argument("--axis", choices=("spatial", "temporal"), help="needed for explicit schedules")

    p = sub.add_parser("stability", help="max-norm stability diagnostics")
    _common(p)
    _mesh_args(p)

    p = sub.add_parser("weights", help="DQM weight matrices")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--dump", action="store_true", help="write X.csv and Y.csv")
    p.add_argument("--regenerate-B", action="store_true", dest="regenerate_B")
    p.add_argument("--out", default="out")
    p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("compare-golden", help="compare a sweep with a shipped reference table")
    _common(p)
    p.add_argument("--table", choices=sorted(SCHEDULES), help="reference table (default: taken from --from)")
    p.add_argument("--from", type=Path, dest="from_json", help="results.json written by 'convergence'")
    p.add_argument("--max-rows", type=int, dest="max_rows")

    p = sub.add_parser("plot-data", help="write curve and surface CSVs for plotting")
    _common(p)
    _mesh_args(p)
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None) is not None:
        raw = fio.read_json(args.config)
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(raw) - set(RunConfig.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        for k, v in raw.items():
            setattr(cfg, k, v)
        if isinstance(cfg.alpha, (int, float)):
            cfg.alpha = [cfg.alpha]
        if isinstance(cfg.schedule, list):
            cfg.schedule = [tuple(pair) for pair in cfg.schedule]
    for k in RunConfig.__dataclass_fields__:
        v = getattr(args, k, None)
        if v is not None:
            setattr(cfg, k, v)
    return cfg.validate()


def _solver_opts(cfg: RunConfig) -> dict:
    return dict(verbatim_history=cfg.verbatim_history, regenerate_B=cfg.regenerate_B)


def _stem(alpha: float) -> str:
    return f"alpha{alpha:g}"


def cmd_solve(cfg: RunConfig, args) -> int:
    out = Path(cfg.out)
    problem = cfg.problem or "example1"
    summaries = []
    for alpha in cfg.alpha:
        p = make_problem(problem, alpha, **cfg.params)
        hist = solve_problem(p, cfg.M, cfg.N, scheme=cfg.scheme or "dqm", boundary=cfg.boundary or "dirichlet",
                             **_solver_opts(cfg))
        summary = {
            "problem": p.name,
            "alpha": alpha,
            "M": cfg.M,
            "N": cfg.N,
            "scheme": hist.scheme,
            "boundary": hist.boundary,
            "max_residual": hist.max_residual,
            "stability_condition": hist.meta["stability_condition"],
            "final_min": float(hist.final.min()),
            "final_max": float(hist.final.max()),
        }
        if p.exact is not None:
            rep = history_errors(hist, p, cfg.measure_time)
            summary.update(l2=rep.l2_unweighted, l2h=rep.l2, linf=rep.linf, measure_time=cfg.measure_time)
        summaries.append(summary)
        if "json" in cfg.formats:
            fio.write_json(out / f"solve_{_stem(alpha)}.json", summary)
        if args.history and "csv" in cfg.formats:
            fio.write_history(out / f"history_{_stem(alpha)}.csv", hist)
    print(json.dumps(fio.jsonable(summaries if len(summaries) > 1 else summaries[0]), indent=2, sort_keys=True))
    return EXIT_OK


@dataclass
class _Resolved:
    name: Optional[str]
    pairs: list
    axis: str
    problem: str
    scheme: str
    boundary: str


def _resolve_schedule(cfg: RunConfig, axis: Optional[str] = None) -> _Resolved:
    sched = cfg.schedule if cfg.schedule is not None else "table2"
    if isinstance(sched, str):
        try:
            ns = named_schedule(sched, cfg.max_rows)
        except KeyError as exc:
            raise ConfigError(str(exc)) from None
        if cfg.problem is not None and cfg.problem != ns.problem:
            raise ConfigError(f"schedule {sched!r} belongs to {ns.problem!r}, not {cfg.problem!r}")
        return _Resolved(sched, list(ns.pairs), axis or ns.axis, ns.problem, cfg.scheme or ns.scheme,
                         cfg.boundary or ns.reference_boundary)
    pairs = [tuple(int(v) for v in pair) for pair in sched][: cfg.max_rows]
    return _Resolved(None, pairs, axis or "spatial", cfg.problem or "example1", cfg.scheme or "dqm",
                     cfg.boundary or "dirichlet")


def run_sweeps(cfg: RunConfig, res: _Resolved) -> list[ConvergenceTable]:
    return [
        sweep(res.problem, a, res.pairs, axis=res.axis, scheme=res.scheme, boundary=res.boundary,
              measure=cfg.measure_time, problem_params=cfg.params, workers=cfg.workers, **_solver_opts(cfg))
        for a in cfg.alpha
    ]


def _print_tables(tables: list[ConvergenceTable]) -> None:
    for t in tables:
        print(f"# {t.problem} alpha={t.alpha:g} scheme={t.scheme} boundary={t.boundary} axis={t.axis}")
        print(f"{'M':>5} {'N':>6} {'L2':>12} {'OC':>7} {'Linf':>12} {'OC':>7}")
        for r in t.rows:
            if r.failed:
                print(f"{r.M:>5} {r.N:>6}  failed: {r.failed}")
                continue
            oc2 = "" if r.oc_l2_unweighted is None else f"{r.oc_l2_unweighted:.3f}"
            oci = "" if r.oc_linf is None else f"{r.oc_linf:.3f}"
            print(f"{r.M:>5} {r.N:>6} {r.l2_unweighted:>12.4e} {oc2:>7} {r.linf:>12.4e} {oci:>7}")


def _stability_rows(cfg: RunConfig, problem: str, pairs, alphas) -> list[dict]:
    reports = []
    for alpha in alphas:
        p = make_problem(problem, alpha, **cfg.params)
        for M, N in pairs:
            mesh = Mesh.for_problem(p, M, N)
            lw = l1_weights(p.alpha, N, mesh.dt)
            reports.append(check_stability(p, mesh, weight_matrices(M, cfg.regenerate_B), lw.d).to_dict())
    return reports


def cmd_convergence(cfg: RunConfig, args) -> int:
    res = _resolve_schedule(cfg, getattr(args, "axis", None))
    tables = run_sweeps(cfg, res)
    out = Path(cfg.out)
    stem = res.name or "custom"
    if "csv" in cfg.formats:
        fio.write_tables(out / f"{stem}.csv", tables)
    payload = {
        "schedule": res.name,
        "pairs": res.pairs,
        "axis": res.axis,
        "problem": res.problem,
        "scheme": res.scheme,
        "boundary": res.boundary,
        "measure_time": cfg.measure_time,
        "params": cfg.params,
        "tables": [t.to_dict() for t in tables],
    }
    if cfg.stability_report:
        payload["stability"] = _stability_rows(cfg, res.problem, res.pairs, cfg.alpha) if res.scheme == "dqm" else []
    if "json" in cfg.formats:
        fio.write_json(out / f"{stem}_results.json", payload)
    _print_tables(tables)
    return EXIT_NUMERICAL if any(r.failed for t in tables for r in t.rows) else EXIT_OK


def cmd_stability(cfg: RunConfig, args) -> int:
    reports = _stability_rows(cfg, cfg.problem or "example1", [(cfg.M, cfg.N)], cfg.alpha)
    if "json" in cfg.formats:
        fio.write_json(Path(cfg.out) / f"stability_M{cfg.M}_N{cfg.N}.json", {"reports": reports})
    for r in reports:
        bound = "n/a" if r["theoretical_bound"] is None else f"{r['theoretical_bound']:.5e}"
        emp = "n/a" if r["empirical_inverse_norm"] is None else f"{r['empirical_inverse_norm']:.5e}"
        print(
            f"alpha={r['alpha']:g} M={r['M']} N={r['N']} d*||P||={r['d'] * r['P_norm']:.5e} "
            f"1+cd={r['threshold']:.5e} condition_ok={r['condition_ok']} bound={bound} ||L^-1||={emp}"
        )
    return EXIT_OK


def cmd_weights(args) -> int:
    w = weight_matrices(args.M, regenerate_B=args.regenerate_B)
    print(f"M={args.M} max|row sum X|={np.abs(w.X.sum(axis=1)).max():.5e} "
          f"max|row sum Y|={np.abs(w.Y.sum(axis=1)).max():.5e}")
    if args.dump:
        out = Path(args.out)
        fio.write_matrix(out / "X.csv", w.X)
        fio.write_matrix(out / "Y.csv", w.Y)
        print(f"wrote {out / 'X.csv'} and {out / 'Y.csv'}")
    return EXIT_OK


def _tables_from_json(path: Path) -> tuple[Optional[str], list[ConvergenceTable]]:
    raw = fio.read_json(path)
    try:
        return raw.get("schedule"), [ConvergenceTable.from_dict(t) for t in raw["tables"]]
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{path} is not a results file written by 'convergence': {exc}") from None


def golden_report(name: str, tables: list[ConvergenceTable]):
    verdicts = compare(load_golden(name), {t.alpha: t for t in tables})
    return verdicts, tiered(verdicts)


def cmd_compare(cfg: RunConfig, args) -> int:
    if args.from_json is not None:
        sched_name, tables = _tables_from_json(args.from_json)
        name = args.table or sched_name
        if name is None:
            raise ConfigError("results file has no named schedule; pass --table")
    else:
        name = args.table or (cfg.schedule if isinstance(cfg.schedule, str) else None)
        if name is None:
            raise ConfigError("pass --table or --from")
        cfg.schedule = name
        if args.config is None and args.alpha is None:
            cfg.alpha = sorted({c.alpha for c in load_golden(name)})
        tables = run_sweeps(cfg, _resolve_schedule(cfg))
    verdicts, columns = golden_report(name, tables)
    out = Path(cfg.out)
    header = ("table", "alpha", "row", "M", "N", "norm", "kind", "expected", "computed", "deviation", "tolerance",
              "passed", "note")
    rows = [tuple(getattr(v, h) for h in header) for v in verdicts]
    if "csv" in cfg.formats:
        fio.write_rows(out / f"{name}_golden.csv", header, rows)
    if "json" in cfg.formats:
        fio.write_json(
            out / f"{name}_golden.json",
            {
                "table": name,
                "cells": [dict(zip(header, r)) for r in rows],
                "columns": [dict(alpha=c.alpha, norm=c.norm, tier=c.tier) for c in columns],
            },
        )
    for c in columns:
        print(f"{name} alpha={c.alpha:g} {c.norm:<4} {c.tier.upper() if c.tier == 'fail' else c.tier}")
    n_pass = sum(v.passed for v in verdicts)
    print(f"{n_pass}/{len(verdicts)} cells within tolerance")
    return EXIT_OK


def cmd_plot_data(cfg: RunConfig, args) -> int:
    out = Path(cfg.out)
    problem = cfg.problem or "example1"
    for alpha in cfg.alpha:
        p = make_problem(problem, alpha, **cfg.params)
        hist = solve_problem(p, cfg.M, cfg.N, scheme=cfg.scheme or "dqm", boundary=cfg.boundary or "dirichlet",
                             **_solver_opts(cfg))
        tag = f"{p.name}_{_stem(alpha)}_M{cfg.M}_N{cfg.N}"
        a = fio.write_curve(out / f"curve_{tag}.csv", hist, p)
        b = fio.write_surface(out / f"surface_{tag}.csv", hist, p)
        print(f"wrote {a} and {b}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "weights":
            return cmd_weights(args)
        cfg = load_config(args)
        handler = {
            "solve": cmd_solve,
            "convergence": cmd_convergence,
            "stability": cmd_stability,
            "compare-golden": cmd_compare,
            "plot-data": cmd_plot_data,
        }[args.command]
        return handler(cfg, args)
    except (NumericalFailure, SingularMatrixError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError, TypeError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
