"""Error norms, observed orders and refinement sweeps."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .model import ProblemSpec, make_problem
from .numerics import SingularMatrixError
from .solver import NumericalFailure, SolutionHistory, solve_problem

ProblemLike = Union[str, Callable[[float], ProblemSpec]]

AXES = ("spatial", "temporal")
MEASURES = ("final", "max")


@dataclass(frozen=True)
class ErrorReport:
    """Discrete errors at one mesh.

    ``l2`` is ``sqrt(h * sum_j e_j^2)``; ``l2_unweighted`` drops the ``h``
    factor, which is the convention of the reference tables.
    """

    l2: float
    l2_unweighted: float
    linf: float
    h: float
    M: Optional[int] = None
    N: Optional[int] = None
    alpha: Optional[float] = None
    scheme: Optional[str] = None

    def norm(self, name: str) -> float:
        return {"L2": self.l2_unweighted, "L2h": self.l2, "Linf": self.linf}[name]


def error_norms(numerical, exact, h: float, **meta) -> ErrorReport:
    u = np.asarray(numerical, dtype=float)
    v = np.asarray(exact, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.shape} vs {v.shape}")
    e = np.abs(u - v)
    linf = float(e.max()) if e.size else 0.0
    # scale by the max-norm so tiny or huge errors neither underflow nor overflow
    if not math.isfinite(linf):
        root = linf
    elif linf > 0:
        root = linf * math.sqrt(float(np.sum((e / linf) ** 2)))
    else:
        root = 0.0
    return ErrorReport(l2=math.sqrt(h) * root, l2_unweighted=root, linf=linf, h=h, **meta)


def history_errors(hist: SolutionHistory, p: ProblemSpec, measure: str = "final") -> ErrorReport:
    """Errors against ``p.exact`` at ``eta = T`` or, with ``measure='max'``, the worst level."""
    if p.exact is None:
        raise ValueError(f"problem {p.name!r} has no exact solution")
    if measure not in MEASURES:
        raise ValueError(f"unknown measure {measure!r}")
    mesh = hist.mesh
    s = mesh.nodes
    meta = dict(M=mesh.M, N=mesh.N, alpha=hist.alpha, scheme=hist.scheme)
    if measure == "final":
        return error_norms(hist.final, p.exact(s, mesh.T), mesh.h, **meta)
    reports = [error_norms(hist[k], p.exact(s, eta), mesh.h) for k, eta in enumerate(mesh.etas)]
    return ErrorReport(
        l2=max(r.l2 for r in reports),
        l2_unweighted=max(r.l2_unweighted for r in reports),
        linf=max(r.linf for r in reports),
        h=mesh.h,
        **meta,
    )


def order(e_coarse: float, e_fine: float, step_coarse: float, step_fine: float) -> float:
    """Observed order ``log(E1/E2) / log(k1/k2)``."""
    if min(e_coarse, e_fine, step_coarse, step_fine) <= 0:
        raise ValueError("errors and step sizes must be positive")
    if step_coarse == step_fine:
        raise ValueError("step sizes must differ")
    return math.log(e_coarse / e_fine) / math.log(step_coarse / step_fine)


@dataclass
class TableRow:
    level: int
    M: int
    N: int
    l2: Optional[float] = None
    l2_unweighted: Optional[float] = None
    linf: Optional[float] = None
    oc_l2: Optional[float] = None
    oc_l2_unweighted: Optional[float] = None
    oc_linf: Optional[float] = None
    failed: Optional[str] = None

    def value(self, norm: str) -> Optional[float]:
        return {"L2": self.l2_unweighted, "L2h": self.l2, "Linf": self.linf}[norm]

    def rate(self, norm: str) -> Optional[float]:
        return {"L2": self.oc_l2_unweighted, "L2h": self.oc_l2, "Linf": self.oc_linf}[norm]


@dataclass
class ConvergenceTable:
    problem: str
    alpha: float
    axis: str
    scheme: str
    boundary: str
    measure: str = "final"
    rows: list[TableRow] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ConvergenceTable":
        d = dict(d)
        rows = [TableRow(**r) for r in d.pop("rows")]
        return cls(rows=rows, **d)

    def errors(self, norm: str) -> list[Optional[float]]:
        return [r.value(norm) for r in self.rows]

    def orders(self, norm: str) -> list[Optional[float]]:
        return [r.rate(norm) for r in self.rows[1:]]


def _factory(problem: ProblemLike, params: Optional[dict]) -> Callable[[float], ProblemSpec]:
    if isinstance(problem, str):
        return lambda alpha: make_problem(problem, alpha, **(params or {}))
    return problem


def _check_schedule(schedule: Sequence[tuple[int, int]], axis: str) -> list[tuple[int, int]]:
    pairs = [(int(M), int(N)) for M, N in schedule]
    if not pairs:
        raise ValueError("empty schedule")
    if axis not in AXES:
        raise ValueError(f"unknown axis {axis!r}")
    key = 0 if axis == "spatial" else 1
    for prev, cur in zip(pairs, pairs[1:]):
        if not cur[key] > prev[key] or cur[1 - key] < prev[1 - key]:
            raise ValueError(f"schedule is not strictly refining along the {axis} axis: {prev} -> {cur}")
    return pairs


def _fill_orders(rows: list[TableRow], axis: str, length: float, horizon: float) -> None:
    def step(r: TableRow) -> float:
        return length / r.M if axis == "spatial" else horizon / r.N

    for prev, cur in zip(rows, rows[1:]):
        if prev.failed or cur.failed:
            continue
        for attr, norm in (("oc_l2", "l2"), ("oc_l2_unweighted", "l2_unweighted"), ("oc_linf", "linf")):
            e1, e2 = getattr(prev, norm), getattr(cur, norm)
            if e1 > 0 and e2 > 0:
                setattr(cur, attr, order(e1, e2, step(prev), step(cur)))


def sweep(
    problem: ProblemLike,
    alpha: float,
    schedule: Sequence[tuple[int, int]],
    axis: str = "spatial",
    scheme: str = "dqm",
    boundary: str = "dirichlet",
    measure: str = "final",
    problem_params: Optional[dict] = None,
    workers: int = 1,
    **solver_opts,
) -> ConvergenceTable:
    """Solve once per ``(M, N)`` pair and tabulate errors with consecutive-row orders.

    A row whose solve fails numerically is marked ``failed``; the remaining
    rows still run.
    """
    pairs = _check_schedule(schedule, axis)
    make = _factory(problem, problem_params)
    p = make(alpha)

    def run(level_pair):
        level, (M, N) = level_pair
        row = TableRow(level=level, M=M, N=N)
        try:
            hist = solve_problem(p, M, N, scheme=scheme, boundary=boundary, **solver_opts)
            rep = history_errors(hist, p, measure)
        except (NumericalFailure, SingularMatrixError) as exc:
            row.failed = str(exc)
            return row
        row.l2, row.l2_unweighted, row.linf = rep.l2, rep.l2_unweighted, rep.linf
        return row

    jobs = list(enumerate(pairs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run, jobs))
    else:
        rows = [run(j) for j in jobs]
    _fill_orders(rows, axis, p.domain_hi - p.domain_lo, p.horizon)
    return ConvergenceTable(
        problem=p.name, alpha=p.alpha, axis=axis, scheme=scheme, boundary=boundary, measure=measure, rows=rows
    )


def spatial_sweep(problem: ProblemLike, alpha: float, schedule, **kw) -> ConvergenceTable:
    return sweep(problem, alpha, schedule, axis="spatial", **kw)


def temporal_sweep(problem: ProblemLike, alpha: float, schedule, **kw) -> ConvergenceTable:
    return sweep(problem, alpha, schedule, axis="temporal", **kw)


def coupled_schedule(levels: int, base_M: int = 10) -> list[tuple[int, int]]:
    """``M = 2^m * base_M`` with ``N = 10^(m+1)``."""
    return [(base_M * 2**m, 10 ** (m + 1)) for m in range(levels)]


def time_schedule(levels: int, M: int = 80, base_N: int = 10) -> list[tuple[int, int]]:
    """Fixed ``M`` with ``N = 2^m * base_N``."""
    return [(M, base_N * 2**m) for m in range(levels)]


@dataclass(frozen=True)
class NamedSchedule:
    pairs: tuple[tuple[int, int], ...]
    axis: str
    problem: str
    scheme: str
    # boundary treatment under which the reference values were produced
    reference_boundary: str


SCHEDULES: dict[str, NamedSchedule] = {
    "table2": NamedSchedule(tuple(coupled_schedule(4)), "spatial", "example1", "dqm", "collocation"),
    "table3": NamedSchedule(tuple(time_schedule(4)), "temporal", "example1", "dqm", "collocation"),
    "table4": NamedSchedule(tuple(coupled_schedule(3)), "spatial", "example2", "dqm", "collocation"),
    "table5": NamedSchedule(tuple(time_schedule(3)), "temporal", "example2", "dqm", "collocation"),
    "fdm-table": NamedSchedule(tuple(coupled_schedule(4)), "spatial", "example1", "fdm", "dirichlet"),
}


def named_schedule(name: str, max_rows: Optional[int] = None) -> NamedSchedule:
    try:
        sched = SCHEDULES[name]
    except KeyError:
        raise KeyError(f"unknown schedule {name!r}; choose from {sorted(SCHEDULES)}") from None
    if max_rows is not None:
        sched = NamedSchedule(sched.pairs[:max_rows], sched.axis, sched.problem, sched.scheme, sched.reference_boundary)
    return sched
