"""Reference error tables and cell-by-cell comparison against computed sweeps.

Each reference file is long-format CSV (one cell per line). A cell carries the
printed error, the printed order (blank on the first row of a block) and a
``check`` flag: ``value`` compares both, ``order`` compares only the order,
``value-only`` compares only the error and ``none`` skips the cell.
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass
from importlib import resources
from typing import Iterable, Optional

from .analysis import ConvergenceTable

VALUE_RTOL = 0.15
ORDER_ATOL = 0.30
NORMS = ("L2", "Linf")


@dataclass(frozen=True)
class GoldenCell:
    table: str
    problem: str
    scheme: str
    axis: str
    alpha: float
    row: int
    M: int
    N: int
    norm: str
    error: float
    order: Optional[float]
    check: str
    note: str = ""


@dataclass(frozen=True)
class CellVerdict:
    table: str
    alpha: float
    row: int
    M: int
    N: int
    norm: str
    kind: str  # "value" or "order"
    expected: float
    computed: Optional[float]
    deviation: Optional[float]  # relative for values, absolute for orders
    tolerance: float
    passed: bool
    note: str = ""


def golden_tables() -> list[str]:
    root = resources.files("fracdqm") / "golden"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".csv"))


def load_golden(name: str) -> list[GoldenCell]:
    path = resources.files("fracdqm") / "golden" / f"{name}.csv"
    if not path.is_file():
        raise KeyError(f"no reference table {name!r}; available: {golden_tables()}")
    text = path.read_text()
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    cells = []
    for rec in csv.DictReader(io.StringIO("\n".join(lines))):
        cells.append(
            GoldenCell(
                table=rec["table"],
                problem=rec["problem"],
                scheme=rec["scheme"],
                axis=rec["axis"],
                alpha=float(rec["alpha"]),
                row=int(rec["row"]),
                M=int(rec["M"]),
                N=int(rec["N"]),
                norm=rec["norm"],
                error=float(rec["error"]),
                order=float(rec["order"]) if rec["order"] else None,
                check=rec["check"],
                note=rec.get("note", "") or "",
            )
        )
    return cells


def compare(
    cells: Iterable[GoldenCell],
    tables: dict[float, ConvergenceTable],
    value_rtol: float = VALUE_RTOL,
    order_atol: float = ORDER_ATOL,
) -> list[CellVerdict]:
    """Compare reference cells with computed tables keyed by alpha.

    Cells whose alpha or row was not computed are skipped; a failed row counts
    as a failed comparison.
    """
    out = []
    for cell in cells:
        if cell.check == "none":
            continue
        table = next((t for a, t in tables.items() if abs(a - cell.alpha) < 1e-12), None)
        if table is None or cell.row >= len(table.rows):
            continue
        row = table.rows[cell.row]
        if (row.M, row.N) != (cell.M, cell.N):
            raise ValueError(f"{cell.table} row {cell.row}: computed mesh {(row.M, row.N)} != reference {(cell.M, cell.N)}")
        base = dict(table=cell.table, alpha=cell.alpha, row=cell.row, M=cell.M, N=cell.N, norm=cell.norm, note=cell.note)
        if cell.check in ("value", "value-only"):
            got = row.value(cell.norm)
            dev = None if got is None else abs(got - cell.error) / abs(cell.error)
            out.append(
                CellVerdict(kind="value", expected=cell.error, computed=got, deviation=dev, tolerance=value_rtol,
                            passed=dev is not None and dev <= value_rtol, **base)
            )
        if cell.order is not None and cell.check in ("value", "order"):
            got = row.rate(cell.norm)
            dev = None if got is None else abs(got - cell.order)
            out.append(
                CellVerdict(kind="order", expected=cell.order, computed=got, deviation=dev, tolerance=order_atol,
                            passed=dev is not None and dev <= order_atol, **base)
            )
    return out


@dataclass(frozen=True)
class ColumnVerdict:
    """Two-tier outcome for one ``(table, alpha, norm)`` column."""

    table: str
    alpha: float
    norm: str
    values_pass: bool
    orders_pass: bool
    n_values: int
    n_orders: int

    @property
    def tier(self) -> str:
        if self.n_values and self.values_pass:
            return "strict"
        if self.n_orders and self.orders_pass:
            return "order"
        return "fail"

    @property
    def passed(self) -> bool:
        return self.tier != "fail"


def tiered(verdicts: Iterable[CellVerdict]) -> list[ColumnVerdict]:
    """A column passes strictly if every value is in tolerance, else on orders alone."""
    groups: dict[tuple, list[CellVerdict]] = {}
    for v in verdicts:
        groups.setdefault((v.table, v.alpha, v.norm), []).append(v)
    out = []
    for (table, alpha, norm), vs in sorted(groups.items()):
        vals = [v for v in vs if v.kind == "value"]
        ords = [v for v in vs if v.kind == "order"]
        out.append(
            ColumnVerdict(
                table=table,
                alpha=alpha,
                norm=norm,
                values_pass=bool(vals) and all(v.passed for v in vals),
                orders_pass=bool(ords) and all(v.passed for v in ords),
                n_values=len(vals),
                n_orders=len(ords),
            )
        )
    return out


def verdicts_to_rows(verdicts: Iterable[CellVerdict]) -> list[dict]:
    return [asdict(v) for v in verdicts]
