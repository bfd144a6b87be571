"""CSV and JSON emission.

Every float is written as ``{:.5e}`` (six significant digits) and rows come out
in a fixed order, so identical runs produce byte-identical files.

Column orders:

* convergence table: ``alpha,M,N,L2,OC_L2,Linf,OC_Linf,L2h,OC_L2h,failed``
  (``L2`` is the unweighted node sum, ``L2h`` the h-weighted one)
* solution history: ``step,node,s,eta,value``
* curve: ``s,numerical,exact``
* surface: ``s,eta,numerical,exact``

``exact`` columns are dropped when the problem has no closed form.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .analysis import ConvergenceTable
from .model import ProblemSpec
from .solver import SolutionHistory

TABLE_COLUMNS = ("alpha", "M", "N", "L2", "OC_L2", "Linf", "OC_Linf", "L2h", "OC_L2h", "failed")


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return repr(x)
    return f"{x:.5e}"


def write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in r])
    return path


def write_tables(path, tables: Sequence[ConvergenceTable]) -> Path:
    """One block per alpha, rows in schedule order."""
    rows = []
    for t in sorted(tables, key=lambda t: t.alpha):
        for r in t.rows:
            rows.append(
                (t.alpha, r.M, r.N, r.l2_unweighted, r.oc_l2_unweighted, r.linf, r.oc_linf, r.l2, r.oc_l2, r.failed or "")
            )
    return write_rows(path, TABLE_COLUMNS, rows)


def write_matrix(path, A) -> Path:
    A = np.asarray(A, dtype=float)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        for row in A:
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path


def _exact_grid(p: Optional[ProblemSpec], s, etas) -> Optional[np.ndarray]:
    if p is None or p.exact is None:
        return None
    return np.array([np.asarray(p.exact(s, eta), dtype=float) * np.ones_like(s) for eta in etas])


def write_history(path, hist: SolutionHistory) -> Path:
    s, etas = hist.mesh.nodes, hist.mesh.etas
    rows = ((k, j, s[j], etas[k], hist.values[k, j]) for k in range(len(etas)) for j in range(len(s)))
    return write_rows(path, ("step", "node", "s", "eta", "value"), rows)


def write_curve(path, hist: SolutionHistory, p: Optional[ProblemSpec] = None) -> Path:
    """Final-time profile against the exact solution when one exists."""
    s = hist.mesh.nodes
    ex = _exact_grid(p, s, [hist.mesh.T])
    if ex is None:
        return write_rows(path, ("s", "numerical"), zip(s, hist.final))
    return write_rows(path, ("s", "numerical", "exact"), zip(s, hist.final, ex[0]))


def write_surface(path, hist: SolutionHistory, p: Optional[ProblemSpec] = None) -> Path:
    """All ``(M+1)(N+1)`` space-time points, time-major."""
    s, etas = hist.mesh.nodes, hist.mesh.etas
    ex = _exact_grid(p, s, etas)
    idx = [(k, j) for k in range(len(etas)) for j in range(len(s))]
    if ex is None:
        return write_rows(path, ("s", "eta", "numerical"), ((s[j], etas[k], hist.values[k, j]) for k, j in idx))
    return write_rows(
        path, ("s", "eta", "numerical", "exact"), ((s[j], etas[k], hist.values[k, j], ex[k, j]) for k, j in idx)
    )


def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(jsonable(payload), indent=2, sort_keys=True) + "\n")
    return path


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())
