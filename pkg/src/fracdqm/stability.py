"""Max-norm stability diagnostics for the implicit DQM operator.

Write ``L = (1 + c d) I - d P`` and ``Q = d P / (1 + c d)``. If
``d ||P||_inf < 1 + c d`` then ``||Q||_inf < 1``, the Neumann series for
``(I - Q)^{-1}`` converges and

    ||L^{-1}||_inf <= 1 / ((1 + c d) - d ||P||_inf).

``||P||_inf`` is itself bounded through Varah's estimate for the column
diagonally dominant spline matrix ``A``:
``||X||_inf <= R_X = ||B^T||_inf / beta`` and ``||Y||_inf <= R_Y = R_X^2``.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .model import ProblemSpec
from .numerics import inf_norm, lu_factor, one_norm, solve_matrix
from .solver import Mesh, dqm_space_operator
from .weights import WeightMatrices, assemble_A, assemble_B

log = logging.getLogger(__name__)

EMPIRICAL_MAX_M = 64


class DominanceLost(ValueError):
    """``A^T`` is not strictly diagonally dominant, so Varah's bound does not apply."""


@dataclass(frozen=True)
class StabilityReport:
    alpha: float
    M: int
    N: int
    d: float
    beta: float
    R_X: float
    R_Y: float
    P_norm: float
    P_bound: float  # (|a|/h^2) R_Y + (|b|/h) R_X
    threshold: float  # 1 + c d
    Q_norm: float
    condition_ok: bool
    theoretical_bound: Optional[float]
    empirical_inverse_norm: Optional[float]  # operator as assembled
    empirical_inverse_norm_dirichlet: Optional[float]  # after boundary-row replacement

    @property
    def bound_respected(self) -> Optional[bool]:
        if not self.condition_ok or self.empirical_inverse_norm is None:
            return None
        return self.empirical_inverse_norm <= self.theoretical_bound * (1 + 1e-12)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["bound_respected"] = self.bound_respected
        return out


def varah_constants(A, B) -> tuple[float, float, float]:
    """``(beta, R_X, R_Y)``: column dominance margin of ``A`` and the derived bounds."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    absA = np.abs(A)
    diag = np.diag(absA)
    beta = float(np.min(diag - (absA.sum(axis=0) - diag)))
    if beta <= 0:
        raise DominanceLost(f"A^T has minimum dominance {beta:.4g} <= 0")
    R_X = one_norm(B) / beta  # ||B^T||_inf == ||B||_1
    return beta, R_X, R_X**2


def _inverse_inf_norm(L: np.ndarray) -> float:
    inv = solve_matrix(lu_factor(L), np.eye(L.shape[0]))
    return inf_norm(inv)


def check_stability(p: ProblemSpec, mesh: Mesh, w: WeightMatrices, d: float, empirical: bool = True) -> StabilityReport:
    a, b, c = p.coeffs.a, p.coeffs.b, p.coeffs.c
    if not c > 0:
        raise ValueError("the bound assumes a positive reaction coefficient")
    h = mesh.h
    beta, R_X, R_Y = varah_constants(assemble_A(mesh.M), assemble_B(mesh.M))
    P = dqm_space_operator(p, mesh, w)
    P_norm = inf_norm(P)
    threshold = 1.0 + c * d
    ok = d * P_norm < threshold
    n = mesh.M + 1
    emp = emp_dir = None
    if empirical and mesh.M <= EMPIRICAL_MAX_M:
        L = threshold * np.eye(n) - d * P
        emp = _inverse_inf_norm(L)
        Ld = L.copy()
        Ld[[0, -1], :] = 0.0
        Ld[0, 0] = Ld[-1, -1] = 1.0
        emp_dir = _inverse_inf_norm(Ld)
    report = StabilityReport(
        alpha=p.alpha,
        M=mesh.M,
        N=mesh.N,
        d=d,
        beta=beta,
        R_X=R_X,
        R_Y=R_Y,
        P_norm=P_norm,
        P_bound=abs(a) / h**2 * R_Y + abs(b) / h * R_X,
        threshold=threshold,
        Q_norm=d * P_norm / threshold,
        condition_ok=bool(ok),
        theoretical_bound=1.0 / (threshold - d * P_norm) if ok else None,
        empirical_inverse_norm=emp,
        empirical_inverse_norm_dirichlet=emp_dir,
    )
    if not ok:
        log.warning(
            "sufficient stability condition fails: d*||P|| = %.4g >= 1 + c d = %.4g (M=%d, N=%d, alpha=%g)",
            d * P_norm,
            threshold,
            mesh.M,
            mesh.N,
            p.alpha,
        )
    return report


def neumann_partial_sum_check(Q, n_terms: int) -> float:
    """``||(I - Q)^{-1} - sum_{k=0}^{n_terms} Q^k||_inf``."""
    Q = np.asarray(Q, dtype=float)
    q = inf_norm(Q)
    if q >= 1.0:
        raise ValueError(f"Neumann series needs ||Q||_inf < 1, got {q:.4g}")
    n = Q.shape[0]
    exact = solve_matrix(lu_factor(np.eye(n) - Q), np.eye(n))
    term = np.eye(n)
    partial = np.eye(n)
    for _ in range(n_terms):
        term = term @ Q
        partial += term
    return inf_norm(exact - partial)
