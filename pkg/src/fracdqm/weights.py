"""Differential-quadrature weights from modified cubic B-splines.

With basis functions ``phi_j`` the quadrature weights ``W`` must reproduce the
derivative of every basis function at every node,
``phi_j'(s_i) = sum_k W[i, k] phi_j(s_k)``. Collecting node values in
``A[j, k] = phi_j(s_k)`` and derivatives in ``B[j, i] = h phi_j'(s_i)`` gives
``A X^T = B`` for the unit-spacing first-derivative matrix ``X``. The
second-derivative matrix is ``Y = X @ X``. Physical weights are ``X / h`` and
``Y / h^2``.

Near each end the standard splines ``C_{-1}``, ``C_0``, ``C_1`` (and their
mirror images) stick out of the domain, so they are folded into modified
functions that keep cubic reproduction up to the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction as F

import numpy as np

from .numerics import lu_factor, solve_matrix

MIN_INTERVALS = 8

# Modified basis near the left end: index -> {standard spline index: weight}.
# The right end mirrors this with j -> M - j.
_LEFT_COMBOS: dict[int, dict[int, F]] = {
    0: {0: F(1), -1: F(4)},
    1: {1: F(1), -1: F(-7, 2), 0: F(5, 8)},
    2: {2: F(1), -1: F(88, 37), 0: F(-21, 37), 1: F(-4, 37)},
    3: {3: F(1), -1: F(-1), 0: F(1, 4), 2: F(-1, 4)},
}

_A_TOP = (
    (F(8), F(1)),
    (F(0), F(37, 8), F(1)),
    (F(0), F(0), F(144, 37), F(1)),
    (F(0), F(0), F(0), F(15, 4), F(1)),
)

_B_TOP = (
    (F(-12), F(-3)),
    (F(27, 2), F(-15, 8), F(-3)),
    (F(-276, 37), F(174, 37), F(12, 37), F(-3)),
    (F(3), F(-3, 2), F(3), F(3, 4), F(-3)),
)


def _check_size(M: int) -> int:
    if int(M) != M or M < MIN_INTERVALS:
        raise ValueError(f"modified cubic B-spline DQM needs M >= {MIN_INTERVALS}, got {M}")
    return int(M)


def cubic_bspline(s, j: int, h: float = 1.0, nu: int = 0, s0: float = 0.0):
    """Standard cubic B-spline ``C_j`` (or its ``nu``-th derivative) on nodes ``s0 + i h``.

    Scaled so that node values are ``(1, 4, 1)`` at ``s_{j-1}, s_j, s_{j+1}``.
    """
    t = (np.asarray(s, dtype=float) - s0) / h - j  # local coordinate, support [-2, 2]
    x = np.abs(t)
    sgn = np.sign(t)
    out = np.zeros_like(x)
    outer = (x >= 1) & (x < 2)
    inner = x < 1
    if nu == 0:
        out[outer] = (2 - x[outer]) ** 3
        out[inner] = (2 - x[inner]) ** 3 - 4 * (1 - x[inner]) ** 3
    elif nu == 1:
        out[outer] = -3 * (2 - x[outer]) ** 2 * sgn[outer]
        out[inner] = (-3 * (2 - x[inner]) ** 2 + 12 * (1 - x[inner]) ** 2) * sgn[inner]
        out /= h
    elif nu == 2:
        out[outer] = 6 * (2 - x[outer])
        out[inner] = 6 * (2 - x[inner]) - 24 * (1 - x[inner])
        out /= h * h
    else:
        raise ValueError("only nu in {0, 1, 2} is supported")
    return out if out.ndim else float(out)


def modified_combination(j: int, M: int) -> dict[int, F]:
    """Standard-spline expansion of the modified basis function ``C~_j``."""
    _check_size(M)
    if not 0 <= j <= M:
        raise ValueError(f"basis index {j} outside 0..{M}")
    if j in _LEFT_COMBOS:
        return dict(_LEFT_COMBOS[j])
    if M - j in _LEFT_COMBOS:
        return {M - k: w for k, w in _LEFT_COMBOS[M - j].items()}
    return {j: F(1)}


def modified_basis_eval(j: int, s, M: int, h: float = 1.0, nu: int = 0, s0: float = 0.0):
    total = 0.0
    for k, w in modified_combination(j, M).items():
        total = total + float(w) * cubic_bspline(s, k, h, nu, s0)
    return total


def _banded(M: int, interior) -> np.ndarray:
    out = np.zeros((M + 1, M + 1))
    for i in range(4, M - 3):
        out[i, i - 1 : i + 2] = interior
    return out


def assemble_A(M: int) -> np.ndarray:
    """Node values ``C~_j(s_k)`` of the modified basis, row ``j``."""
    M = _check_size(M)
    A = _banded(M, (1.0, 4.0, 1.0))
    for i, row in enumerate(_A_TOP):
        A[i, : len(row)] = [float(v) for v in row]
        A[M - i, M + 1 - len(row) :] = [float(v) for v in reversed(row)]
    return A


def assemble_B(M: int, regenerate: bool = False) -> np.ndarray:
    """Unit-spacing node derivatives ``C~_j'(s_i)``, row ``j``.

    By default the tabulated boundary rows are used. ``regenerate=True``
    rebuilds every row by differentiating the modified basis at the nodes; the
    two agree to round-off.
    """
    M = _check_size(M)
    if regenerate:
        nodes = np.arange(M + 1, dtype=float)
        return np.array([modified_basis_eval(j, nodes, M, nu=1) for j in range(M + 1)])
    B = _banded(M, (3.0, 0.0, -3.0))
    for i, row in enumerate(_B_TOP):
        B[i, : len(row)] = [float(v) for v in row]
        # first-derivative rows are antisymmetric under reflection
        B[M - i, M + 1 - len(row) :] = [-float(v) for v in reversed(row)]
    return B


def compute_X(M: int, regenerate_B: bool = False) -> np.ndarray:
    """Unit-spacing first-derivative weights, ``X = (A^{-1} B)^T``."""
    A = assemble_A(M)
    B = assemble_B(M, regenerate=regenerate_B)
    return solve_matrix(lu_factor(A), B).T


def compute_Y(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError(f"X must be square, got {X.shape}")
    return X @ X


@dataclass(frozen=True)
class WeightMatrices:
    M: int
    X: np.ndarray
    Y: np.ndarray

    def scaled(self, h: float) -> tuple[np.ndarray, np.ndarray]:
        """Physical-spacing weights ``(X / h, Y / h^2)``."""
        return self.X / h, self.Y / (h * h)


def weight_matrices(M: int, regenerate_B: bool = False) -> WeightMatrices:
    X = compute_X(M, regenerate_B=regenerate_B)
    X.setflags(write=False)
    Y = compute_Y(X)
    Y.setflags(write=False)
    return WeightMatrices(M=int(M), X=X, Y=Y)
