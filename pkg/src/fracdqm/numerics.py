"""Dense linear algebra and special-function kernel.

Matrices are plain 2-D ``numpy.ndarray`` objects of dtype float64. The LU
factorization is LAPACK's partial-pivoting ``getrf`` (through scipy) wrapped
with an explicit singularity test so that callers get one error type no matter
which matrix failed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg


class SingularMatrixError(ArithmeticError):
    """Raised when a pivot falls below the relative singularity threshold."""


PIVOT_TOL = 1e-14


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    return a


def inf_norm(a) -> float:
    """Maximum absolute row sum."""
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        return float(np.max(np.abs(a))) if a.size else 0.0
    return float(np.max(np.sum(np.abs(a), axis=1))) if a.size else 0.0


def one_norm(a) -> float:
    """Maximum absolute column sum."""
    a = np.asarray(a, dtype=float)
    return float(np.max(np.sum(np.abs(a), axis=0))) if a.size else 0.0


def matmul(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[-1] != b.shape[0]:
        raise ValueError(f"shape mismatch: {a.shape} @ {b.shape}")
    return a @ b


@dataclass(frozen=True)
class LUFactorization:
    """Row-pivoted LU of a square matrix, ``P A = L U``.

    ``lu`` holds L (unit lower, below the diagonal) and U (on and above it) in
    one array; ``piv`` is the LAPACK pivot sequence; ``sign`` is the parity of
    the row permutation (so ``det A = sign * prod(diag(U))``).
    """

    lu: np.ndarray
    piv: np.ndarray
    sign: int
    norm: float

    @property
    def n(self) -> int:
        return self.lu.shape[0]

    def lower(self) -> np.ndarray:
        return np.tril(self.lu, -1) + np.eye(self.n)

    def upper(self) -> np.ndarray:
        return np.triu(self.lu)

    def permutation(self) -> np.ndarray:
        """Permutation matrix ``P`` with ``P A = L U``."""
        order = np.arange(self.n)
        for i, p in enumerate(self.piv):
            order[i], order[p] = order[p], order[i]
        return np.eye(self.n)[order]

    def reconstruct(self) -> np.ndarray:
        return self.permutation().T @ self.lower() @ self.upper()


def lu_factor(m) -> LUFactorization:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"LU needs a square matrix, got {a.shape}")
    norm = inf_norm(a)
    if norm == 0.0:
        raise SingularMatrixError("zero matrix")
    with warnings.catch_warnings():
        # exact zero pivots are reported below as SingularMatrixError
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    pivots = np.abs(np.diag(lu))
    k = int(np.argmin(pivots))
    if pivots[k] < PIVOT_TOL * norm:
        raise SingularMatrixError(
            f"pivot {k} has magnitude {pivots[k]:.3e} < {PIVOT_TOL:g} * ||M||_inf"
        )
    sign = -1 if int(np.sum(piv != np.arange(len(piv)))) % 2 else 1
    return LUFactorization(lu=lu, piv=piv, sign=sign, norm=norm)


def solve(f: LUFactorization, rhs) -> np.ndarray:
    b = np.asarray(rhs, dtype=float)
    if b.ndim != 1 or b.shape[0] != f.n:
        raise ValueError(f"rhs of shape {b.shape} does not match system of size {f.n}")
    return scipy.linalg.lu_solve((f.lu, f.piv), b, check_finite=False)


def solve_matrix(f: LUFactorization, rhs) -> np.ndarray:
    b = np.asarray(rhs, dtype=float)
    if b.ndim != 2 or b.shape[0] != f.n:
        raise ValueError(f"rhs of shape {b.shape} does not match system of size {f.n}")
    return scipy.linalg.lu_solve((f.lu, f.piv), b, check_finite=False)


# Lanczos approximation, g = 7, n = 9
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma_fn(z: float) -> float:
    """Gamma function for real ``z > 0``.

    Intended for the small arguments that occur in the L1 scheme and the
    manufactured sources (``Gamma(2 - alpha)``, ``Gamma(3 - alpha)``).
    """
    z = float(z)
    if not z > 0.0:
        raise ValueError(f"gamma_fn requires z > 0, got {z}")
    if z < 0.5:
        # reflection keeps the series in its accurate range
        return math.pi / (math.sin(math.pi * z) * gamma_fn(1.0 - z))
    z -= 1.0
    x = _LANCZOS_COEF[0]
    for i in range(1, len(_LANCZOS_COEF)):
        x += _LANCZOS_COEF[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * math.exp(-t) * x
