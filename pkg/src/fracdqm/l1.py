"""L1 discretisation of the Caputo derivative on a uniform time grid.

At ``eta_{k+1}`` the derivative is approximated by

    (dt^-alpha / Gamma(2 - alpha)) * sum_{p=0}^{k} delta_p (u^{k+1-p} - u^{k-p})

with ``delta_p = (p+1)^(1-alpha) - p^(1-alpha)``. Multiplying through by
``d = dt^alpha Gamma(2 - alpha)`` and moving every known level to the right
gives the memory term returned by :func:`history_rhs`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import check_alpha
from .numerics import gamma_fn


@dataclass(frozen=True)
class L1Weights:
    alpha: float
    dt: float
    delta: np.ndarray  # delta_0 .. delta_N
    d: float

    @property
    def N(self) -> int:
        return len(self.delta) - 1

    @property
    def memory(self) -> np.ndarray:
        """Convolution weights ``delta_p - delta_{p+1}`` for ``p = 0 .. N-1``."""
        return self.delta[:-1] - self.delta[1:]


def l1_weights(alpha: float, N: int, dt: float) -> L1Weights:
    alpha = check_alpha(alpha)
    if int(N) != N or N < 1:
        raise ValueError(f"need at least one time step, got N={N}")
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    p = np.arange(int(N) + 1, dtype=float)
    delta = (p + 1.0) ** (1.0 - alpha) - p ** (1.0 - alpha)
    delta[0] = 1.0
    delta.setflags(write=False)
    return L1Weights(alpha=alpha, dt=float(dt), delta=delta, d=dt**alpha * gamma_fn(2.0 - alpha))


def history_rhs(history, w: L1Weights, k: int, verbatim: bool = False) -> np.ndarray:
    """Known part of step ``k -> k+1``: ``sum_{p<k} (delta_p - delta_{p+1}) U^{k-p} + delta_k U^0``.

    ``history`` is indexable by time level (a list of vectors or a 2-D array
    with one level per row) and must hold ``U^0 .. U^k``. ``verbatim=True``
    drops the ``delta_k`` factor on ``U^0``; that variant does not preserve
    constant states and is kept only for comparison.
    """
    if not 0 <= k <= w.N:
        raise ValueError(f"step index {k} outside the L1 weight table (N={w.N})")
    if len(history) < k + 1:
        raise ValueError(f"history holds {len(history)} levels, step {k} needs {k + 1}")
    u0 = np.asarray(history[0], dtype=float)
    if k == 0:
        return u0.copy()
    levels = np.asarray(history[1 : k + 1], dtype=float)  # U^1 .. U^k
    coef = w.memory[:k][::-1]  # pairs delta_{k-1}-delta_k with U^1, ..., delta_0-delta_1 with U^k
    out = coef @ levels
    out += (1.0 if verbatim else w.delta[k]) * u0
    return out


def l1_caputo(samples, alpha: float, dt: float) -> float:
    """L1 estimate of the Caputo derivative at the last sample of ``samples``.

    ``samples`` are ``u(0), u(dt), ..., u(K dt)``.
    """
    u = np.asarray(samples, dtype=float)
    K = len(u) - 1
    w = l1_weights(alpha, K, dt)
    diffs = u[K:0:-1] - u[K - 1 :: -1]  # u^{K-p} - u^{K-1-p}, p = 0..K-1
    return float(np.dot(w.delta[:K], diffs)) / w.d
