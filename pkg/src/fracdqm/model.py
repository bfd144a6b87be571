"""Problem instances for the log-price, time-reversed fractional Black-Scholes PDE.

After ``s = ln S`` and ``eta = T - tau`` the option value ``u(s, eta)`` obeys

    D^alpha_eta u = a u_ss + b u_s - c u + f(s, eta)

on ``[domain_lo, domain_hi] x (0, T]`` with Dirichlet data on both ends and an
initial profile at ``eta = 0`` (the payoff). ``D^alpha`` is the Caputo
derivative. Here ``a = sigma^2 / 2``, ``b = r - a`` and ``c = r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import polynomial as npoly

from .numerics import gamma_fn

BoundaryFn = Callable[[float], float]
SpaceFn = Callable[[np.ndarray], np.ndarray]
SpaceTimeFn = Callable[[np.ndarray, float], np.ndarray]

COMPAT_TOL = 1e-12


@dataclass(frozen=True)
class MarketParams:
    r: float
    sigma: float
    T: float = 1.0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"volatility must be non-negative, got {self.sigma}")
        if not self.T > 0:
            raise ValueError(f"expiry must be positive, got {self.T}")
        if not self.r > 0:
            raise ValueError(f"risk-free rate must be positive, got {self.r}")


@dataclass(frozen=True)
class Coefficients:
    """Diffusion ``a``, advection ``b``, reaction ``c`` and fractional order."""

    a: float
    b: float
    c: float
    alpha: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"diffusion coefficient must be positive, got {self.a}")
        if not self.c > 0:
            raise ValueError(f"reaction coefficient must be positive, got {self.c}")
        check_alpha(self.alpha)


def check_alpha(alpha: float) -> float:
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    return float(alpha)


def coefficients_from_market(m: MarketParams, alpha: float) -> Coefficients:
    a = 0.5 * m.sigma**2
    return Coefficients(a=a, b=m.r - a, c=m.r, alpha=check_alpha(alpha))


def log_transform(S):
    S = np.asarray(S, dtype=float)
    if np.any(S <= 0):
        raise ValueError("asset price must be positive")
    out = np.log(S)
    return float(out) if out.ndim == 0 else out


def time_reverse(tau: float, T: float) -> float:
    if not 0.0 <= tau <= T:
        raise ValueError(f"tau={tau} outside [0, {T}]")
    return T - tau


@dataclass(frozen=True)
class ProblemSpec:
    """A fully specified instance: coefficients, domain, data and (optionally) exact solution.

    ``left_bc``/``right_bc`` are functions of ``eta``; ``initial`` maps node
    arrays to values; ``source`` and ``exact`` take ``(s_array, eta)``.
    """

    name: str
    coeffs: Coefficients
    domain_lo: float
    domain_hi: float
    horizon: float
    left_bc: BoundaryFn
    right_bc: BoundaryFn
    initial: SpaceFn
    source: SpaceTimeFn
    exact: Optional[SpaceTimeFn] = None
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.domain_lo < self.domain_hi:
            raise ValueError("domain_lo must be smaller than domain_hi")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        ends = np.asarray(self.initial(np.array([self.domain_lo, self.domain_hi])), dtype=float)
        mismatch = max(abs(ends[0] - self.left_bc(0.0)), abs(ends[1] - self.right_bc(0.0)))
        if mismatch > COMPAT_TOL:
            raise ValueError(
                f"initial data and boundary data disagree at eta=0 by {mismatch:.3e}"
            )

    @property
    def alpha(self) -> float:
        return self.coeffs.alpha


def caputo_quadratic_time_factor(eta: float, alpha: float) -> float:
    """Caputo derivative of ``(eta + 1)^2`` in ``eta``."""
    if eta == 0.0:
        return 0.0
    return 2.0 * eta ** (2.0 - alpha) / gamma_fn(3.0 - alpha) + 2.0 * eta ** (1.0 - alpha) / gamma_fn(
        2.0 - alpha
    )


def _manufactured(name, coeffs, shape, d_shape, dd_shape, left, right, horizon, params):
    a, b, c, alpha = coeffs.a, coeffs.b, coeffs.c, coeffs.alpha

    def source(s, eta):
        s = np.asarray(s, dtype=float)
        g = shape(s)
        return caputo_quadratic_time_factor(eta, alpha) * g - (eta + 1.0) ** 2 * (
            a * dd_shape(s) + b * d_shape(s) - c * g
        )

    def exact(s, eta):
        return (eta + 1.0) ** 2 * shape(np.asarray(s, dtype=float))

    return ProblemSpec(
        name=name,
        coeffs=coeffs,
        domain_lo=0.0,
        domain_hi=1.0,
        horizon=horizon,
        left_bc=left,
        right_bc=right,
        initial=lambda s: shape(np.asarray(s, dtype=float)),
        source=source,
        exact=exact,
        params=params,
    )


def example1(alpha: float = 0.5, r: float = 0.05, sigma: float = 0.25, T: float = 1.0) -> ProblemSpec:
    """Homogeneous Dirichlet problem with exact solution ``(eta+1)^2 s^2 (1-s)``."""
    coeffs = coefficients_from_market(MarketParams(r=r, sigma=sigma, T=T), alpha)
    return _manufactured(
        "example1",
        coeffs,
        shape=lambda s: s**2 * (1.0 - s),
        d_shape=lambda s: 2.0 * s - 3.0 * s**2,
        dd_shape=lambda s: 2.0 - 6.0 * s,
        left=lambda eta: 0.0,
        right=lambda eta: 0.0,
        horizon=T,
        params={"r": r, "sigma": sigma, "T": T},
    )


def example2(alpha: float = 0.5, r: float = 0.5, a: float = 1.0, T: float = 1.0) -> ProblemSpec:
    """Non-homogeneous Dirichlet problem with exact solution ``(eta+1)^2 (s^3+s^2+1)``.

    The diffusion coefficient is given directly rather than through a volatility.
    """
    coeffs = Coefficients(a=a, b=r - a, c=r, alpha=check_alpha(alpha))
    return _manufactured(
        "example2",
        coeffs,
        shape=lambda s: s**3 + s**2 + 1.0,
        d_shape=lambda s: 3.0 * s**2 + 2.0 * s,
        dd_shape=lambda s: 6.0 * s + 2.0,
        left=lambda eta: (eta + 1.0) ** 2,
        right=lambda eta: 3.0 * (eta + 1.0) ** 2,
        horizon=T,
        params={"r": r, "a": a, "T": T},
    )


def european_call_demo(
    alpha: float = 0.5,
    r: float = 0.05,
    sigma: float = 0.25,
    T: float = 1.0,
    strike: float = 1.0,
    s_min: float = -2.0,
    s_max: float = 2.0,
) -> ProblemSpec:
    """Call payoff ``max(e^s - K, 0)`` with zero source; no exact solution.

    The far-field data use the classical asymptotics ``u -> 0`` on the left and
    ``u -> e^s - K e^{-r eta}`` on the right, which are only approximate for
    ``alpha < 1``.
    """
    coeffs = coefficients_from_market(MarketParams(r=r, sigma=sigma, T=T), alpha)
    hi = math.exp(s_max)
    return ProblemSpec(
        name="european-call-demo",
        coeffs=coeffs,
        domain_lo=s_min,
        domain_hi=s_max,
        horizon=T,
        left_bc=lambda eta: 0.0,
        right_bc=lambda eta: hi - strike * math.exp(-r * eta),
        initial=lambda s: np.maximum(np.exp(np.asarray(s, dtype=float)) - strike, 0.0),
        source=lambda s, eta: np.zeros_like(np.asarray(s, dtype=float)),
        exact=None,
        params={"r": r, "sigma": sigma, "T": T, "strike": strike, "s_min": s_min, "s_max": s_max},
    )


def custom_problem(alpha: float = 0.5, **cfg) -> ProblemSpec:
    """Build a problem from polynomial coefficient lists.

    Expected keys: ``a``, ``b``, ``c`` (or ``r`` and ``sigma``), ``domain``
    ``[lo, hi]``, ``T``, ``initial`` (coefficients in ``s``, lowest degree
    first), ``left_bc`` / ``right_bc`` (coefficients in ``eta``), ``source``
    (2-D coefficients ``C[i][j]`` of ``s^i eta^j``) and optional ``exact``
    (2-D, same layout).
    """
    if "a" in cfg:
        coeffs = Coefficients(a=float(cfg["a"]), b=float(cfg["b"]), c=float(cfg["c"]), alpha=check_alpha(alpha))
    else:
        coeffs = coefficients_from_market(MarketParams(r=float(cfg["r"]), sigma=float(cfg["sigma"])), alpha)
    lo, hi = (float(v) for v in cfg.get("domain", (0.0, 1.0)))
    init_c = np.asarray(cfg.get("initial", [0.0]), dtype=float)
    left_c = np.asarray(cfg.get("left_bc", [0.0]), dtype=float)
    right_c = np.asarray(cfg.get("right_bc", [0.0]), dtype=float)
    src_c = np.atleast_2d(np.asarray(cfg.get("source", [[0.0]]), dtype=float))
    exact_c = cfg.get("exact")

    def poly2(coef):
        return lambda s, eta: npoly.polyval2d(np.asarray(s, dtype=float), np.full(np.shape(s), float(eta)), coef)

    exact = poly2(np.atleast_2d(np.asarray(exact_c, dtype=float))) if exact_c is not None else None
    return ProblemSpec(
        name="custom",
        coeffs=coeffs,
        domain_lo=lo,
        domain_hi=hi,
        horizon=float(cfg.get("T", 1.0)),
        left_bc=lambda eta: float(npoly.polyval(eta, left_c)),
        right_bc=lambda eta: float(npoly.polyval(eta, right_c)),
        initial=lambda s: npoly.polyval(np.asarray(s, dtype=float), init_c),
        source=poly2(src_c),
        exact=exact,
        params=dict(cfg),
    )


PROBLEMS: dict[str, Callable[..., ProblemSpec]] = {
    "example1": example1,
    "example2": example2,
    "european-call-demo": european_call_demo,
    "custom": custom_problem,
}


def make_problem(key: str, alpha: float, **params) -> ProblemSpec:
    try:
        factory = PROBLEMS[key]
    except KeyError:
        raise KeyError(f"unknown problem {key!r}; choose from {sorted(PROBLEMS)}") from None
    return factory(alpha=alpha, **params)
