import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from fracdqm.model import (
    Coefficients,
    MarketParams,
    caputo_quadratic_time_factor,
    coefficients_from_market,
    custom_problem,
    european_call_demo,
    example1,
    example2,
    log_transform,
    make_problem,
    time_reverse,
)


def caputo_by_quadrature(dg, eta, alpha):
    """Caputo derivative from its integral definition, integrated with an algebraic end-point weight."""
    if eta == 0:
        return 0.0
    val, _ = quad(dg, 0.0, eta, weight="alg", wvar=(0.0, -alpha), epsabs=1e-14, epsrel=1e-13)
    return val / math.gamma(1.0 - alpha)


def test_market_coefficients_example1():
    c = coefficients_from_market(MarketParams(r=0.05, sigma=0.25), 0.5)
    assert (c.a, c.b, c.c) == pytest.approx((0.03125, 0.01875, 0.05), abs=1e-15)


def test_market_coefficients_unit_diffusion():
    c = coefficients_from_market(MarketParams(r=0.5, sigma=math.sqrt(2)), 0.5)
    assert (c.a, c.b, c.c) == pytest.approx((1.0, -0.5, 0.5), abs=1e-14)


def test_zero_volatility_rejected():
    with pytest.raises(ValueError):
        coefficients_from_market(MarketParams(r=1.0, sigma=0.0), 0.5)


@pytest.mark.parametrize("kw", [dict(r=0.0, sigma=0.2), dict(r=-0.1, sigma=0.2), dict(r=0.1, sigma=-0.2), dict(r=0.1, sigma=0.2, T=0)])
def test_invalid_market_rejected(kw):
    with pytest.raises(ValueError):
        MarketParams(**kw)


@pytest.mark.parametrize("alpha", [0.0, -0.1, 1.01])
def test_alpha_range(alpha):
    with pytest.raises(ValueError):
        Coefficients(a=1.0, b=0.0, c=1.0, alpha=alpha)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-4, 5.0), st.floats(1e-3, 3.0), st.floats(0.01, 1.0))
def test_market_consistency(r, sigma, alpha):
    c = coefficients_from_market(MarketParams(r=r, sigma=sigma), alpha)
    assert math.isclose(c.a + c.b, r, rel_tol=1e-12, abs_tol=1e-15)
    assert c.c == r


def test_transforms():
    assert log_transform(1.0) == 0.0
    assert math.isclose(log_transform(math.e), 1.0)
    assert time_reverse(1.0, 1.0) == 0.0
    with pytest.raises(ValueError):
        log_transform(0.0)
    with pytest.raises(ValueError):
        log_transform(-1.0)


def test_example1_values():
    p = example1(0.5)
    assert p.exact(np.array([0.5]), 0.0)[0] == 0.125
    for eta in (0.0, 0.3, 1.0):
        assert p.exact(np.array([0.0, 1.0]), eta).tolist() == [0.0, 0.0]
        assert p.left_bc(eta) == 0.0 and p.right_bc(eta) == 0.0


def test_example2_values():
    p = example2(0.5)
    assert p.exact(np.array([1.0]), 0.0)[0] == 3.0
    assert p.exact(np.array([0.0]), 1.0)[0] == 4.0
    assert (p.coeffs.a, p.coeffs.b, p.coeffs.c) == (1.0, -0.5, 0.5)
    assert p.right_bc(0.5) == 3 * 1.5**2


@pytest.mark.parametrize("factory", [example1, example2])
def test_initial_matches_exact_at_nodes(factory):
    p = factory(0.4)
    s = np.linspace(0, 1, 41)
    assert np.array_equal(p.initial(s), p.exact(s, 0.0))


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.9])
def test_caputo_factor_against_quadrature(alpha):
    for eta in (0.1, 0.5, 1.0):
        want = caputo_by_quadrature(lambda t: 2.0 * (t + 1.0), eta, alpha)
        assert math.isclose(caputo_quadratic_time_factor(eta, alpha), want, rel_tol=1e-11)


@pytest.mark.parametrize("factory, shape", [(example1, "s**2*(1-s)"), (example2, "s**3+s**2+1")])
@pytest.mark.parametrize("alpha", [0.3, 0.7, 1.0])
def test_source_residual_vanishes(factory, shape, alpha):
    """Substitute the exact solution: spatial derivatives from sympy, time derivative by quadrature."""
    s_sym, eta_sym = sp.symbols("s eta")
    u = (eta_sym + 1) ** 2 * sp.sympify(shape, locals={"s": s_sym})
    u_s = sp.lambdify((s_sym, eta_sym), sp.diff(u, s_sym))
    u_ss = sp.lambdify((s_sym, eta_sym), sp.diff(u, s_sym, 2))
    g = sp.lambdify(s_sym, sp.sympify(shape, locals={"s": s_sym}))
    p = factory(alpha)
    a, b, c = p.coeffs.a, p.coeffs.b, p.coeffs.c
    rng = np.random.default_rng(7)
    for s, eta in rng.uniform(0.0, 1.0, size=(20, 2)):
        if alpha == 1.0:
            dt = 2.0 * (eta + 1.0) * g(s)
        else:
            dt = caputo_by_quadrature(lambda t: 2.0 * (t + 1.0), eta, alpha) * g(s)
        rhs = a * u_ss(s, eta) + b * u_s(s, eta) - c * (eta + 1) ** 2 * g(s) + p.source(np.array([s]), eta)[0]
        assert abs(dt - rhs) < 1e-10


def test_incompatible_data_rejected():
    with pytest.raises(ValueError):
        custom_problem(0.5, a=1.0, b=0.0, c=1.0, initial=[1.0], left_bc=[0.0], right_bc=[1.0])


def test_custom_problem_polynomials():
    p = custom_problem(
        0.5, a=1.0, b=0.0, c=1.0, initial=[1.0, 2.0], left_bc=[1.0], right_bc=[3.0], source=[[1.0], [2.0]],
        exact=[[1.0], [2.0]],
    )
    s = np.array([0.0, 0.5, 1.0])
    assert p.initial(s).tolist() == [1.0, 2.0, 3.0]
    assert p.source(s, 0.7).tolist() == [1.0, 2.0, 3.0]
    assert p.exact(s, 0.2).tolist() == [1.0, 2.0, 3.0]


def test_payoff_demo_has_no_exact():
    p = european_call_demo(0.6)
    assert p.exact is None
    s = np.linspace(p.domain_lo, p.domain_hi, 9)
    assert np.all(p.initial(s) >= 0)


def test_registry():
    assert make_problem("example2", 0.3).coeffs.alpha == 0.3
    with pytest.raises(KeyError):
        make_problem("nope", 0.5)
