import logging
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracdqm.l1 import l1_weights
from fracdqm.model import example1, example2
from fracdqm.numerics import gamma_fn, inf_norm, lu_factor, solve_matrix
from fracdqm.solver import Mesh, dqm_space_operator
from fracdqm.stability import DominanceLost, check_stability, neumann_partial_sum_check, varah_constants
from fracdqm.weights import assemble_A, assemble_B, weight_matrices


def column_dominance_by_hand(A):
    n = A.shape[0]
    margins = []
    for k in range(n):
        off = sum(abs(A[l, k]) for l in range(n) if l != k)
        margins.append(abs(A[k, k]) - off)
    return min(margins)


def test_varah_identity():
    beta, R_X, R_Y = varah_constants(np.eye(4), np.eye(4))
    assert (beta, R_X, R_Y) == (1.0, 1.0, 1.0)


def test_varah_printed_A():
    A = assemble_A(12)
    beta, R_X, R_Y = varah_constants(A, assemble_B(12))
    assert beta == pytest.approx(column_dominance_by_hand(A), abs=1e-15)
    # interior columns have margin 4 - 2 = 2; the tightest is a boundary column
    assert beta == pytest.approx(1.75, abs=1e-15)
    assert R_Y == R_X**2


def test_loss_of_dominance_reported():
    with pytest.raises(DominanceLost):
        varah_constants([[1.0, 2.0], [2.0, 1.0]], np.eye(2))


@pytest.mark.parametrize("M", [12, 20, 40])
def test_varah_constants_bound_weights(M):
    _, R_X, R_Y = varah_constants(assemble_A(M), assemble_B(M))
    w = weight_matrices(M)
    assert R_X >= inf_norm(w.X)
    assert R_Y >= inf_norm(w.Y)


def test_reaction_only_operator():
    p = SimpleNamespace(coeffs=SimpleNamespace(a=0.0, b=0.0, c=2.0), alpha=0.5)
    d = 0.3
    rep = check_stability(p, Mesh(M=12, N=10), weight_matrices(12), d)
    assert rep.P_norm == 0.0 and rep.condition_ok
    assert rep.theoretical_bound == pytest.approx(1 / (1 + 2 * d), rel=1e-15)
    assert rep.empirical_inverse_norm == pytest.approx(1 / (1 + 2 * d), rel=1e-14)
    assert rep.bound_respected


def test_example1_report():
    p = example1(0.5)
    mesh = Mesh.for_problem(p, 10, 10)
    d = l1_weights(0.5, 10, 0.1).d
    rep = check_stability(p, mesh, weight_matrices(10), d)
    assert rep.Q_norm == pytest.approx(d * rep.P_norm / rep.threshold, rel=1e-15)
    assert rep.empirical_inverse_norm is not None and rep.empirical_inverse_norm_dirichlet is not None
    if rep.condition_ok:
        assert rep.bound_respected
    else:
        assert rep.theoretical_bound is None and rep.bound_respected is None
    assert set(rep.to_dict()) >= {"beta", "R_X", "R_Y", "P_norm", "threshold", "bound_respected"}


@pytest.mark.parametrize("M", [12, 20])
@pytest.mark.parametrize("factory", [example1, example2])
def test_operator_norm_inequality(factory, M):
    rep = check_stability(factory(0.5), Mesh(M=M, N=100), weight_matrices(M), 0.01)
    assert rep.P_norm <= rep.P_bound


def test_failed_condition_warns(caplog):
    with caplog.at_level(logging.WARNING, logger="fracdqm.stability"):
        rep = check_stability(example1(0.5), Mesh(M=12, N=10), weight_matrices(12), 0.5)
    assert not rep.condition_ok
    assert "condition fails" in caplog.text


def test_no_empirical_above_limit():
    rep = check_stability(example1(0.5), Mesh(M=70, N=10), weight_matrices(70), 1e-6)
    assert rep.empirical_inverse_norm is None


def test_requires_positive_reaction():
    p = SimpleNamespace(coeffs=SimpleNamespace(a=1.0, b=0.0, c=0.0), alpha=0.5)
    with pytest.raises(ValueError):
        check_stability(p, Mesh(M=12, N=10), weight_matrices(12), 0.1)


def test_neumann_zero():
    assert neumann_partial_sum_check(np.zeros((4, 4)), 3) == 0.0


@pytest.mark.parametrize("n", [0, 1, 5, 12])
def test_neumann_geometric(n):
    got = neumann_partial_sum_check(0.5 * np.eye(3), n)
    assert got == pytest.approx(0.5 ** (n + 1) / 0.5, rel=1e-12)


def test_neumann_example1_operator():
    p = example1(0.5)
    mesh = Mesh(M=12, N=10)
    P = dqm_space_operator(p, mesh, weight_matrices(12))
    d = 0.5 / inf_norm(P)
    Q = d * P / (1 + p.coeffs.c * d)
    assert inf_norm(Q) < 1
    assert neumann_partial_sum_check(Q, 20) < neumann_partial_sum_check(Q, 5)


def test_neumann_rejects_large_Q():
    with pytest.raises(ValueError):
        neumann_partial_sum_check(1.2 * np.eye(2), 4)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.floats(0.05, 0.95))
def test_diagonal_shift_inverse_bound(seed, q):
    rng = np.random.default_rng(seed)
    Q = rng.normal(size=(6, 6))
    Q *= q / inf_norm(Q)
    inv = solve_matrix(lu_factor(np.eye(6) - Q), np.eye(6))
    assert inf_norm(inv) <= 1.0 / (1.0 - inf_norm(Q)) * (1 + 1e-12)


@pytest.mark.parametrize("alpha", [0.3, 0.9])
def test_bound_stays_bounded_under_refinement(alpha):
    """With the time step small enough for the condition at every M, the bound does not grow with M."""
    p = example1(alpha)
    bounds = []
    for M in (12, 20, 40):
        w = weight_matrices(M)
        P = dqm_space_operator(p, Mesh(M=M, N=1), w)
        dt = (0.5 / inf_norm(P) / gamma_fn(2 - alpha)) ** (1 / alpha)
        d = l1_weights(alpha, 1, dt).d
        rep = check_stability(p, Mesh(M=M, N=1), w, d)
        assert rep.condition_ok and rep.bound_respected
        bounds.append(rep.theoretical_bound)
    assert max(bounds) <= 2.0 + 1e-9
