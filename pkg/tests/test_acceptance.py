"""Acceptance criteria 1-8, one test per criterion (plus the slow full-schedule row).

Each test records a one-line verdict that is printed as it runs and repeated
in the terminal summary.
"""

import math

import numpy as np
import pytest
from conftest import CRITERIA

from fracdqm.analysis import coupled_schedule, named_schedule, sweep, time_schedule
from fracdqm.golden import compare, load_golden, tiered
from fracdqm.l1 import history_rhs, l1_caputo, l1_weights
from fracdqm.model import example1, example2
from fracdqm.numerics import gamma_fn, inf_norm
from fracdqm.solver import Mesh, dqm_space_operator, solve_problem
from fracdqm.analysis import history_errors
from fracdqm.stability import check_stability, varah_constants
from fracdqm.weights import assemble_A, assemble_B, modified_basis_eval, weight_matrices

ALPHAS = (0.3, 0.5, 0.7, 0.9)


def record(key, ok, detail, capsys):
    CRITERIA[key] = (bool(ok), detail)
    with capsys.disabled():
        print(f"\n{key}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def run_schedule(name, max_rows=None, boundary=None):
    ns = named_schedule(name, max_rows)
    return {
        a: sweep(ns.problem, a, ns.pairs, axis=ns.axis, scheme=ns.scheme, boundary=boundary or ns.reference_boundary,
                 workers=len(ns.pairs))
        for a in ALPHAS
    }


def tier_summary(name, tables):
    verdicts = compare(load_golden(name), tables)
    columns = tiered(verdicts)
    failed = [c for c in columns if not c.passed]
    counts = {t: sum(c.tier == t for c in columns) for t in ("strict", "order", "fail")}
    worst = []
    for c in failed:
        cells = [v for v in verdicts if (v.alpha, v.norm) == (c.alpha, c.norm) and not v.passed]
        worst.append(
            f"alpha={c.alpha:g} {c.norm}: "
            + ", ".join(f"row{v.row} {v.kind} {v.computed:.3e} vs {v.expected:.3e}" for v in cells)
        )
    return columns, counts, worst


@pytest.fixture(scope="module")
def table2_full():
    return run_schedule("table2")


def _golden_criterion(key, name, capsys):
    tables = run_schedule(name, max_rows=3)
    columns, counts, worst = tier_summary(name, tables)
    _, alt, _ = tier_summary(name, run_schedule(name, max_rows=3, boundary="dirichlet"))
    detail = (
        f"{name} rows 0-2: {counts['strict']} strict, {counts['order']} order-only, {counts['fail']} failed of "
        f"{len(columns)} columns (dirichlet mode for reference: {alt['strict']} strict, {alt['order']} order-only)"
    )
    if worst:
        detail += "; failing: " + "; ".join(worst)
    record(key, counts["fail"] == 0, detail, capsys)


def test_criterion_1_table2_reproduction(capsys):
    _golden_criterion("criterion 1", "table2", capsys)


def test_criterion_2_table4_reproduction(capsys):
    _golden_criterion("criterion 2", "table4", capsys)


@pytest.mark.slow
def test_table2_endpoint_row(table2_full, capsys):
    columns, counts, worst = tier_summary("table2", table2_full)
    detail = f"table2 with (80, 10^4) row: {counts['strict']} strict, {counts['order']} order-only, {counts['fail']} failed"
    if worst:
        detail += "; failing: " + "; ".join(worst)
    record("criterion 1 (endpoint row)", counts["fail"] == 0, detail, capsys)


def test_criterion_3_temporal_order(capsys):
    worst = (0.0, None)
    for factory in ("example1", "example2"):
        for boundary in ("collocation", "dirichlet"):
            for alpha in ALPHAS:
                t = sweep(factory, alpha, time_schedule(4), axis="temporal", boundary=boundary, workers=4)
                for norm in ("L2", "Linf"):
                    for oc in t.orders(norm):
                        dev = abs(oc - (2 - alpha))
                        if dev > worst[0]:
                            worst = (dev, f"{factory} {boundary} alpha={alpha:g} {norm} OC={oc:.3f}")
    record("criterion 3", worst[0] <= 0.25,
           f"max |OC_eta - (2-alpha)| = {worst[0]:.3f} (tol 0.25) at {worst[1]}; both examples, both boundary modes",
           capsys)


@pytest.mark.slow
def test_criterion_4_fdm_baseline(capsys):
    p = example1(0.5)
    linf = history_errors(solve_problem(p, 20, 100, scheme="fdm"), p).linf
    rel = abs(linf - 9.477e-5) / 9.477e-5
    t = sweep("example1", 0.9, coupled_schedule(4), scheme="fdm", workers=4)
    last = (t.rows[-1].oc_l2_unweighted, t.rows[-1].oc_linf)
    ok = rel <= 0.20 and all(1.4 <= oc <= 2.6 for oc in last)
    record("criterion 4", ok,
           f"FDM (20,100) alpha=0.5 Linf {linf:.4e} ({rel:.1%} from 9.477e-5, tol 20%); "
           f"alpha=0.9 final-row OC_s L2 {last[0]:.3f}, Linf {last[1]:.3f} (range [1.4, 2.6])", capsys)


def test_criterion_5_stability(capsys):
    schedule_N = {12: 10, 20: 100, 40: 1000}
    n_cfg = n_ok = violations = constant_fail = 0
    sched_ok = 0
    for factory in (example1, example2):
        for alpha in ALPHAS:
            p = factory(alpha)
            c = p.coeffs.c
            for M, N in schedule_N.items():
                w = weight_matrices(M)
                _, R_X, R_Y = varah_constants(assemble_A(M), assemble_B(M))
                constant_fail += not (R_X >= inf_norm(w.X) and R_Y >= inf_norm(w.Y))
                P_norm = inf_norm(dqm_space_operator(p, Mesh(M=M, N=N), w))
                # the schedule's own N, then steps fine enough for the sufficient condition to hold
                ds = [(1.0 / N) ** alpha * gamma_fn(2 - alpha)]
                ds += [theta / (P_norm - theta * c) for theta in (0.1, 0.5, 0.9, 0.99)]
                for j, d in enumerate(ds):
                    rep = check_stability(p, Mesh(M=M, N=N), w, d)
                    n_cfg += 1
                    constant_fail += not rep.P_norm <= rep.P_bound
                    if rep.condition_ok:
                        n_ok += 1
                        sched_ok += j == 0
                        violations += not rep.bound_respected
    record("criterion 5", violations == 0 and constant_fail == 0,
           f"{n_cfg} configurations, {n_ok} satisfy d||P|| < 1+cd ({sched_ok} of 24 at the schedule's own N), "
           f"{violations} bound violations, {constant_fail} norm-constant failures", capsys)


def test_criterion_6_weights(capsys):
    M = 20
    w = weight_matrices(M)
    s = np.arange(M + 1.0)
    row_sum = float(np.max(np.abs(w.X.sum(axis=1))))
    x_err = max(float(np.max(np.abs(w.X @ s**k - k * s ** max(k - 1, 0)))) for k in range(4))
    y_err = max(float(np.max(np.abs(w.Y @ s**k - k * (k - 1) * s ** max(k - 2, 0)))) for k in range(4))
    A = assemble_A(M)
    a_err = max(float(np.max(np.abs(A[j] - modified_basis_eval(j, s, M)))) for j in [0, 1, 2, 3, M - 3, M - 2, M - 1, M])
    ok = row_sum < 1e-10 and x_err < 1e-8 and y_err < 1e-6 and a_err < 1e-12
    record("criterion 6", ok,
           f"X row sums {row_sum:.1e} (<1e-10), X cubic exactness {x_err:.1e} (<1e-8), "
           f"Y exactness {y_err:.1e} (<1e-6), boundary rows of A {a_err:.1e} (<1e-12)", capsys)


def test_criterion_7_l1(capsys):
    problems = []
    for alpha in (0.1, 0.3, 0.5, 0.7, 0.9):
        w = l1_weights(alpha, 10_000, 1e-4)
        if not (w.delta[0] == 1.0 and np.all(w.delta > 0) and np.all(np.diff(w.delta) < 0)):
            problems.append(f"delta properties alpha={alpha}")
        H = np.full((51, 4), 2.5)
        tele = max(float(np.max(np.abs(history_rhs(H, w, k) - 2.5))) for k in range(51))
        if tele > 1e-13:
            problems.append(f"telescoping alpha={alpha}: {tele:.1e}")
    rates = {}
    for alpha in (0.3, 0.5, 0.7, 0.9):
        exact = 2.0 / gamma_fn(3.0 - alpha)
        errs = [abs(l1_caputo(np.linspace(0, 1, K + 1) ** 2, alpha, 1.0 / K) - exact) for K in (8, 16, 32, 64)]
        rate = math.log2(errs[-2] / errs[-1])
        rates[alpha] = rate
        if abs(rate - (2 - alpha)) > 0.1:
            problems.append(f"order alpha={alpha}: {rate:.3f}")
    record("criterion 7", not problems,
           "delta_0=1, positivity, monotonicity, telescoping ok; L1 rates on eta^2 "
           + ", ".join(f"{a:g}:{r:.3f}" for a, r in rates.items())
           + ("; problems: " + "; ".join(problems) if problems else ""), capsys)


@pytest.mark.slow
def test_criterion_8_order_enhancement(table2_full, capsys):
    means = {}
    for a in (0.3, 0.9):
        for norm in ("L2", "Linf"):
            oc = table2_full[a].orders(norm)
            means[(a, norm)] = sum(oc) / len(oc)
    ok = all(means[(0.3, n)] > means[(0.9, n)] for n in ("L2", "Linf"))
    record("criterion 8", ok,
           "mean OC_s over the full table2 schedule: "
           + ", ".join(f"alpha={a:g} {n} {v:.3f}" for (a, n), v in means.items()), capsys)
