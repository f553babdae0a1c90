import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog as scipy_linprog

from gptw.lp import feasible_combination, linprog


def _oracle(c, A_ub, b_ub, A_eq, b_eq):
    return scipy_linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")


def test_textbook_problem():
    # max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> optimum 36 at (2, 6)
    res = linprog([-3, -5], A_ub=[[1, 0], [0, 2], [3, 2]], b_ub=[4, 12, 18])
    assert res.success
    assert res.fun == pytest.approx(-36)
    np.testing.assert_allclose(res.x, [2, 6], atol=1e-12)


def test_infeasible_and_unbounded_are_reported():
    assert linprog([1, 1], A_eq=[[1, 1]], b_eq=[-1]).status == "infeasible"
    assert linprog([-1, 0], A_ub=[[0, 1]], b_ub=[1]).status == "unbounded"


def test_redundant_equalities():
    res = linprog([1, 2, 3], A_eq=[[1, 1, 1], [2, 2, 2]], b_eq=[1, 2])
    assert res.success and res.fun == pytest.approx(1)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 7), st.integers(1, 6), st.integers(0, 3))
def test_matches_highs(seed, n, m_ub, m_eq):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(n)
    A_ub = rng.standard_normal((m_ub, n))
    b_ub = rng.uniform(0, 2, m_ub)
    # keep the problem bounded in most draws
    A_ub = np.vstack([A_ub, np.ones(n)])
    b_ub = np.append(b_ub, 3.0)
    A_eq = rng.standard_normal((m_eq, n)) if m_eq else None
    b_eq = A_eq @ rng.uniform(0, 0.3, n) if m_eq else None
    ours = linprog(c, A_ub, b_ub, A_eq, b_eq)
    ref = _oracle(c, A_ub, b_ub, A_eq, b_eq)
    if ref.status == 0:
        assert ours.success
        assert ours.fun == pytest.approx(ref.fun, abs=1e-7)
        assert np.all(A_ub @ ours.x <= b_ub + 1e-7)
    elif ref.status == 2:
        assert ours.status == "infeasible"


def test_feasible_combination_inside_and_outside():
    P = np.array([[1.0, 0, 0], [0, 1.0, 0]]).T  # two basis vectors in R^3
    lam, r = feasible_combination(P, [0.3, 0.5, 0.0])
    assert r < 1e-12 and lam == pytest.approx([0.3, 0.5])
    _, r = feasible_combination(P, [0.3, 0.5, 0.2])
    assert r == pytest.approx(0.2)
    _, r = feasible_combination(P, [0.8, 0.8, 0.0])
    assert r > 0.5
    lam, r = feasible_combination(P, [0.5, 0.5, 0.0], total="eq")
    assert r < 1e-12 and lam.sum() == pytest.approx(1)
