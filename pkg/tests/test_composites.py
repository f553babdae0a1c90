import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gptw.composites import (BipartiteState, CompositeSpace, b2_permutation, marginals,
                             product_effect_consistency, separable_hull_membership, span_check,
                             tensor_state)
from gptw.convex import BallSpace, PolytopeSpace, QuantumSpace, pauli_basis, simplex
from gptw.theories import builtin

SQUARE = PolytopeSpace([[1, 1, 1], [1, 1, -1], [1, -1, 1], [1, -1, -1]], [1, 0, 0])
SINGLET = BipartiteState(1.0, np.zeros(3), np.zeros(3), -np.eye(3)).to_vector()


def _unit_ball(rng, d):
    v = rng.standard_normal(d)
    return v / np.linalg.norm(v) * rng.uniform() ** (1 / d)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 5), st.integers(2, 5))
def test_tensor_marginal_roundtrip(seed, dA, dB):
    rng = np.random.default_rng(seed)
    a = np.r_[1, _unit_ball(rng, dA)] * rng.uniform(0.1, 1)
    b = np.r_[1, _unit_ball(rng, dB)]
    mA, mB = marginals(tensor_state(a, b), BallSpace(dA), BallSpace(dB))
    np.testing.assert_allclose(mA, a, atol=1e-12)
    np.testing.assert_allclose(mB, b * a[0], atol=1e-12)


def test_singlet_marginals_maximally_mixed():
    mA, mB = marginals(SINGLET, BallSpace(3), BallSpace(3))
    np.testing.assert_allclose(mA, [1, 0, 0, 0], atol=1e-12)
    np.testing.assert_allclose(mB, [1, 0, 0, 0], atol=1e-12)


def test_singlet_is_a_quantum_state():
    rho = np.einsum("p,pij->ij", SINGLET, pauli_basis(2)) / 4
    psi = np.array([0, 1, -1, 0]) / np.sqrt(2)
    np.testing.assert_allclose(rho, np.outer(psi, psi), atol=1e-12)


def test_b2_view_roundtrip():
    rng = np.random.default_rng(1)
    st_ = BipartiteState(0.7, rng.standard_normal(2), rng.standard_normal(3), rng.standard_normal((2, 3)))
    v = st_.to_vector("b2")
    np.testing.assert_allclose(v[:3] / 0.7, np.r_[1, st_.alpha])
    back = BipartiteState.from_b2(v, 2, 3)
    np.testing.assert_allclose(back.gamma, st_.gamma)
    assert sorted(b2_permutation(2, 3)) == list(range(12))


def test_composite_dimensions_multiply():
    names = ["classical(2)", "classical(3)", "square_gbit", "ball(2)", "ball(3)", "qubit"]
    for a in names:
        for b in names:
            A, B = builtin(a).space, builtin(b).space
            assert CompositeSpace([A, B]).k == A.k * B.k


def test_products_span_product_space():
    for name in ("classical(3)", "square_gbit", "ball(2)", "qubit"):
        S = builtin(name).space
        prods = CompositeSpace([S, S]).product_extreme_points()
        assert span_check(prods, S.k ** 2)


def test_quantum_rule_contains_entangled_states():
    c = CompositeSpace([QuantumSpace(1), QuantumSpace(1)], rule="quantum")
    assert c.contains(SINGLET)
    c3 = CompositeSpace([BallSpace(3), BallSpace(3)], rule="quantum")
    assert c3.contains(SINGLET)


class TestConsistency:
    def test_foil_fails(self):
        foil = BipartiteState(1.0, np.zeros(3), np.zeros(3), -1.5 * np.eye(3)).to_vector()
        v = product_effect_consistency(foil, [[1, 0, 0, 0]], [[1, 0, 0, 0]], (BallSpace(3), BallSpace(3)))
        assert not v.passed
        assert v.witness_value == pytest.approx(-0.125, abs=1e-6)
        Ea, Eb = v.witness
        assert float(Ea @ foil.reshape(4, 4) @ Eb) == pytest.approx(v.witness_value)

    def test_singlet_passes(self):
        v = product_effect_consistency(SINGLET, [[1, 0, 0, 0]], [[1, 0, 0, 0]], (BallSpace(3), BallSpace(3)))
        assert v.passed
        assert v.min_value == pytest.approx(0, abs=1e-9) and v.max_value == pytest.approx(1.0, abs=1e-9)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000))
    def test_sampled_separable_states_pass(self, seed):
        rng = np.random.default_rng(seed)
        S = BallSpace(3)
        w = sum(p * tensor_state(a, b) for p, a, b in
                zip(rng.dirichlet(np.ones(3)), S.sample_pure(3, rng), S.sample_pure(3, rng)))
        assert product_effect_consistency(w, [[1, 0, 0, 0]], [[1, 0, 0, 0]], (S, S), restarts=5).passed


class TestSeparability:
    def test_polytope_exact(self):
        a, b = SQUARE.extreme_points().points[:2]
        w = 0.5 * tensor_state(a, a) + 0.5 * tensor_state(b, b)
        v = separable_hull_membership(w, SQUARE, SQUARE)
        assert v.separable and v.exact and v.label == "separable"
        # a PR-box-like correlation is outside the separable hull
        pr = np.zeros(9)
        pr[0] = 1
        pr.reshape(3, 3)[1:, 1:] = [[1, 1], [1, -1]]
        v = separable_hull_membership(pr / 1.0, SQUARE, SQUARE)
        assert not v.separable and v.label == "not separable"

    def test_ball_product_mixture(self):
        z, mz = np.array([1, 0, 0, 1.0]), np.array([1, 0, 0, -1.0])
        w = 0.5 * tensor_state(z, z) + 0.5 * tensor_state(mz, mz)
        assert separable_hull_membership(w, BallSpace(3), BallSpace(3), samples=400).separable

    def test_singlet_not_proven_separable(self):
        v = separable_hull_membership(SINGLET, BallSpace(3), BallSpace(3), samples=900)
        assert not v.separable and v.label == "not proven separable"

    def test_classical_products(self):
        w = tensor_state([0.3, 0.7], [0.5, 0.5])
        assert separable_hull_membership(w, simplex(2), simplex(2)).separable
