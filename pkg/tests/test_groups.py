import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from gptw.convex import BallSpace, QuantumSpace
from gptw.groups import (BlochFormError, NotAnEncodingError, NotCompactError, TransformationGroup,
                         apply, bloch_form, check_reversible_pair, expm, invariant_metric,
                         orbit_transitive, replay_clause4, so_basis)
from gptw.theories import builtin, canonical_encoding


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 9), st.floats(1e-3, 30))
def test_expm_matches_scipy(seed, k, scale):
    A = np.random.default_rng(seed).standard_normal((k, k)) * scale / np.sqrt(k)
    ref = scipy.linalg.expm(A)
    assert np.max(np.abs(expm(A) - ref)) <= 1e-11 * max(1.0, np.max(np.abs(ref)))


def test_so_basis_is_antisymmetric_and_complete():
    B = so_basis(4)
    assert len(B) == 6
    for S in B:
        np.testing.assert_array_equal(S, -S.T)
    assert np.linalg.matrix_rank(np.array([S.ravel() for S in B])) == 6


def _random_distortion(rng, k, max_cond=10.0):
    while True:
        L = np.eye(k) + 0.4 * rng.standard_normal((k, k))
        if np.linalg.cond(L) <= max_cond:
            return L


class TestInvariantMetric:
    def test_finite_methods_agree(self):
        for name in ("classical(3)", "square_gbit", "classical(5)"):
            g = builtin(name).group
            a = invariant_metric(g, method="average").W
            c = invariant_metric(g, method="commutant").W
            np.testing.assert_allclose(a / np.linalg.norm(a), c / np.linalg.norm(c), atol=1e-12)

    def test_conjugated_ball_against_monte_carlo(self):
        L0 = np.diag([1.0, 2.0, 1.0, 1.0])
        g = TransformationGroup.ball(3, frame=L0)
        W2 = invariant_metric(g).W2
        G = g.sample(20_000, seed=4)
        mc = np.mean(np.einsum("gji,gjk->gik", G, G), axis=0)
        np.testing.assert_allclose(W2, np.diag([1, 0.5, 2, 2]), atol=1e-12)
        np.testing.assert_allclose(mc, W2, atol=0.05)

    def test_invariance(self):
        rng = np.random.default_rng(0)
        L0 = _random_distortion(rng, 4)
        g = TransformationGroup.ball(3, frame=L0)
        W2 = invariant_metric(g).W2
        for G in g.sample(10, seed=1):
            np.testing.assert_allclose(G.T @ W2 @ G, W2, atol=1e-10)

    def test_non_compact_rejected(self):
        H = np.zeros((2, 2))
        H[0, 0] = 1.0  # one-parameter scaling group
        with pytest.raises(NotCompactError):
            invariant_metric(TransformationGroup.lie([H]))


class TestBlochForm:
    @pytest.mark.parametrize("seed", range(5))
    def test_distorted_ball(self, seed):
        rng = np.random.default_rng(seed)
        L0 = _random_distortion(rng, 4)
        bf = bloch_form(BallSpace(3, frame=L0), TransformationGroup.ball(3, frame=L0))
        assert max(bf.residuals.values()) < 1e-10
        assert np.linalg.cond(bf.L) == pytest.approx(np.linalg.cond(L0), rel=1e-8)
        pure = BallSpace(3, frame=L0).sample_pure(50, seed=9) @ bf.L.T
        np.testing.assert_allclose(np.linalg.norm(pure, axis=1), np.sqrt(2), atol=1e-10)

    def test_idempotent(self):
        L0 = np.diag([1.0, 3.0, 1.0, 0.5])
        bf = bloch_form(BallSpace(3, frame=L0), TransformationGroup.ball(3, frame=L0))
        again = bloch_form(bf.space, bf.group)
        # the second pass only rotates inside the Bloch block
        M = again.L
        assert abs(M[0, 0] - 1) < 1e-10 and np.abs(M[0, 1:]).max() < 1e-10
        np.testing.assert_allclose(M[1:, 1:].T @ M[1:, 1:], np.eye(3), atol=1e-10)

    def test_unequal_norms_rejected(self):
        # square with D4 has equal norms; a rectangle with only flips does not equalize diagonals
        from gptw.convex import PolytopeSpace
        rect = PolytopeSpace([[1, 2, 1], [1, 2, -1], [1, -2, 1], [1, -2, -1], [1, 0, 1.5]], [1, 0, 0])
        flips = TransformationGroup.finite([np.eye(3), np.diag([1, -1, 1.0]), np.diag([1, 1, -1.0]),
                                            np.diag([1, -1, -1.0])])
        with pytest.raises(BlochFormError):
            bloch_form(rect, flips)


class TestOrbits:
    def test_ball_group_transitive(self):
        assert orbit_transitive(TransformationGroup.ball(4), BallSpace(4)).passed

    def test_trivial_group_fails_with_reference_pair(self):
        g = TransformationGroup.finite([np.eye(4)])
        v = orbit_transitive(g, BallSpace(3))
        assert not v.passed
        np.testing.assert_allclose(v.witness[0], [1, 0, 0, 1])
        np.testing.assert_allclose(v.witness[1], [1, 0, 0, -1])

    def test_quantum_lie_group_transitive(self):
        th = builtin("quantum(2)")
        v = orbit_transitive(th.group, th.space, samples=20)
        assert v.passed and v.max_residual < 1e-7

    def test_permutations_transitive_on_vertices(self):
        th = builtin("classical(4)")
        assert orbit_transitive(th.group, th.space).passed


class TestReversiblePairs:
    @pytest.mark.parametrize("src,dst", [("classical(2)", "quantum(1)"), ("classical(3)", "quantum(2)"),
                                         ("ball(3)", "qubit")])
    def test_canonical_encodings(self, src, dst):
        s, t = builtin(src), builtin(dst)
        enc = canonical_encoding(s, t)
        rep = check_reversible_pair(enc.T, enc.F, s.space, t.space)
        assert rep.passed
        assert max(c.residual for c in rep.clauses) < 1e-10
        rep.raise_for_encoding()

    def test_truncated_decoder_fails_clause4_and_replays(self):
        s, t = builtin("classical(2)"), builtin("quantum(1)")
        enc = canonical_encoding(s, t)
        F = enc.F.copy()
        F[1] = 0.0
        rep = check_reversible_pair(enc.T, F, s.space, t.space)
        c4 = rep.clause(4)
        assert not c4.passed
        assert replay_clause4(enc.T, F, c4.witness) > 2 * rep.tol
        with pytest.raises(NotAnEncodingError):
            rep.raise_for_encoding()

    def test_apply_checks_shapes(self):
        from gptw.convex import DimensionMismatchError
        with pytest.raises(DimensionMismatchError):
            apply(np.eye(3), [1, 0])


def test_group_sampling_is_reproducible():
    g = TransformationGroup.lie(builtin("quantum(1)").group.generators)
    np.testing.assert_array_equal(g.sample(3, seed=7), g.sample(3, seed=7))
    for G in g.sample(5, seed=1):
        assert QuantumSpace(1).contains(G @ np.array([1, 0, 0, 1.0]))
    assert TransformationGroup.finite([np.eye(2)]).connected
    assert not builtin("classical(2)").group.connected
