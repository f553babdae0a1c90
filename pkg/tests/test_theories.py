import numpy as np
import pytest

from gptw.convex import QuantumSpace, max_distinguishable, mix, pauli_basis
from gptw.theories import (QUBIT_FIDUCIAL, FrameMap, UnknownTheoryError, UnsupportedEncodingError,
                           adjoint_generators, bloch_to_density, builtin, canonical_encoding,
                           qubit_fiducial_space, theory_from_document)

X = np.array([[0, 1], [1, 0]], complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)


def test_builtin_shapes():
    assert builtin("qubit").k == 4
    assert builtin("classical(2)").k == 2
    assert len(builtin("classical(2)").group.elements) == 2
    q2 = builtin("quantum(2)")
    assert q2.k == 16 and q2.group.generators.shape == (15, 16, 16)
    assert builtin("square_gbit").group.elements.shape == (8, 3, 3)
    assert builtin("ball3").k == 4 and builtin("classical3").k == 3


@pytest.mark.parametrize("name", ["classical(1)", "classical(7)", "ball(9)", "ball(1)", "quantum(4)", "hexagon"])
def test_builtin_rejects(name):
    with pytest.raises(UnknownTheoryError):
        builtin(name)


def test_bloch_to_density_examples():
    r = bloch_to_density([1, 0, 0, 1])
    np.testing.assert_allclose(r.matrix, np.diag([1, 0]), atol=1e-15)
    np.testing.assert_allclose(bloch_to_density([1, 0, 0, 0]).matrix, np.eye(2) / 2)
    r = bloch_to_density([1, 0, 0, 1.5])
    assert r.hermitian and not r.psd


def test_frame_map_against_explicit_pauli_sum():
    rng = np.random.default_rng(3)
    w = np.r_[1, rng.standard_normal(3) * 0.4]
    rho = (w[0] * np.eye(2) + w[1] * X + w[2] * Y + w[3] * Z) / 2
    np.testing.assert_allclose(FrameMap(1).forward(w), rho, atol=1e-15)
    np.testing.assert_allclose(FrameMap(1).inverse(rho), w, atol=1e-14)
    v = rng.standard_normal(3)
    v /= np.linalg.norm(v) * 2
    ev = np.linalg.eigvalsh(FrameMap(1).forward(np.r_[1, v]))
    np.testing.assert_allclose(ev, [(1 - 0.5) / 2, (1 + 0.5) / 2], atol=1e-14)
    w2 = rng.standard_normal(16)
    np.testing.assert_allclose(FrameMap(2).inverse(FrameMap(2).forward(w2)), w2, atol=1e-12)
    vec = FrameMap(2).matrix() @ w2
    np.testing.assert_allclose(vec.reshape(4, 4), FrameMap(2).forward(w2), atol=1e-14)


def test_density_map_is_linear():
    a, b = np.array([1, 0, 0, 1.0]), np.array([1, 0.6, 0, 0])
    lhs = bloch_to_density(mix([a, b], [0.3, 0.7])).matrix
    rhs = 0.3 * bloch_to_density(a).matrix + 0.7 * bloch_to_density(b).matrix
    np.testing.assert_allclose(lhs, rhs, atol=1e-15)


def test_singlet_density():
    w = np.zeros(16)
    w[0] = 1
    w.reshape(4, 4)[1:, 1:] = -np.eye(3)
    r = bloch_to_density(w, 2)
    ev = np.linalg.eigvalsh(r.matrix)
    np.testing.assert_allclose(ev, [0, 0, 0, 1], atol=1e-14)
    assert r.trace == pytest.approx(1)


def test_fiducial_frame():
    S = qubit_fiducial_space()
    # pure +z in fiducial coordinates: p(x) = p(y) = 1/2, p(z) = 1, p(-z) = 0
    assert S.contains([0.5, 0.5, 1.0, 0.0])
    np.testing.assert_allclose(QUBIT_FIDUCIAL @ [1, 0, 0, 1], [0.5, 0.5, 1, 0])
    assert builtin("qubit").frames["fiducial"].shape == (4, 4)


def test_adjoint_generators_against_unitary_conjugation():
    import scipy.linalg
    q = QuantumSpace(2)
    G = adjoint_generators(2)
    P = pauli_basis(2)
    rho = q.density(q.sample_states(1, seed=5)[0])
    for w in (1, 7, 15):
        U = scipy.linalg.expm(-0.5j * 0.8 * P[w])
        expect = q.coefficients(U @ rho @ U.conj().T)
        got = scipy.linalg.expm(0.8 * G[w - 1]) @ q.coefficients(rho)
        np.testing.assert_allclose(got, expect, atol=1e-13)


def test_quantum_c_squared():
    for n in (1, 2):
        q = QuantumSpace(n)
        basis = [q.coefficients(np.diag(np.eye(2 ** n)[i])) for i in range(2 ** n)]
        c = max_distinguishable(q, basis).c
        assert c == 2 ** n and q.k == c * c


def test_encodings():
    enc = canonical_encoding(builtin("classical(2)"), builtin("quantum(1)"))
    np.testing.assert_allclose(enc.T @ [0.3, 0.7], [1, 0, 0, -0.4])
    np.testing.assert_allclose(enc.F @ enc.T, np.eye(2), atol=0)
    enc3 = canonical_encoding(builtin("classical(3)"), builtin("quantum(2)"))
    assert enc3.T.shape == (16, 3)
    with pytest.raises(UnsupportedEncodingError):
        canonical_encoding(builtin("ball(2)"), builtin("qubit"))


@pytest.mark.parametrize("name", ["classical(3)", "ball(4)", "square_gbit", "qubit", "quantum(2)"])
def test_document_roundtrip(name):
    th = builtin(name)
    doc = th.to_document()
    back = theory_from_document(doc)
    assert back.k == th.k and back.group.kind == th.group.kind
    assert back.composite.rule == th.composite.rule
    assert back.to_document() == doc


def test_document_mismatch_rejected():
    doc = builtin("ball(3)").to_document()
    doc["k"] = 5
    with pytest.raises(ValueError):
        theory_from_document(doc)
