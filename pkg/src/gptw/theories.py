"""Reference theories, the Bloch <-> density-matrix map and encoding pairs."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

import numpy as np

from .convex import (DEFAULT_TOL, BallSpace, PolytopeSpace, QuantumSpace, StateSpace,
                     pauli_basis, simplex)
from .groups import TransformationGroup

__all__ = [
    "EffectDeclaration",
    "CompositeRule",
    "Theory",
    "UnknownTheoryError",
    "UnsupportedEncodingError",
    "builtin",
    "BUILTIN_NAMES",
    "adjoint_generators",
    "QUBIT_FIDUCIAL",
    "qubit_fiducial_space",
    "DensityRecord",
    "FrameMap",
    "bloch_to_density",
    "EncodingPair",
    "canonical_encoding",
    "theory_from_document",
]

BUILTIN_NAMES = ("classical(n)", "ball(d)", "square_gbit", "qubit", "quantum(n)")


class UnknownTheoryError(ValueError):
    pass


class UnsupportedEncodingError(ValueError):
    pass


@dataclass(frozen=True)
class EffectDeclaration:
    """Which effects are observable: ``full``, the ``pure`` family, or a ``list``."""

    kind: str = "full"
    effects: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("full", "pure", "list"):
            raise ValueError(f"unknown effect declaration {self.kind!r}")
        if self.kind == "list":
            object.__setattr__(self, "effects", np.atleast_2d(np.asarray(self.effects, float)))


@dataclass(frozen=True)
class CompositeRule:
    rule: str = "separable"  # separable | quantum | declared
    k: int | None = None


@dataclass
class Theory:
    name: str
    space: StateSpace
    group: TransformationGroup
    effects: EffectDeclaration = field(default_factory=EffectDeclaration)
    composite: CompositeRule = field(default_factory=CompositeRule)
    metadata: dict = field(default_factory=dict)
    frames: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.space.k

    def composite_k(self) -> int:
        if self.composite.rule == "declared":
            return int(self.composite.k)
        return self.k * self.k

    def to_document(self, seed: int = 0) -> dict:
        doc = {
            "name": self.name,
            "k": self.k,
            "geometry": self.space.describe(),
            "unit_effect": self.space.unit_effect.tolist(),
            "group": self.group.describe(),
            "effects": {"declaration": self.effects.kind},
            "composite": {"rule": self.composite.rule},
            "tolerance": self.space.tol,
            "seed": seed,
        }
        if self.effects.kind == "list":
            doc["effects"]["list"] = self.effects.effects.tolist()
        if self.composite.k is not None:
            doc["composite"]["k"] = int(self.composite.k)
        if self.metadata:
            doc["metadata"] = self.metadata
        return doc


# ------------------------------------------------------------------ frames

QUBIT_FIDUCIAL = 0.5 * np.array([
    [1.0, 1.0, 0.0, 0.0],   # p(sigma_x = +1)
    [1.0, 0.0, 1.0, 0.0],   # p(sigma_y = +1)
    [1.0, 0.0, 0.0, 1.0],   # p(sigma_z = +1)
    [1.0, 0.0, 0.0, -1.0],  # p(sigma_z = -1)
])


def qubit_fiducial_space(tol: float = DEFAULT_TOL) -> BallSpace:
    """The qubit with coordinates given by the four fiducial outcome probabilities."""
    return BallSpace(3, frame=QUBIT_FIDUCIAL, tol=tol)


@dataclass(frozen=True)
class DensityRecord:
    matrix: np.ndarray
    trace: float
    hermitian: bool
    psd: bool
    eigenvalues: np.ndarray


@dataclass(frozen=True)
class FrameMap:
    """Linear map between tensor Bloch coefficients and 2^n x 2^n matrices."""

    n: int

    @property
    def paulis(self) -> np.ndarray:
        return pauli_basis(self.n)

    def forward(self, w) -> np.ndarray:
        w = np.asarray(w, float)
        if w.shape != (4 ** self.n,):
            raise ValueError(f"expected a vector of length {4 ** self.n}")
        return np.einsum("p,pij->ij", w, self.paulis) / 2 ** self.n

    def inverse(self, rho) -> np.ndarray:
        return np.real(np.einsum("pij,ji->p", self.paulis, np.asarray(rho)))

    def matrix(self) -> np.ndarray:
        """Complex matrix sending w to vec(rho) (row-major)."""
        return self.paulis.reshape(4 ** self.n, -1).T / 2 ** self.n


def bloch_to_density(w, n: int = 1, tol: float = DEFAULT_TOL) -> DensityRecord:
    rho = FrameMap(n).forward(w)
    herm = bool(np.max(np.abs(rho - rho.conj().T)) <= tol)
    ev = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    return DensityRecord(rho, float(np.real(np.trace(rho))), herm, bool(ev.min() >= -tol), ev)


# ------------------------------------------------------------------ builtins


def _single_products() -> tuple[np.ndarray, np.ndarray]:
    P1 = pauli_basis(1)
    idx = np.zeros((4, 4), dtype=int)
    phase = np.zeros((4, 4), dtype=complex)
    for a in range(4):
        for b in range(4):
            M = P1[a] @ P1[b]
            c = int(np.argmax([abs(np.trace(Q @ M)) for Q in P1]))
            idx[a, b], phase[a, b] = c, np.trace(P1[c] @ M) / 2
    return idx, phase


_PRODUCT_INDEX, _PRODUCT_PHASE = _single_products()


def adjoint_generator(word: int, n: int) -> np.ndarray:
    """Real matrix of rho -> -i[P/2, rho] for the Pauli word with index ``word``.

    With P R = phi Q, the commutator term is Im(phi) Q, so the matrix is a
    signed partial permutation obtained from word algebra alone.
    """
    K = 4 ** n
    place = 4 ** np.arange(n - 1, -1, -1)
    p = (word // place) % 4
    R = np.arange(K)
    rd = (R[None, :] // place[:, None]) % 4
    c = (_PRODUCT_INDEX[p[:, None], rd] * place[:, None]).sum(axis=0)
    phase = np.prod(_PRODUCT_PHASE[p[:, None], rd], axis=0)
    H = np.zeros((K, K))
    H[c, R] = phase.imag
    return H


def adjoint_generators(n: int) -> np.ndarray:
    """Adjoint generators for every non-identity Pauli word, in word order."""
    return np.array([adjoint_generator(w, n) for w in range(1, 4 ** n)])


def _permutation_group(n: int) -> TransformationGroup:
    els = [np.eye(n)[list(p)] for p in itertools.permutations(range(n))]
    return TransformationGroup.finite(els, check_closure=n <= 4)


def _d4_group() -> TransformationGroup:
    els = []
    for t in range(4):
        c, s = np.cos(t * np.pi / 2), np.sin(t * np.pi / 2)
        R = np.round(np.array([[c, -s], [s, c]]))
        for refl in (np.eye(2), np.diag([1.0, -1.0])):
            B = np.eye(3)
            B[1:, 1:] = R @ refl
            els.append(B)
    return TransformationGroup.finite(els)


def _parse(name: str) -> tuple[str, int | None]:
    s = name.strip().lower().replace(" ", "")
    m = re.fullmatch(r"(classical|ball|quantum)\(?(\d+)\)?", s)
    if m:
        return m.group(1), int(m.group(2))
    if s in ("square_gbit", "square", "squaregbit"):
        return "square_gbit", None
    if s == "qubit":
        return "qubit", None
    raise UnknownTheoryError(f"unknown builtin {name!r}; known: {', '.join(BUILTIN_NAMES)}")


def builtin(name: str, tol: float = DEFAULT_TOL) -> Theory:
    """Construct a reference theory by name, e.g. ``"ball(3)"`` or ``"quantum2"``."""
    kind, p = _parse(name)
    if kind == "classical":
        if not 2 <= p <= 6:
            raise UnknownTheoryError("classical(n) needs 2 <= n <= 6")
        return Theory(f"classical({p})", simplex(p, tol), _permutation_group(p),
                      metadata={"c": p})
    if kind == "ball":
        if not 2 <= p <= 8:
            raise UnknownTheoryError("ball(d) needs 2 <= d <= 8")
        rule = "quantum" if p == 3 else "separable"
        return Theory(f"ball({p})", BallSpace(p, tol=tol), TransformationGroup.ball(p),
                      composite=CompositeRule(rule), metadata={"c": 2})
    if kind == "square_gbit":
        V = [[1, s1, s2] for s1 in (1, -1) for s2 in (1, -1)]
        return Theory("square_gbit", PolytopeSpace(V, [1, 0, 0], tol=tol, name="square"), _d4_group(),
                      metadata={"c": 2})
    if kind == "qubit":
        return Theory("qubit", QuantumSpace(1, tol), TransformationGroup.ball(3),
                      composite=CompositeRule("quantum"), metadata={"c": 2},
                      frames={"fiducial": QUBIT_FIDUCIAL.copy(), "bloch": np.eye(4)})
    if not 1 <= p <= 3:
        raise UnknownTheoryError("quantum(n) needs 1 <= n <= 3")
    return Theory(f"quantum({p})", QuantumSpace(p, tol), TransformationGroup.lie(adjoint_generators(p)),
                  composite=CompositeRule("quantum"), metadata={"c": 2 ** p})


# ------------------------------------------------------------------ encodings


@dataclass(frozen=True)
class EncodingPair:
    T: np.ndarray
    F: np.ndarray
    image: str


def _kind(th: Theory) -> tuple[str, int]:
    sp = th.space
    if isinstance(sp, QuantumSpace):
        return "quantum", sp.n
    if isinstance(sp, BallSpace):
        return "ball", sp.d
    if isinstance(sp, PolytopeSpace) and np.allclose(sp.vertices, np.eye(sp.k)):
        return "classical", sp.k
    return "other", sp.k


def canonical_encoding(source: Theory, target: Theory) -> EncodingPair:
    """Encoding/decoding matrices for the supported theory pairs."""
    ks, ps = _kind(source)
    kt, pt = _kind(target)
    if ks == "classical" and kt == "quantum":
        m = int(np.ceil(np.log2(ps)))
        if pt != m:
            raise UnsupportedEncodingError(f"classical({ps}) encodes into quantum({m}), not quantum({pt})")
        sp = target.space
        T = np.zeros((sp.k, ps))
        F = np.zeros((ps, sp.k))
        for i in range(ps):
            proj = np.zeros((sp.dim, sp.dim))
            proj[i, i] = 1.0
            T[:, i] = sp.coefficients(proj)
            F[i] = sp.effect_coefficients(proj)
        img = "diagonal states" if ps == sp.dim else f"diagonal states supported on the first {ps} basis vectors"
        return EncodingPair(T, F, img)
    if ks == "ball" and ps == 3 and kt == "quantum" and pt == 1:
        # both are written in Bloch coordinates, so the frame change is the identity
        M = source.space.frame
        return EncodingPair(np.linalg.inv(M), M.copy(), "all states")
    raise UnsupportedEncodingError(f"no canonical encoding from {source.name} to {target.name}")


# ------------------------------------------------------------------ documents


def theory_from_document(doc: dict) -> Theory:
    """Build a Theory from a (schema-valid) TheoryDocument dictionary."""
    tol = float(doc.get("tolerance", DEFAULT_TOL))
    geo = doc["geometry"]
    kind = geo["kind"]
    if kind == "simplex":
        space = simplex(int(geo["n"]), tol)
    elif kind == "polytope":
        space = PolytopeSpace(geo["vertices"], doc["unit_effect"], tol=tol, name=doc.get("name"))
    elif kind == "ball":
        space = BallSpace(int(geo["d"]), frame=geo.get("frame"), tol=tol)
    elif kind == "quantum":
        space = QuantumSpace(int(geo["n"]), tol)
    else:
        raise ValueError(f"unsupported geometry kind {kind!r}")
    if int(doc["k"]) != space.k:
        raise ValueError(f"k = {doc['k']} does not match geometry (k = {space.k})")
    if "unit_effect" in doc and kind != "polytope":
        if np.max(np.abs(np.asarray(doc["unit_effect"], float) - space.unit_effect)) > 1e-9:
            raise ValueError("unit_effect disagrees with the geometry")
    g = doc["group"]
    if g["kind"] == "finite":
        group = TransformationGroup.finite(g["elements"])
    elif g["kind"] == "lie":
        group = TransformationGroup.lie(g["generators"])
    elif g["kind"] == "named":
        if g.get("named", "ball") != "ball":
            raise ValueError(f"unknown named group {g.get('named')!r}")
        group = TransformationGroup.ball(int(g["d"]), frame=g.get("frame"))
    else:
        raise ValueError(f"unknown group kind {g['kind']!r}")
    if group.k != space.k:
        raise ValueError("group dimension does not match k")
    eff = doc.get("effects", {"declaration": "full"})
    effects = EffectDeclaration(eff["declaration"], eff.get("list"))
    comp = doc.get("composite", {"rule": "separable"})
    composite = CompositeRule(comp["rule"], comp.get("k"))
    return Theory(doc.get("name", "unnamed"), space, group, effects, composite,
                  metadata=dict(doc.get("metadata", {})))
