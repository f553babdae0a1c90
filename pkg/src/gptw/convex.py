"""State spaces, effects, measurements and the primitives built on them.

Three geometries are supported:

* ``PolytopeSpace`` -- finitely many normalized extreme points (``simplex(n)``
  is the special case of the standard basis in the fiducial frame).
* ``BallSpace`` -- the d-ball in the Bloch frame ``(u, u*w)``, optionally seen
  through an invertible frame matrix ``M`` (actual coords = ``M @ canonical``).
* ``QuantumSpace`` -- n qubits in the real Pauli-word coefficient frame, where
  ``x[P] = tr(rho P)`` and the identity-word coefficient equals ``u``.

States and effects are plain ``numpy`` vectors of length ``k``; an effect acts
on a state through the Euclidean dot product.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Callable, Iterator, Sequence

import numpy as np

from .lp import feasible_combination, linprog

__all__ = [
    "DEFAULT_TOL",
    "DimensionMismatchError",
    "UnsupportedGeometryError",
    "EmptyFaceError",
    "ExtremeSet",
    "Measurement",
    "Distinguishability",
    "StateSpace",
    "PolytopeSpace",
    "BallSpace",
    "QuantumSpace",
    "simplex",
    "pauli_basis",
    "as_rng",
    "membership",
    "decompose",
    "is_valid_effect",
    "extreme_points",
    "max_distinguishable",
    "face_of_effect",
    "mix",
]

DEFAULT_TOL = 1e-9


class DimensionMismatchError(ValueError):
    """A vector or matrix does not match the ambient dimension ``k``."""


class UnsupportedGeometryError(ValueError):
    """The requested operation is not defined for this geometry kind."""


class EmptyFaceError(ValueError):
    """An effect never reaches the value 1 on the normalized states."""


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _unit_vectors(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal((n, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


@dataclass(frozen=True)
class ExtremeSet:
    """Extreme points of N, either listed or described symbolically.

    ``points`` is set when the set is finite; otherwise ``sampler(n, rng)``
    draws points from the (infinite) family named by ``description``.
    """

    description: str
    points: np.ndarray | None = None
    sampler: Callable[[int, np.random.Generator], np.ndarray] | None = field(
        default=None, repr=False, compare=False)

    @property
    def finite(self) -> bool:
        return self.points is not None

    def sample(self, n: int, seed=0) -> np.ndarray:
        rng = as_rng(seed)
        if self.finite:
            return self.points[rng.integers(0, len(self.points), size=n)]
        return self.sampler(n, rng)

    def __len__(self) -> int:
        if not self.finite:
            raise TypeError(f"infinite extreme set: {self.description}")
        return len(self.points)

    def __iter__(self) -> Iterator[np.ndarray]:
        if not self.finite:
            raise TypeError(f"infinite extreme set: {self.description}")
        return iter(self.points)


@dataclass(frozen=True)
class Measurement:
    """An ordered list of effects (rows of ``effects``)."""

    effects: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "effects", np.atleast_2d(np.asarray(self.effects, float)))

    def __len__(self) -> int:
        return len(self.effects)

    def probabilities(self, x) -> np.ndarray:
        return self.effects @ np.asarray(x, float)

    def is_complete(self, space: "StateSpace") -> bool:
        total = self.effects.sum(axis=0)
        return bool(np.max(np.abs(total - space.unit_effect)) <= space.tol * max(1, len(self)))

    def is_valid(self, space: "StateSpace") -> bool:
        return self.is_complete(space) and all(space.is_valid_effect(E) for E in self.effects)


@dataclass(frozen=True)
class Distinguishability:
    c: int
    measurement: Measurement | None
    subset: tuple[int, ...]
    lower_bound: bool = False


class StateSpace:
    """Base class. Subclasses provide the geometry-specific primitives."""

    kind = "abstract"
    k: int
    tol: float

    @property
    def unit_effect(self) -> np.ndarray:
        raise NotImplementedError

    def check_dim(self, v, what="vector") -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.ndim != 1 or v.shape[0] != self.k:
            raise DimensionMismatchError(f"{what} has shape {v.shape}, expected ({self.k},)")
        return v

    def contains(self, x) -> bool:
        raise NotImplementedError

    def effect_range(self, E) -> tuple[float, float]:
        """Minimum and maximum of ``E`` over S (the zero state included)."""
        raise NotImplementedError

    def is_valid_effect(self, E) -> bool:
        lo, hi = self.effect_range(E)
        return lo >= -self.tol and hi <= 1 + self.tol

    def extreme_points(self) -> ExtremeSet:
        raise NotImplementedError

    def sample_pure(self, n: int, seed=0) -> np.ndarray:
        return self.extreme_points().sample(n, seed)

    def sample_states(self, n: int, seed=0) -> np.ndarray:
        raise NotImplementedError

    def face(self, E) -> ExtremeSet:
        raise NotImplementedError

    def transformed(self, L) -> "StateSpace":
        """The image space ``L(S)`` for an invertible ``k x k`` matrix ``L``."""
        raise NotImplementedError

    def distinguishing_measurement(self, states: np.ndarray) -> Measurement | None:
        raise NotImplementedError

    def spanning_states(self) -> np.ndarray:
        """A finite set of states whose span is R^k."""
        pts = self.sample_pure(4 * self.k + 8, seed=12345)
        return pts

    def describe(self) -> dict:
        raise NotImplementedError


# ---------------------------------------------------------------- polytopes


class PolytopeSpace(StateSpace):
    kind = "polytope"

    def __init__(self, vertices, unit_effect, tol: float = DEFAULT_TOL, name: str | None = None):
        V = np.atleast_2d(np.asarray(vertices, dtype=float))
        U = np.asarray(unit_effect, dtype=float).ravel()
        if V.shape[1] != U.size:
            raise DimensionMismatchError("vertex length differs from unit effect length")
        self.k = U.size
        self.tol = float(tol)
        self.vertices = V
        self._U = U
        self.name = name
        dev = np.abs(V @ U - 1.0)
        if dev.max() > 1e3 * self.tol:
            raise ValueError("listed extreme points must satisfy U(v) = 1")
        if np.linalg.matrix_rank(V, tol=1e-9 * max(1.0, np.abs(V).max())) < self.k:
            raise ValueError("vertices do not span R^k (k must equal dim S)")

    @property
    def unit_effect(self) -> np.ndarray:
        return self._U

    def contains(self, x) -> bool:
        x = self.check_dim(x)
        u = float(self._U @ x)
        if u < -self.tol or u > 1 + self.tol:
            return False
        scale = max(1.0, float(np.abs(x).sum()))
        _, resid = feasible_combination(self.vertices.T, x, total="le", tol=self.tol * 1e-2)
        return resid <= self.tol * scale

    def effect_range(self, E):
        E = self.check_dim(E, "effect")
        vals = self.vertices @ E
        return min(0.0, float(vals.min())), max(0.0, float(vals.max()))

    @cached_property
    def _reduced(self) -> np.ndarray:
        V = self.vertices
        # drop exact duplicates first, then LP-redundant points
        uniq = []
        for v in V:
            if not any(np.max(np.abs(v - w)) <= self.tol for w in uniq):
                uniq.append(v)
        V = np.array(uniq)
        keep = []
        for i in range(len(V)):
            others = np.delete(V, i, axis=0)
            if len(others) == 0:
                keep.append(i)
                continue
            _, resid = feasible_combination(others.T, V[i], total="eq", tol=self.tol * 1e-2)
            if resid > self.tol * max(1.0, float(np.abs(V[i]).sum())):
                keep.append(i)
        return V[keep]

    def extreme_points(self) -> ExtremeSet:
        return ExtremeSet(f"{len(self._reduced)} vertices", points=self._reduced.copy())

    def sample_pure(self, n, seed=0):
        return self.extreme_points().sample(n, seed)

    def sample_states(self, n, seed=0):
        rng = as_rng(seed)
        V = self._reduced
        w = rng.dirichlet(np.ones(len(V)), size=n)
        u = rng.uniform(0, 1, size=(n, 1))
        return u * (w @ V)

    def spanning_states(self):
        return self._reduced.copy()

    def face(self, E) -> ExtremeSet:
        E = self.check_dim(E, "effect")
        V = self._reduced
        vals = V @ E
        hit = vals >= 1 - self.tol
        if not hit.any():
            raise EmptyFaceError(f"effect maximum on N is {vals.max():.6g} < 1")
        return ExtremeSet(f"{int(hit.sum())} vertices", points=V[hit].copy())

    def transformed(self, L):
        L = np.asarray(L, float)
        return PolytopeSpace(self.vertices @ L.T, self._U @ np.linalg.inv(L), tol=self.tol, name=self.name)

    def affine_frame(self):
        """Centroid and orthonormal basis of the affine hull of N."""
        V = self._reduced
        c = V.mean(axis=0)
        _, s, vt = np.linalg.svd(V - c, full_matrices=False)
        r = int((s > 1e-9 * max(1.0, s.max(initial=0.0))).sum())
        return c, vt[:r].T

    def facets(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Facet-supporting effects of N with the vertex indices on each facet.

        Each effect equals 1 on its facet and attains 0 on N. Only defined
        when dim N >= 1; a segment's facets are its two endpoints.
        """
        V = self._reduced
        c, B = self.affine_frame()
        r = B.shape[1]
        if r == 0:
            return []
        Y = (V - c) @ B
        if r == 1:
            normals = [np.array([1.0]), np.array([-1.0])]
            offsets = [-Y[:, 0].max(), Y[:, 0].min()]
        else:
            from scipy.spatial import ConvexHull

            hull = ConvexHull(Y)
            eqs = hull.equations.copy()
            eqs /= np.linalg.norm(eqs[:, :-1], axis=1, keepdims=True)
            uniq = []
            for e in eqs:
                if not any(np.max(np.abs(e - f)) < 1e-8 for f in uniq):
                    uniq.append(e)
            normals = [e[:-1] for e in uniq]
            offsets = [e[-1] for e in uniq]
        out = []
        for a, b in zip(normals, offsets):
            g = -(Y @ a + b)  # >= 0 on N, zero on the facet
            gmax = g.max()
            on = np.flatnonzero(np.abs(g) <= 1e-9 * max(1.0, gmax))
            # g(v) = lin.v + const on N; extend linearly through U, then
            # E = U - g/gmax.
            lin = -(B @ a)
            const = float(a @ (B.T @ c)) - b
            E = self._U - (lin + const * self._U) / gmax
            E[np.abs(E) < 1e-13] = 0.0
            out.append((E, on))
        return out

    def distinguishing_measurement(self, states):
        states = np.atleast_2d(states)
        c, k = len(states), self.k
        V = self._reduced
        nv = c * k
        # variables E = P - N, P, N >= 0, stacked effect by effect
        A_eq, b_eq = [], []
        for i in range(c):
            for j in range(c):
                row = np.zeros(nv)
                row[i * k:(i + 1) * k] = states[j]
                A_eq.append(row)
                b_eq.append(1.0 if i == j else 0.0)
        for t in range(k):
            row = np.zeros(nv)
            row[t::k] = 1.0
            A_eq.append(row)
            b_eq.append(self._U[t])
        A_ub, b_ub = [], []
        for i in range(c):
            for v in V:
                row = np.zeros(nv)
                row[i * k:(i + 1) * k] = -v
                A_ub.append(row)
                b_ub.append(0.0)
        A_eq, A_ub = np.array(A_eq), np.array(A_ub)
        res = linprog(np.zeros(2 * nv), A_ub=np.hstack([A_ub, -A_ub]), b_ub=b_ub,
                      A_eq=np.hstack([A_eq, -A_eq]), b_eq=b_eq, tol=self.tol * 1e-2)
        if not res.success:
            return None
        E = (res.x[:nv] - res.x[nv:]).reshape(c, k)
        return Measurement(E)

    def describe(self):
        return {"kind": "polytope", "vertices": self.vertices.tolist()}


def simplex(n: int, tol: float = DEFAULT_TOL) -> PolytopeSpace:
    """Classical n-outcome system in the fiducial frame."""
    if n < 1:
        raise ValueError("simplex needs n >= 1")
    return PolytopeSpace(np.eye(n), np.ones(n), tol=tol, name=f"simplex({n})")


# ---------------------------------------------------------------- balls


class BallSpace(StateSpace):
    kind = "ball"

    def __init__(self, d: int, frame=None, tol: float = DEFAULT_TOL):
        if d < 1:
            raise ValueError("ball dimension must be >= 1")
        self.d = int(d)
        self.k = self.d + 1
        self.tol = float(tol)
        M = np.eye(self.k) if frame is None else np.asarray(frame, dtype=float)
        if M.shape != (self.k, self.k):
            raise DimensionMismatchError("frame must be k x k")
        self.frame = M
        self.frame_inv = np.linalg.inv(M)

    @property
    def unit_effect(self):
        return self.frame_inv[0].copy()

    def canonical(self, x) -> np.ndarray:
        return self.frame_inv @ np.asarray(x, float)

    def contains(self, x):
        y = self.canonical(self.check_dim(x))
        u = y[0]
        return bool(-self.tol <= u <= 1 + self.tol and np.linalg.norm(y[1:]) <= u + self.tol)

    def effect_range(self, E):
        Ec = self.check_dim(E, "effect") @ self.frame
        e, r = Ec[0], np.linalg.norm(Ec[1:])
        return min(0.0, float(e - r)), max(0.0, float(e + r))

    def _sphere(self, n, rng):
        w = _unit_vectors(n, self.d, rng)
        return np.hstack([np.ones((n, 1)), w]) @ self.frame.T

    def extreme_points(self):
        return ExtremeSet(f"unit sphere S^{self.d - 1}", sampler=self._sphere)

    def sample_states(self, n, seed=0):
        rng = as_rng(seed)
        w = _unit_vectors(n, self.d, rng) * rng.uniform(0, 1, size=(n, 1)) ** (1 / self.d)
        u = rng.uniform(0, 1, size=(n, 1))
        return u * np.hstack([np.ones((n, 1)), w]) @ self.frame.T

    def spanning_states(self):
        I = np.eye(self.d)
        Y = np.vstack([np.hstack([np.ones((self.d, 1)), I]), np.hstack([np.ones((self.d, 1)), -I])])
        return Y @ self.frame.T

    def face(self, E):
        E = self.check_dim(E, "effect")
        Ec = E @ self.frame
        e, Eh = Ec[0], Ec[1:]
        r = np.linalg.norm(Eh)
        if e + r < 1 - self.tol:
            raise EmptyFaceError(f"effect maximum on N is {e + r:.6g} < 1")
        if r <= self.tol:
            return ExtremeSet(f"unit sphere S^{self.d - 1}", sampler=self._sphere)
        pt = self.frame @ np.concatenate([[1.0], Eh / r])
        return ExtremeSet("1 point", points=pt[None, :])

    def transformed(self, L):
        return BallSpace(self.d, np.asarray(L, float) @ self.frame, tol=self.tol)

    def distinguishing_measurement(self, states):
        states = np.atleast_2d(states)
        Y = states @ self.frame_inv.T
        if len(Y) == 1:
            return Measurement(self.unit_effect[None, :])
        if len(Y) != 2:
            return None
        a, b = Y[0, 1:], Y[1, 1:]
        if abs(np.linalg.norm(a) - 1) > self.tol or np.linalg.norm(a + b) > self.tol:
            return None
        Ec = np.array([np.concatenate([[0.5], a / 2]), np.concatenate([[0.5], -a / 2])])
        return Measurement(Ec @ self.frame_inv)

    def describe(self):
        out = {"kind": "ball", "d": self.d}
        if not np.allclose(self.frame, np.eye(self.k), atol=0, rtol=0):
            out["frame"] = self.frame.tolist()
        return out


# ---------------------------------------------------------------- quantum

_PAULI_1 = np.array([
    [[1, 0], [0, 1]],
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)

_pauli_cache: dict[int, np.ndarray] = {}


def pauli_basis(n: int) -> np.ndarray:
    """Tensor Pauli words, shape ``(4**n, 2**n, 2**n)``, first factor slowest."""
    if n not in _pauli_cache:
        words = [reduce(np.kron, w, np.eye(1)) for w in itertools.product(_PAULI_1, repeat=n)]
        _pauli_cache[n] = np.array(words)
    return _pauli_cache[n]


class QuantumSpace(StateSpace):
    kind = "quantum"

    def __init__(self, n: int, tol: float = DEFAULT_TOL):
        if not 1 <= n <= 3:
            raise ValueError("quantum spaces support 1 <= n <= 3 qubits")
        self.n = int(n)
        self.dim = 2 ** self.n
        self.k = 4 ** self.n
        self.tol = float(tol)
        self.paulis = pauli_basis(self.n)

    @property
    def unit_effect(self):
        U = np.zeros(self.k)
        U[0] = 1.0
        return U

    def density(self, x) -> np.ndarray:
        x = self.check_dim(x)
        return np.einsum("p,pij->ij", x, self.paulis) / self.dim

    def operator(self, E) -> np.ndarray:
        """Measurement operator M with E(x) = tr(M rho)."""
        return np.einsum("p,pij->ij", self.check_dim(E, "effect"), self.paulis)

    def coefficients(self, rho) -> np.ndarray:
        return np.real(np.einsum("pij,ji->p", self.paulis, rho))

    def effect_coefficients(self, M) -> np.ndarray:
        return self.coefficients(M) / self.dim

    def contains(self, x):
        rho = self.density(x)
        ev = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
        return bool(ev.min() >= -self.tol and ev.sum() <= 1 + self.tol)

    def effect_range(self, E):
        ev = np.linalg.eigvalsh(self.operator(E))
        return min(0.0, float(ev[0])), max(0.0, float(ev[-1]))

    def _pure(self, n, rng):
        psi = rng.standard_normal((n, self.dim)) + 1j * rng.standard_normal((n, self.dim))
        psi /= np.linalg.norm(psi, axis=1, keepdims=True)
        return np.real(np.einsum("ni,pij,nj->np", psi.conj(), self.paulis, psi))

    def extreme_points(self):
        return ExtremeSet("rank-one projectors", sampler=self._pure)

    def sample_states(self, n, seed=0):
        rng = as_rng(seed)
        m = self.dim + 1
        P = self._pure(n * m, rng).reshape(n, m, self.k)
        w = rng.dirichlet(np.ones(m), size=n)
        u = rng.uniform(0, 1, size=(n, 1))
        return u * np.einsum("nm,nmk->nk", w, P)

    def spanning_states(self):
        return self._pure(2 * self.k, np.random.default_rng(12345))

    def face(self, E):
        ev, V = np.linalg.eigh(self.operator(E))
        sel = ev >= 1 - self.tol
        if not sel.any():
            raise EmptyFaceError(f"effect maximum on N is {ev[-1]:.6g} < 1")
        Q = V[:, sel]
        if Q.shape[1] == 1:
            q = Q[:, 0]
            return ExtremeSet("1 point", points=self.coefficients(np.outer(q, q.conj()))[None, :])

        def sampler(n, rng, Q=Q):
            c = rng.standard_normal((n, Q.shape[1])) + 1j * rng.standard_normal((n, Q.shape[1]))
            psi = c @ Q.T
            psi /= np.linalg.norm(psi, axis=1, keepdims=True)
            return np.real(np.einsum("ni,pij,nj->np", psi.conj(), self.paulis, psi))

        return ExtremeSet(f"rank-one projectors onto a {Q.shape[1]}-dimensional subspace", sampler=sampler)

    def transformed(self, L):
        if self.n != 1:
            raise UnsupportedGeometryError("only single-qubit spaces can be reparametrized as balls")
        return BallSpace(3, np.asarray(L, float), tol=self.tol)

    def distinguishing_measurement(self, states):
        states = np.atleast_2d(states)
        rhos = [self.density(s) for s in states]
        for i, j in itertools.combinations(range(len(rhos)), 2):
            if abs(np.trace(rhos[i] @ rhos[j])) > self.tol:
                return None
        projs = []
        for rho in rhos:
            ev, V = np.linalg.eigh((rho + rho.conj().T) / 2)
            Q = V[:, ev > self.tol]
            projs.append(Q @ Q.conj().T)
        projs[-1] = np.eye(self.dim) - sum(projs[:-1], np.zeros((self.dim, self.dim)))
        return Measurement(np.array([self.effect_coefficients(P) for P in projs]))

    def describe(self):
        return {"kind": "quantum", "n": self.n}


# ---------------------------------------------------------------- operations


def membership(space: StateSpace, x) -> bool:
    """Whether ``x`` lies in conv({0} u N) within ``space.tol``."""
    if not isinstance(space, StateSpace):
        raise UnsupportedGeometryError(f"unsupported geometry {type(space).__name__}")
    return space.contains(x)


def decompose(space: StateSpace, x) -> tuple[float, np.ndarray | None]:
    """Split a state into its normalization ``u = U(x)`` and ``x / u``."""
    x = space.check_dim(x)
    u = float(space.unit_effect @ x)
    if u <= space.tol:
        return max(u, 0.0), None
    return u, x / u


def is_valid_effect(space: StateSpace, E) -> bool:
    return space.is_valid_effect(E)


def extreme_points(space: StateSpace) -> ExtremeSet:
    return space.extreme_points()


def face_of_effect(space: StateSpace, E) -> ExtremeSet:
    """Extreme points where ``E`` equals 1. Raises ``EmptyFaceError`` if none."""
    return space.face(E)


def mix(states: Sequence, weights: Sequence[float]) -> np.ndarray:
    states = np.atleast_2d(np.asarray(states, dtype=float))
    w = np.asarray(weights, dtype=float).ravel()
    if len(w) != len(states):
        raise DimensionMismatchError(f"{len(w)} weights for {len(states)} states")
    if np.any(w < 0) or w.sum() > 1 + 1e-12:
        raise ValueError("weights must be nonnegative and sum to at most 1")
    return w @ states


def max_distinguishable(space: StateSpace, candidates, *, exhaustive_limit: int = 12) -> Distinguishability:
    """Largest perfectly distinguishable subset of ``candidates``.

    Subsets are searched exhaustively (largest first) up to
    ``exhaustive_limit`` candidates; beyond that a greedy pass is used and the
    result is marked ``lower_bound``.
    """
    C = np.atleast_2d(np.asarray(candidates, dtype=float))
    for x in C:
        space.check_dim(x)
    n = len(C)
    if n == 0:
        return Distinguishability(0, None, ())

    def verified(idx):
        meas = space.distinguishing_measurement(C[list(idx)])
        if meas is None:
            return None
        P = meas.effects @ C[list(idx)].T
        ok = (meas.is_valid(space)
              and np.max(np.abs(P - np.eye(len(idx)))) <= 10 * space.tol * max(1, space.k))
        return meas if ok else None

    if n <= exhaustive_limit:
        for size in range(n, 0, -1):
            for idx in itertools.combinations(range(n), size):
                meas = verified(idx)
                if meas is not None:
                    return Distinguishability(size, meas, idx)
        return Distinguishability(0, None, ())
    chosen: list[int] = []
    best = None
    for i in range(n):
        meas = verified(chosen + [i])
        if meas is not None:
            chosen.append(i)
            best = meas
    return Distinguishability(len(chosen), best, tuple(chosen), lower_bound=True)
