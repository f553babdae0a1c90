"""Reversible dynamics: transformations, groups, invariant metrics, Bloch form."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .convex import (BallSpace, DimensionMismatchError, PolytopeSpace, QuantumSpace,
                     StateSpace, as_rng)

__all__ = [
    "expm",
    "so_basis",
    "Transformation",
    "apply",
    "TransformationGroup",
    "ClauseResult",
    "ReversibilityReport",
    "NotAnEncodingError",
    "check_reversible_pair",
    "OrbitVerdict",
    "orbit_transitive",
    "InvariantMetric",
    "NotCompactError",
    "invariant_metric",
    "BlochForm",
    "BlochFormError",
    "bloch_form",
]

# ------------------------------------------------------------------ expm

_PADE6 = np.array([factorial(12 - j) * factorial(6) / (factorial(12) * factorial(j) * factorial(6 - j))
                   for j in range(7)])
_THETA6 = 0.5  # truncation error of the [6/6] approximant below ~1e-16 here


def expm(A: np.ndarray) -> np.ndarray:
    """Matrix exponential by [6/6] Pade approximation with scaling and squaring."""
    A = np.asarray(A, dtype=float)
    norm = np.abs(A).sum(axis=0).max(initial=0.0)
    s = max(0, int(np.ceil(np.log2(norm / _THETA6)))) if norm > 0 else 0
    X = A / (2.0 ** s)
    n = A.shape[0]
    P = np.eye(n)
    N = _PADE6[0] * P
    D = _PADE6[0] * P
    for j in range(1, 7):
        P = P @ X
        N = N + _PADE6[j] * P
        D = D + ((-1) ** j) * _PADE6[j] * P
    R = np.linalg.solve(D, N)
    for _ in range(s):
        R = R @ R
    return R


def so_basis(d: int) -> list[np.ndarray]:
    out = []
    for i, j in itertools.combinations(range(d), 2):
        S = np.zeros((d, d))
        S[j, i], S[i, j] = 1.0, -1.0
        out.append(S)
    return out


def _lift(S: np.ndarray) -> np.ndarray:
    d = S.shape[0]
    M = np.zeros((d + 1, d + 1))
    M[1:, 1:] = S
    return M


def _rotation_between(a: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """A rotation in SO(d) with R a = b for unit vectors a, b (None if d = 1)."""
    d = a.size
    c = float(a @ b)
    w = b - c * a
    s = np.linalg.norm(w)
    if s < 1e-12:
        if c > 0:
            return np.eye(d)
        if d == 1:
            return None
        e = np.eye(d)[int(np.argmin(np.abs(a)))]
        e = e - (e @ a) * a
        e /= np.linalg.norm(e)
        return np.eye(d) - 2 * np.outer(a, a) - 2 * np.outer(e, e)
    v = w / s
    return (np.eye(d) + (c - 1) * (np.outer(a, a) + np.outer(v, v))
            + s * (np.outer(v, a) - np.outer(a, v)))


def _haar_so(d: int, rng: np.random.Generator) -> np.ndarray:
    Z = rng.standard_normal((d, d))
    Q, R = np.linalg.qr(Z)
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] *= -1
    return Q


# ------------------------------------------------------------------ transformations


@dataclass(frozen=True)
class Transformation:
    matrix: np.ndarray
    source: StateSpace | None = None
    target: StateSpace | None = None

    def __post_init__(self):
        M = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        object.__setattr__(self, "matrix", M)
        if self.source is not None and M.shape[1] != self.source.k:
            raise DimensionMismatchError("matrix columns do not match source dimension")
        if self.target is not None and M.shape[0] != self.target.k:
            raise DimensionMismatchError("matrix rows do not match target dimension")


def apply(T: Transformation | np.ndarray, omega, *, debug: bool = False) -> np.ndarray:
    M = T.matrix if isinstance(T, Transformation) else np.asarray(T, float)
    omega = np.asarray(omega, float)
    if omega.shape[-1] != M.shape[1]:
        raise DimensionMismatchError(f"state length {omega.shape[-1]} != {M.shape[1]}")
    out = M @ omega
    if debug and isinstance(T, Transformation) and T.target is not None:
        assert T.target.contains(out), "image left the target space"
    return out


class TransformationGroup:
    """A compact matrix group given by elements, generators or by name.

    ``kind`` is ``"finite"`` (explicit element list), ``"lie"`` (generators of
    the Lie algebra) or ``"ball"`` (block-diag(1, SO(d)), optionally conjugated
    by a frame matrix).
    """

    def __init__(self, kind: str, k: int, *, elements=None, generators=None, d: int | None = None,
                 frame=None, tol: float = 1e-9, check_closure: bool = True):
        self.kind = kind
        self.k = int(k)
        self.tol = tol
        self.d = d
        self.frame = None if frame is None else np.asarray(frame, float)
        if kind == "finite":
            E = np.asarray(elements, dtype=float)
            if E.ndim != 3 or E.shape[1:] != (self.k, self.k):
                raise DimensionMismatchError("finite group elements must be k x k")
            self.elements = E
            self.generators = None
            if check_closure:
                self._check_closure()
        elif kind == "lie":
            G = np.asarray(generators, dtype=float)
            if G.ndim != 3 or G.shape[1:] != (self.k, self.k):
                raise DimensionMismatchError("generators must be k x k")
            self.generators = G
            self.elements = None
        elif kind == "ball":
            if d is None or self.k != d + 1:
                raise ValueError("ball group needs k = d + 1")
            M = np.eye(self.k) if self.frame is None else self.frame
            Minv = np.linalg.inv(M)
            self.generators = np.array([M @ _lift(S) @ Minv for S in so_basis(d)]).reshape(-1, self.k, self.k)
            self.elements = None
        else:
            raise ValueError(f"unknown group kind {kind!r}")

    # constructors
    @classmethod
    def finite(cls, elements, **kw):
        E = np.asarray(elements, float)
        return cls("finite", E.shape[1], elements=E, **kw)

    @classmethod
    def lie(cls, generators, **kw):
        G = np.asarray(generators, float)
        return cls("lie", G.shape[1], generators=G, **kw)

    @classmethod
    def ball(cls, d: int, frame=None, **kw):
        return cls("ball", d + 1, d=d, frame=frame, **kw)

    def _check_closure(self):
        E = self.elements
        scale = 1e6
        keys = {tuple(np.round(g * scale).astype(np.int64).ravel()) for g in E}
        prods = np.einsum("aij,bjk->abik", E, E).reshape(-1, self.k, self.k)
        for p in prods:
            if tuple(np.round(p * scale).astype(np.int64).ravel()) not in keys:
                if not np.any(np.max(np.abs(E - p), axis=(1, 2)) <= 1e-8):
                    raise ValueError("finite element list is not closed under products")

    @property
    def connected(self) -> bool:
        if self.kind == "finite":
            return len(self.elements) == 1 and np.allclose(self.elements[0], np.eye(self.k))
        return True

    @property
    def continuous(self) -> bool:
        return self.kind != "finite"

    def sample(self, n: int, seed=0) -> np.ndarray:
        rng = as_rng(seed)
        if self.kind == "finite":
            return self.elements[rng.integers(0, len(self.elements), size=n)]
        if self.kind == "ball":
            M = np.eye(self.k) if self.frame is None else self.frame
            Minv = np.linalg.inv(M)
            out = np.empty((n, self.k, self.k))
            for i in range(n):
                B = np.eye(self.k)
                B[1:, 1:] = _haar_so(self.d, rng)
                out[i] = M @ B @ Minv
            return out
        m = len(self.generators)
        out = np.empty((n, self.k, self.k))
        for i in range(n):
            theta = rng.standard_normal(m) * np.pi / np.sqrt(max(m, 1))
            out[i] = expm(np.tensordot(theta, self.generators, axes=1))
        return out

    def conjugated(self, L) -> "TransformationGroup":
        """The group ``L G L^-1`` acting in the frame ``x -> L x``."""
        L = np.asarray(L, float)
        Linv = np.linalg.inv(L)
        if self.kind == "finite":
            return TransformationGroup.finite(L @ self.elements @ Linv, check_closure=False)
        if self.kind == "ball":
            M = np.eye(self.k) if self.frame is None else self.frame
            return TransformationGroup.ball(self.d, frame=L @ M)
        return TransformationGroup.lie(L @ self.generators @ Linv)

    def maps_into(self, space: StateSpace, n_elements: int = 20, n_states: int = 50, seed=0) -> bool:
        G = self.sample(n_elements, seed) if self.continuous else self.elements
        X = space.sample_states(n_states, seed)
        return all(space.contains(g @ x) for g in G for x in X)

    def describe(self) -> dict:
        if self.kind == "finite":
            return {"kind": "finite", "elements": self.elements.tolist()}
        if self.kind == "ball":
            out = {"kind": "named", "named": "ball", "d": self.d}
            if self.frame is not None:
                out["frame"] = self.frame.tolist()
            return out
        return {"kind": "lie", "generators": self.generators.tolist()}


# ------------------------------------------------------------------ encoding pairs


class NotAnEncodingError(ValueError):
    """``F o T`` differs from the identity beyond tolerance."""


@dataclass
class ClauseResult:
    clause: int
    name: str
    passed: bool
    residual: float
    witness: np.ndarray | None = None
    note: str = ""


@dataclass
class ReversibilityReport:
    clauses: list[ClauseResult]
    encoding_residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses)

    def clause(self, i: int) -> ClauseResult:
        return next(c for c in self.clauses if c.clause == i)

    def raise_for_encoding(self):
        if self.encoding_residual > self.tol:
            raise NotAnEncodingError(f"|F T - I| = {self.encoding_residual:.3g}")


def replay_clause4(T, F, witness) -> float:
    """Residual |T F w - w| at a clause-(4) witness ``w`` in T(S1)."""
    T, F = np.asarray(T, float), np.asarray(F, float)
    return float(np.max(np.abs(T @ (F @ witness) - witness)))


def check_reversible_pair(T, F, source: StateSpace, target: StateSpace, *, samples: int = 1000,
                          seed=0, tol: float | None = None) -> ReversibilityReport:
    """Evaluate the five clauses for an encoding ``T: S1 -> S2`` with decoder ``F``."""
    T = np.atleast_2d(np.asarray(T, float))
    F = np.atleast_2d(np.asarray(F, float))
    k1, k2 = source.k, target.k
    if T.shape != (k2, k1) or F.shape != (k1, k2):
        raise DimensionMismatchError(f"expected T {(k2, k1)} and F {(k1, k2)}, got {T.shape}, {F.shape}")
    tol = max(source.tol, target.tol) if tol is None else tol
    U1, U2 = source.unit_effect, target.unit_effect
    S1 = np.vstack([source.spanning_states(), source.sample_states(samples, seed)])
    img = S1 @ T.T
    out = []

    def worst(res, pts):
        i = int(np.argmax(res))
        return float(res[i]), pts[i]

    out.append(ClauseResult(1, "k1 <= k2", k1 <= k2, float(max(0, k1 - k2))))

    span = source.spanning_states()
    r, w = worst(np.abs(span @ T.T @ U2 - span @ U1), span)
    out.append(ClauseResult(2, "U2 T = U1", r <= tol, r, None if r <= tol else w))

    r, w = worst(np.abs(img @ F.T @ U1 - img @ U2), img)
    out.append(ClauseResult(3, "U1 F = U2 on T(S1)", r <= tol, r, None if r <= tol else w))

    r, w = worst(np.max(np.abs(img @ F.T @ T.T - img), axis=1), img)
    out.append(ClauseResult(4, "T F = I on T(S1)", r <= tol, r, None if r <= tol else w))

    if k1 == k2:
        bad = None
        for x in img[: min(len(img), 300)]:
            if not target.contains(x):
                bad = x
                break
        if bad is None:
            S2 = np.vstack([target.sample_pure(100, seed), target.sample_states(200, seed + 1)])
            for y in S2:
                if not source.contains(F @ y):
                    bad = y
                    break
        out.append(ClauseResult(5, "T(S1) = S2", bad is None, 0.0 if bad is None else 1.0, bad))
    else:
        out.append(ClauseResult(5, "T(S1) = S2", True, 0.0, note="not applicable: k1 < k2"))
    enc = float(np.max(np.abs(F @ T - np.eye(k1))))
    return ReversibilityReport(out, enc, tol)


# ------------------------------------------------------------------ transitivity


@dataclass
class OrbitVerdict:
    passed: bool
    pairs_checked: int
    max_residual: float
    witness: tuple[np.ndarray, np.ndarray] | None = None
    method: str = ""


def _reference_pairs(space: StateSpace) -> list[tuple[np.ndarray, np.ndarray]]:
    if isinstance(space, BallSpace):
        e = np.zeros(space.k)
        e[0] = 1.0
        a, b = e.copy(), e.copy()
        a[-1], b[-1] = 1.0, -1.0
        return [(space.frame @ a, space.frame @ b)]
    if isinstance(space, QuantumSpace):
        r0 = np.zeros((space.dim, space.dim))
        r1 = r0.copy()
        r0[0, 0] = r1[-1, -1] = 1.0
        return [(space.coefficients(r0), space.coefficients(r1))]
    return []


def _newton_reach(gens: np.ndarray, w1, w2, rng, starts: int = 4, iters: int = 60) -> float:
    scale = max(1.0, np.linalg.norm(w2))
    best = np.inf
    m = len(gens)
    for s in range(starts):
        if s == 0:
            G = np.eye(len(w1))
        else:
            G = expm(np.tensordot(rng.standard_normal(m) * np.pi / np.sqrt(m), gens, axes=1))
        res = np.linalg.norm(w2 - G @ w1)
        for _ in range(iters):
            if res < 1e-13 * scale:
                break
            v = G @ w1
            J = np.einsum("mij,j->im", gens, v)
            delta = np.linalg.lstsq(J, w2 - v, rcond=None)[0]
            t = 1.0
            improved = False
            for _ in range(12):
                Gn = expm(np.tensordot(t * delta, gens, axes=1)) @ G
                rn = np.linalg.norm(w2 - Gn @ w1)
                if rn < res:
                    G, res, improved = Gn, rn, True
                    break
                t /= 2
            if not improved:
                break
        best = min(best, res / scale)
        if best < 1e-10:
            break
    return float(best)


def orbit_transitive(group: TransformationGroup, space: StateSpace, seed=0, samples: int = 200,
                     *, tol: float = 1e-7, lie_pair_cap: int = 256) -> OrbitVerdict:
    """Test transitivity of ``group`` on the pure states of ``space``.

    Polytopes are checked over all vertex pairs. Otherwise the reference
    antipodal pair comes first, followed by ``samples`` random pure pairs.
    """
    rng = as_rng(seed)
    ext = space.extreme_points()
    if ext.finite:
        P = ext.points
        pairs = [(P[i], P[j]) for i in range(len(P)) for j in range(len(P)) if i != j]
    else:
        pairs = _reference_pairs(space)
        A = space.sample_pure(samples, rng)
        B = space.sample_pure(samples, rng)
        pairs += list(zip(A, B))
    if group.kind == "lie":
        pairs = pairs[:lie_pair_cap]
    worst = 0.0
    for w1, w2 in pairs:
        scale = max(1.0, np.linalg.norm(w2))
        if group.kind == "finite":
            r = float(np.min(np.linalg.norm(group.elements @ w1 - w2, axis=1)) / scale)
            limit = max(tol, 10 * space.tol)
        elif group.kind == "ball":
            M = np.eye(group.k) if group.frame is None else group.frame
            Minv = np.linalg.inv(M)
            y1, y2 = Minv @ w1, Minv @ w2
            r = np.inf
            n1, n2 = np.linalg.norm(y1[1:]), np.linalg.norm(y2[1:])
            if abs(y1[0] - y2[0]) < tol and n1 > 0 and n2 > 0 and abs(n1 - n2) < tol * scale:
                R = _rotation_between(y1[1:] / n1, y2[1:] / n2)
                if R is not None:
                    B = np.eye(group.k)
                    B[1:, 1:] = R
                    r = float(np.linalg.norm(M @ B @ y1 - w2) / scale)
            limit = tol
        else:
            r = _newton_reach(group.generators, w1, w2, rng)
            limit = tol
        worst = max(worst, r)
        if r > limit:
            return OrbitVerdict(False, len(pairs), worst, (w1, w2), group.kind)
    method = {"finite": "exhaustive over elements", "ball": "constructive rotation",
              "lie": "tangent least squares with refinement"}[group.kind]
    return OrbitVerdict(True, len(pairs), worst, None, method)


# ------------------------------------------------------------------ invariant metric


class NotCompactError(ValueError):
    """No positive-definite invariant form exists."""


@dataclass
class InvariantMetric:
    W: np.ndarray
    r: float | None = None
    spread: float | None = None
    W2: np.ndarray = field(default=None, repr=False)


def _sym_basis(k: int) -> np.ndarray:
    out = []
    for i in range(k):
        for j in range(i, k):
            B = np.zeros((k, k))
            if i == j:
                B[i, i] = 1.0
            else:
                B[i, j] = B[j, i] = 1 / np.sqrt(2)
            out.append(B)
    return np.array(out)


def _haar_average_by_splitting(ops: list, k: int) -> np.ndarray:
    """Project I onto the invariant forms along the coinvariant subspace.

    ``ops`` are linear maps on symmetric matrices whose common kernel is the
    invariant space and whose joint image is its Haar-complement; the Haar
    average of G^T G equals the invariant component of I.
    """
    basis = _sym_basis(k)
    flat = basis.reshape(len(basis), -1)
    mats = [np.array([flat @ op(B).ravel() for B in basis]).T for op in ops]
    stacked = np.vstack(mats)
    _, s, vt = np.linalg.svd(stacked)
    tol = 1e-9 * max(1.0, s.max(initial=0.0))
    rank = int((s > tol).sum())
    fix = vt[rank:].T
    img = np.hstack(mats)
    u, s2, _ = np.linalg.svd(img, full_matrices=False)
    coinv = u[:, s2 > 1e-9 * max(1.0, s2.max(initial=0.0))]
    if fix.shape[1] + coinv.shape[1] != len(basis):
        raise NotCompactError("invariant and coinvariant forms do not split the symmetric matrices")
    target = flat @ np.eye(k).ravel()
    coef = np.linalg.solve(np.hstack([fix, coinv]), target)
    W2 = np.tensordot(fix @ coef[: fix.shape[1]], basis, axes=1)
    return (W2 + W2.T) / 2


def invariant_metric(group: TransformationGroup, space: StateSpace | None = None, *,
                     method: str = "auto", samples: int = 64, seed=0) -> InvariantMetric:
    """Positive matrix W with W^2 equal to the Haar average of G^T G.

    ``method="average"`` sums over a finite element list; ``"commutant"`` solves
    the linear invariance system. ``"auto"`` uses the exact sum for finite
    groups and the linear system otherwise. When ``space`` is given, the common
    pure-state norm ``r = |W w|`` and its relative spread are reported.
    """
    k = group.k
    if method == "auto":
        method = "average" if group.kind == "finite" else "commutant"
    if method == "average":
        if group.kind != "finite":
            raise ValueError("exact averaging needs a finite group")
        W2 = np.mean(np.einsum("gji,gjk->gik", group.elements, group.elements), axis=0)
    elif method == "commutant":
        if group.kind == "finite":
            ops = [lambda X, G=G: G.T @ X @ G - X for G in group.elements]
            W2 = _haar_average_by_splitting(ops, k)
        elif np.all(np.abs(group.generators + group.generators.transpose(0, 2, 1)) < 1e-12):
            W2 = np.eye(k)
        else:
            ops = [lambda X, H=H: H.T @ X + X @ H for H in group.generators]
            W2 = _haar_average_by_splitting(ops, k)
    else:
        raise ValueError(f"unknown method {method!r}")
    ev, V = np.linalg.eigh(W2)
    if ev.min() <= 1e-12 * max(1.0, ev.max()):
        raise NotCompactError("invariant form is not positive definite")
    W = (V * np.sqrt(ev)) @ V.T
    out = InvariantMetric(W=W, W2=W2)
    if space is not None:
        P = space.sample_pure(samples, seed)
        norms = np.linalg.norm(P @ W.T, axis=1)
        out.r = float(norms.mean())
        out.spread = float((norms.max() - norms.min()) / out.r)
    return out


# ------------------------------------------------------------------ Bloch form


class BlochFormError(ValueError):
    """Upstream assumptions of the Bloch reparametrization are violated."""


@dataclass
class BlochForm:
    space: StateSpace
    group: TransformationGroup
    L: np.ndarray
    metric: InvariantMetric
    residuals: dict


def _fixed_space(group: TransformationGroup, L: np.ndarray) -> np.ndarray:
    Linv = np.linalg.inv(L)
    if group.kind == "finite":
        ops = [L @ g @ Linv - np.eye(group.k) for g in group.elements]
    else:
        ops = [L @ h @ Linv for h in group.generators]
    A = np.vstack(ops) if ops else np.zeros((1, group.k))
    _, s, vt = np.linalg.svd(A)
    rank = int((s > 1e-8 * max(1.0, s.max(initial=0.0))).sum())
    return vt[rank:].T


def bloch_form(space: StateSpace, group: TransformationGroup, *, samples: int = 64, seed=0,
               spread_tol: float = 1e-8) -> BlochForm:
    """Reparametrize to (u, u*w) with U = (1, 0) and an orthogonal Bloch block."""
    if space.k != group.k:
        raise DimensionMismatchError("group and space dimensions differ")
    metric = invariant_metric(group, space, samples=samples, seed=seed)
    if metric.spread > spread_tol:
        raise BlochFormError(f"pure-state norms not equalized (relative spread {metric.spread:.3g})")
    L1 = np.sqrt(2) / metric.r * metric.W
    fixed = _fixed_space(group, L1)
    if fixed.shape[1] != 1:
        raise BlochFormError(f"trivial representation multiplicity {fixed.shape[1]} != 1")
    nvec = np.linalg.solve(L1.T, space.unit_effect)
    nn = np.linalg.norm(nvec)
    nhat = nvec / nn
    v = nhat.copy()
    v[0] -= 1.0
    Q = np.eye(space.k) if np.linalg.norm(v) < 1e-14 else np.eye(space.k) - 2 * np.outer(v, v) / (v @ v)
    P = space.sample_pure(samples, seed + 1) @ (Q @ L1).T
    rho = np.linalg.norm(P[:, 1:], axis=1)
    S = np.diag(np.concatenate([[nn], np.full(space.k - 1, 1 / rho.mean())]))
    L = S @ Q @ L1
    new_space = space.transformed(L)
    new_group = group.conjugated(L)
    pure = space.sample_pure(samples, seed + 2) @ L.T
    Linv = np.linalg.inv(L)
    res = {
        "unit_effect": float(np.max(np.abs(space.unit_effect @ Linv - np.eye(space.k)[0]))),
        "pure_norm": float(np.max(np.abs(np.linalg.norm(pure, axis=1) - np.sqrt(2)))),
        "bloch_radius": float(np.max(np.abs(np.linalg.norm(pure[:, 1:], axis=1) - 1.0))),
        "fixed_direction": float(np.linalg.norm(fixed[:, 0] - (fixed[:, 0] @ nhat) * nhat)),
    }
    G = new_group.sample(8, seed) if new_group.continuous else new_group.elements
    block = np.abs(G[:, 0, 1:]).max(initial=0.0) + np.abs(G[:, 1:, 0]).max(initial=0.0)
    orth = np.abs(np.einsum("gji,gjk->gik", G[:, 1:, 1:], G[:, 1:, 1:]) - np.eye(space.k - 1)).max()
    res["group_block"] = float(block)
    res["group_orthogonality"] = float(orth)
    return BlochForm(new_space, new_group, L, metric, res)
