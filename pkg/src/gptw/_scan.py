"""Bipartite generator scan for two d-ball gbits.

Unknown: a real K x K matrix H (K = (d+1)^2) acting on Kronecker-ordered
two-gbit vectors. Reversible dynamics exp(tH) must keep every probability
(E x E')(exp(tH) w x w') in [0, 1]. Where the value sits at 0 or 1 for a
product of pure states, the first derivative must vanish, which gives linear
equations in H:

* U_AB H = 0 (determinism),
* (E x E') H (w x w') = 0 for the aligned effects E = w/2, E' = w'/2, and for
  the antipodal effects with E = (-w)/2 on A or E' = (-w')/2 on B and any pure
  effect on the other side.

The null space of these equations contains the local algebra so(d) + so(d).
Its complement is split into isotypic components of the local group. An
irreducible component (multiplicity one) is discarded when it violates the
second-order condition at some tangency point, or when it fails to close
under commutators inside the null space; components with multiplicity above
one are retained. The retained dimension is therefore an upper bound on the
consistent algebra.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.stats import norm, qmc

from .groups import _lift, so_basis

SVD_REL = 1e-7


def sphere_points(n: int, d: int, seed: int) -> np.ndarray:
    """Deterministic low-discrepancy points on S^{d-1} (scrambled Halton)."""
    u = qmc.Halton(d, scramble=True, seed=seed).random(n)
    x = norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def _axis_pairs(d: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    ax = np.vstack([np.eye(d), -np.eye(d)])
    X, Y = [], []
    for x, y in itertools.product(ax, ax):
        X.append(x)
        Y.append(y)
    X, Y = np.array(X), np.array(Y)
    B = np.roll(Y, 1, axis=1)
    return X, Y, B


def _ext(X: np.ndarray) -> np.ndarray:
    return np.hstack([np.ones((len(X), 1)), X])


def _kron_rows(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.einsum("ni,nj->nij", A, B).reshape(len(A), -1)


def constraint_rows(d: int, n: int, seed: int) -> np.ndarray:
    """First-order constraint matrix acting on vec(H) (row-major)."""
    D = d + 1
    K = D * D
    Xa, Ya, Ba = _axis_pairs(d)
    X = np.vstack([Xa, sphere_points(n, d, seed)])
    Y = np.vstack([Ya, sphere_points(n, d, seed + 1)])
    B = np.vstack([Ba, sphere_points(n, d, seed + 2)])
    W = _kron_rows(_ext(X), _ext(Y))
    rows = [np.eye(K * K)[:K]]
    for E in (W / 4, _kron_rows(_ext(-X), _ext(B)) / 4, _kron_rows(_ext(B), _ext(-Y)) / 4):
        rows.append(_kron_rows(E, W))
    return np.vstack(rows)


def _null_space(A: np.ndarray) -> np.ndarray:
    _, s, vt = np.linalg.svd(A, full_matrices=A.shape[0] < A.shape[1])
    r = int((s > SVD_REL * s[0]).sum())
    return vt[r:].T


def _span_closure(vecs: np.ndarray, ops: list[np.ndarray], tol: float = 1e-9) -> np.ndarray:
    Q = np.zeros((vecs.shape[0], 0))

    def add(V):
        nonlocal Q
        for c in range(V.shape[1]):
            w = V[:, c] - Q @ (Q.T @ V[:, c])
            w = w - Q @ (Q.T @ w)
            nw = np.linalg.norm(w)
            if nw > tol:
                Q = np.c_[Q, w / nw]

    add(vecs)
    i = 0
    while i < Q.shape[1]:
        q = Q[:, i]
        add(np.array([o @ q for o in ops]).T)
        i += 1
    return Q


@dataclass
class Component:
    dim: int
    multiplicity: int
    irreducible_dim: int
    highest_weight: tuple
    curvature_violation: float | None
    closure_defect: float | None
    excluded: bool
    reason: str


@dataclass
class ScanData:
    d: int
    local_dim: int
    first_order_dim: int
    solution_dim: int
    basis: np.ndarray
    schedule: list
    stable: bool
    components: list = field(default_factory=list)
    contains_quantum: bool | None = None
    max_quantum_residual: float | None = None


def _local_generators(d: int) -> tuple[list, list]:
    I = np.eye(d + 1)
    A = [np.kron(_lift(S), I) for S in so_basis(d)]
    B = [np.kron(I, _lift(S)) for S in so_basis(d)]
    return A, B


def _decompose(R: np.ndarray, locA, locB, d: int, seed: int):
    """Isotypic components of span(R) under the adjoint action of the local algebra."""
    K = (d + 1) ** 2
    m = R.shape[1]

    def adm(l):
        return R.T @ np.array([(l @ R[:, i].reshape(K, K) - R[:, i].reshape(K, K) @ l).ravel()
                               for i in range(m)]).T

    adA = [adm(l) for l in locA]
    adB = [adm(l) for l in locB]
    ads = adA + adB
    pairs = list(itertools.combinations(range(d), 2))
    torus = ([adA[pairs.index((2 * i, 2 * i + 1))] for i in range(d // 2)]
             + [adB[pairs.index((2 * i, 2 * i + 1))] for i in range(d // 2)])
    rng = np.random.default_rng(seed)
    comps = []
    E = np.eye(m)
    while E.shape[1] > 0:
        T = [E.T @ t @ E for t in torus]
        Tc = sum(c * t for c, t in zip(rng.standard_normal(len(T)), T))
        _, V = np.linalg.eig(Tc)
        wts = np.array([[np.imag(np.vdot(V[:, j], t @ V[:, j])) / np.real(np.vdot(V[:, j], V[:, j]))
                         for t in T] for j in range(V.shape[1])])
        wr = np.round(wts, 6) + 0.0
        top = max(map(tuple, wr))
        idx = [j for j in range(len(wr)) if tuple(wr[j]) == top]
        vs = E @ np.c_[np.real(V[:, idx]), np.imag(V[:, idx])]
        iso = _span_closure(vs, ads)
        comps.append((iso, len(idx), iso.shape[1] // len(idx), top))
        P = E - iso @ (iso.T @ E)
        u_, s_, _ = np.linalg.svd(P, full_matrices=False)
        E = u_[:, s_ > 0.5]
    return comps


def _curvature_violation(Hs: list[np.ndarray], d: int, seed: int, points: int = 64) -> float:
    X = sphere_points(points, d, seed + 7)
    Y = sphere_points(points, d, seed + 8)
    worst = 0.0
    for x, y in zip(X, Y):
        ex, ey = np.r_[1, x], np.r_[1, y]
        w = np.kron(ex, ey)
        Hw = np.array([H @ w for H in Hs])
        effs = [(w / 4, 1.0)]
        for b in (x, -x, y, -y):
            effs.append((np.kron(np.r_[1, -x], np.r_[1, b]) / 4, -1.0))
            effs.append((np.kron(np.r_[1, b], np.r_[1, -y]) / 4, -1.0))
        for e, sg in effs:
            M = sg * (np.array([e @ H for H in Hs]) @ Hw.T)
            worst = max(worst, float(np.linalg.eigvalsh((M + M.T) / 2).max()))
    return worst


def _closure_defect(Hs: list[np.ndarray], N: np.ndarray) -> float:
    worst = 0.0
    for a, b in itertools.combinations(Hs, 2):
        c = (a @ b - b @ a).ravel()
        worst = max(worst, float(np.linalg.norm(c - N @ (N.T @ c))))
    return worst


def _quantum_check(A: np.ndarray, basis_flat: np.ndarray) -> tuple[bool, float]:
    from .theories import adjoint_generators

    G = adjoint_generators(2)
    flat = G.reshape(len(G), -1)
    resid = float(np.abs(A @ flat.T).max())
    proj = float(max(np.linalg.norm(g - basis_flat @ (basis_flat.T @ g)) for g in flat))
    return resid < 1e-10 and proj < 1e-8, max(resid, proj)


@lru_cache(maxsize=32)
def run_scan(d: int, n0: int | None = None, seed: int = 0, prune_tol: float = 1e-6) -> ScanData:
    if d < 2:
        raise ValueError("the scan needs d >= 2")
    D = d + 1
    K = D * D
    n0 = int(np.ceil(K * K / 3)) if n0 is None else int(n0)
    schedule = []
    A = None
    for n in (n0, 2 * n0, 4 * n0):
        A = constraint_rows(d, n, seed)
        N = _null_space(A)
        schedule.append((n, N.shape[1]))
    stable = len({s for _, s in schedule}) == 1
    locA, locB = _local_generators(d)
    Lm = np.array([l.ravel() for l in locA + locB]).T
    Lq, _ = np.linalg.qr(Lm)
    local_dim = Lq.shape[1]
    Rr = N - Lq @ (Lq.T @ N)
    u, s, _ = np.linalg.svd(Rr, full_matrices=False)
    R = u[:, s > 0.5]
    kept = [Lq]
    comps = []
    if R.shape[1]:
        for iso, mu, irr_dim, top in _decompose(R, locA, locB, d, seed):
            vecs = R @ iso
            Hs = [vecs[:, i].reshape(K, K) for i in range(vecs.shape[1])]
            if mu > 1:
                comps.append(Component(vecs.shape[1], mu, irr_dim, top, None, None, False,
                                       "multiplicity > 1: retained"))
                kept.append(vecs)
                continue
            curv = _curvature_violation(Hs, d, seed)
            clo = _closure_defect(Hs, N)
            reasons = []
            if curv > prune_tol:
                reasons.append("second-order violation")
            if clo > prune_tol:
                reasons.append("not closed under commutators")
            excluded = bool(reasons)
            comps.append(Component(vecs.shape[1], mu, irr_dim, top, curv, clo, excluded,
                                   ", ".join(reasons) if reasons else "retained"))
            if not excluded:
                kept.append(vecs)
    basis_flat = np.hstack(kept)
    data = ScanData(d, local_dim, N.shape[1], basis_flat.shape[1],
                    basis_flat.T.reshape(-1, K, K), schedule, stable, comps)
    if d == 3:
        data.contains_quantum, data.max_quantum_residual = _quantum_check(A, basis_flat)
    return data
