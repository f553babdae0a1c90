"""Bipartite composites under the product rule k_AB = k_A k_B.

Composite vectors use Kronecker order with the B index fastest. The
``BipartiteState`` view regroups a two-ball state into ``u*(1, alpha, beta,
gamma)``; ``b2_permutation`` documents the reordering between the two.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .convex import (BallSpace, DEFAULT_TOL, DimensionMismatchError, PolytopeSpace,
                     QuantumSpace, StateSpace, as_rng)
from .lp import feasible_combination

__all__ = [
    "tensor_state",
    "marginals",
    "BipartiteState",
    "b2_permutation",
    "CompositeSpace",
    "ConsistencyVerdict",
    "product_effect_consistency",
    "numerical_rank",
    "span_check",
    "SeparabilityVerdict",
    "separable_hull_membership",
]


def tensor_state(wA, wB) -> np.ndarray:
    return np.kron(np.asarray(wA, float), np.asarray(wB, float))


def marginals(wAB, SA: StateSpace, SB: StateSpace) -> tuple[np.ndarray, np.ndarray]:
    """Contract with the partner's unit effect: ``(I x U_B) w`` and ``(U_A x I) w``."""
    w = np.asarray(wAB, float)
    if w.shape != (SA.k * SB.k,):
        raise DimensionMismatchError(f"composite vector has shape {w.shape}, expected ({SA.k * SB.k},)")
    Om = w.reshape(SA.k, SB.k)
    return Om @ SB.unit_effect, SA.unit_effect @ Om


def b2_permutation(dA: int, dB: int | None = None) -> np.ndarray:
    """Indices p with ``w[p] == u*(1, alpha, beta, vec(gamma))``.

    ``w`` is the Kronecker-ordered two-ball vector; gamma is flattened
    row-major (A index slow).
    """
    dB = dA if dB is None else dB
    K = dB + 1
    idx = [0]
    idx += [i * K for i in range(1, dA + 1)]
    idx += list(range(1, dB + 1))
    idx += [i * K + j for i in range(1, dA + 1) for j in range(1, dB + 1)]
    return np.array(idx)


@dataclass
class BipartiteState:
    """Two-gbit state ``u * [[1, beta], [alpha, gamma]]`` in canonical Bloch frames."""

    u: float
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray

    @classmethod
    def from_vector(cls, w, dA: int, dB: int | None = None) -> "BipartiteState":
        dB = dA if dB is None else dB
        w = np.asarray(w, float)
        if w.shape != ((dA + 1) * (dB + 1),):
            raise DimensionMismatchError("vector length must be (dA+1)(dB+1)")
        Om = w.reshape(dA + 1, dB + 1)
        u = float(Om[0, 0])
        if u == 0.0:
            return cls(0.0, np.zeros(dA), np.zeros(dB), np.zeros((dA, dB)))
        return cls(u, Om[1:, 0] / u, Om[0, 1:] / u, Om[1:, 1:] / u)

    def to_vector(self, order: str = "kron") -> np.ndarray:
        dA, dB = self.alpha.size, self.beta.size
        Om = np.empty((dA + 1, dB + 1))
        Om[0, 0] = 1.0
        Om[1:, 0] = self.alpha
        Om[0, 1:] = self.beta
        Om[1:, 1:] = self.gamma
        w = self.u * Om.ravel()
        if order == "kron":
            return w
        if order == "b2":
            return w[b2_permutation(dA, dB)]
        raise ValueError(f"unknown order {order!r}")

    @classmethod
    def from_b2(cls, v, dA: int, dB: int | None = None) -> "BipartiteState":
        dB = dA if dB is None else dB
        w = np.empty(len(v))
        w[b2_permutation(dA, dB)] = np.asarray(v, float)
        return cls.from_vector(w, dA, dB)


# ------------------------------------------------------------------ helpers


def _canonical_ball(space: StateSpace) -> BallSpace | None:
    if isinstance(space, BallSpace):
        return space
    if isinstance(space, QuantumSpace) and space.n == 1:
        return BallSpace(3, tol=space.tol)
    return None


def _is_plain_bloch_ball(space: StateSpace) -> bool:
    return isinstance(space, BallSpace) and space.d == 3 and np.allclose(space.frame, np.eye(4))


def numerical_rank(vectors, rel: float = 1e-7) -> int:
    A = np.atleast_2d(np.asarray(vectors, float))
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    return int((s > rel * s[0]).sum()) if s[0] > 0 else 0


def span_check(states, k_expected: int, rel: float = 1e-7) -> bool:
    """True iff the states span a space of dimension ``k_expected``."""
    return numerical_rank(states, rel) == k_expected


class CompositeSpace:
    """Bipartite (or folded n-partite) composite with a declared state set."""

    def __init__(self, factors: list[StateSpace], rule: str = "separable", k: int | None = None,
                 samples: int = 10_000, seed=0):
        if len(factors) < 2:
            raise ValueError("a composite needs at least two factors")
        self.factors = list(factors)
        self.rule = rule
        self.samples = samples
        self.seed = seed
        kp = int(np.prod([f.k for f in factors]))
        if rule == "declared":
            if k is None:
                raise ValueError("declared composites must state k")
            self.k = int(k)
        else:
            self.k = kp
        self.product_k = kp
        if rule == "quantum":
            qubits = [f.n if isinstance(f, QuantumSpace) else 1 if _is_plain_bloch_ball(f) else None
                      for f in factors]
            if None in qubits:
                raise ValueError("quantum composite needs quantum factors or identity-frame 3-balls")
            self.global_space = QuantumSpace(sum(qubits))
        else:
            self.global_space = None

    @classmethod
    def fold(cls, factors, rule="separable", **kw):
        """Left-to-right folding; the nested factor is itself a composite."""
        return cls(list(factors), rule=rule, **kw)

    @property
    def unit_effect(self) -> np.ndarray:
        out = np.ones(1)
        for f in self.factors:
            out = np.kron(out, f.unit_effect)
        return out

    def product_extreme_points(self, per_factor: int | None = None, seed=0) -> np.ndarray:
        pts = [f.spanning_states() if per_factor is None else f.sample_pure(per_factor, seed)
               for f in self.factors]
        out = pts[0]
        for P in pts[1:]:
            out = np.einsum("ai,bj->abij", out, P).reshape(len(out) * len(P), -1)
        return out

    def contains(self, w) -> bool:
        if self.global_space is not None:
            return self.global_space.contains(w)
        if len(self.factors) != 2:
            raise NotImplementedError("separable membership is implemented for two factors")
        v = separable_hull_membership(w, *self.factors, samples=self.samples, seed=self.seed)
        return v.separable


# ------------------------------------------------------------------ effect consistency


@dataclass
class ConsistencyVerdict:
    passed: bool
    min_value: float
    max_value: float
    witness: tuple[np.ndarray, np.ndarray] | None = None
    witness_value: float | None = None


def _optimize_ball_pair(Om: np.ndarray, rng, restarts: int, sign: float):
    """Extremize sign * (1,a)^T Om (1,b) / 4 over unit a, b by alternating ascent."""
    dA, dB = Om.shape[0] - 1, Om.shape[1] - 1
    best = (-np.inf, None, None)
    for _ in range(restarts):
        b = rng.standard_normal(dB)
        b /= np.linalg.norm(b)
        val_prev = -np.inf
        for _ in range(200):
            g = sign * (Om[1:, 0] + Om[1:, 1:] @ b)
            a = g / np.linalg.norm(g) if np.linalg.norm(g) > 0 else np.eye(dA)[0]
            h = sign * (Om[0, 1:] + a @ Om[1:, 1:])
            b = h / np.linalg.norm(h) if np.linalg.norm(h) > 0 else np.eye(dB)[0]
            val = sign * (np.r_[1, a] @ Om @ np.r_[1, b]) / 4
            if val - val_prev < 1e-15:
                break
            val_prev = val
        if val > best[0]:
            best = (val, a, b)
    return best


def product_effect_consistency(wAB, EA, EB, spaces: tuple[StateSpace, StateSpace] | None = None, *,
                               restarts: int = 50, seed=0, tol: float = DEFAULT_TOL) -> ConsistencyVerdict:
    """Check ``(E_x (x) E_y)(w) in [0, 1]`` for all listed effect pairs.

    When ``spaces`` holds ball factors, pure effects and unit effects are also
    optimized over the spheres (50 restarts by default).
    """
    w = np.asarray(wAB, float)
    EA = np.atleast_2d(np.asarray(EA, float))
    EB = np.atleast_2d(np.asarray(EB, float))
    if EA.shape[1] * EB.shape[1] != w.size:
        raise DimensionMismatchError("effect lengths do not match the composite vector")
    Om = w.reshape(EA.shape[1], EB.shape[1])
    vals = EA @ Om @ EB.T
    i_lo = np.unravel_index(np.argmin(vals), vals.shape)
    i_hi = np.unravel_index(np.argmax(vals), vals.shape)
    lo, hi = float(vals[i_lo]), float(vals[i_hi])
    wit_lo = (EA[i_lo[0]], EB[i_lo[1]])
    wit_hi = (EA[i_hi[0]], EB[i_hi[1]])
    if spaces is not None:
        bA, bB = _canonical_ball(spaces[0]), _canonical_ball(spaces[1])
        if bA is not None and bB is not None:
            rng = as_rng(seed)
            C = bA.frame.T @ Om @ bB.frame  # effects are Ec @ M^-1, so values are Ec_A C Ec_B
            cands = []
            for sign in (1.0, -1.0):
                v, a, b = _optimize_ball_pair(C, rng, restarts, sign)
                cands.append((np.r_[1, a] / 2, np.r_[1, b] / 2))
                # pure effect paired with the unit effect (1, 0) on the other side
                ga = sign * C[1:, 0]
                gb = sign * C[0, 1:]
                a1 = ga / np.linalg.norm(ga) if np.linalg.norm(ga) > 0 else np.eye(bA.d)[0]
                b1 = gb / np.linalg.norm(gb) if np.linalg.norm(gb) > 0 else np.eye(bB.d)[0]
                cands.append((np.r_[1, a1] / 2, np.eye(bB.k)[0]))
                cands.append((np.eye(bA.k)[0], np.r_[1, b1] / 2))
            cands.append((np.eye(bA.k)[0], np.eye(bB.k)[0]))
            for ea, eb in cands:
                Ea, Eb = ea @ bA.frame_inv, eb @ bB.frame_inv
                val = float(Ea @ Om @ Eb)
                if val < lo:
                    lo, wit_lo = val, (Ea, Eb)
                if val > hi:
                    hi, wit_hi = val, (Ea, Eb)
    if lo < -tol:
        return ConsistencyVerdict(False, lo, hi, wit_lo, lo)
    if hi > 1 + tol:
        return ConsistencyVerdict(False, lo, hi, wit_hi, hi)
    return ConsistencyVerdict(True, lo, hi)


# ------------------------------------------------------------------ separability


@dataclass
class SeparabilityVerdict:
    separable: bool
    residual: float
    candidates: int
    exact: bool

    @property
    def label(self) -> str:
        if self.separable:
            return "separable"
        return "not separable" if self.exact else "not proven separable"


def _factor_candidates(space: StateSpace, directions: list[np.ndarray], n: int, rng) -> np.ndarray:
    if isinstance(space, PolytopeSpace):
        return space.extreme_points().points
    ball = _canonical_ball(space)
    if ball is None:
        raise NotImplementedError("separability is implemented for polytope and ball factors")
    dirs = []
    for v in directions:
        nv = np.linalg.norm(v)
        if nv > 1e-12:
            dirs += [v / nv, -v / nv]
    samp = rng.standard_normal((n, ball.d))
    samp /= np.linalg.norm(samp, axis=1, keepdims=True)
    W = np.vstack([np.array(dirs).reshape(-1, ball.d), samp])
    return np.hstack([np.ones((len(W), 1)), W]) @ ball.frame.T


def separable_hull_membership(wAB, SA: StateSpace, SB: StateSpace, *, samples: int = 10_000,
                              seed=0, tol: float | None = None) -> SeparabilityVerdict:
    """One-sided test of ``w`` in conv(S_A (x) S_B).

    Polytope factors give an exact LP. Ball factors use product pure states
    drawn from about ``samples`` sampled pairs plus directions adapted to the
    input (marginal Bloch vectors and singular vectors of the correlation
    block), so a negative answer only means "not proven separable".
    """
    w = np.asarray(wAB, float)
    if w.shape != (SA.k * SB.k,):
        raise DimensionMismatchError("composite vector length mismatch")
    tol = max(SA.tol, SB.tol) if tol is None else tol
    rng = as_rng(seed)
    exact = isinstance(SA, PolytopeSpace) and isinstance(SB, PolytopeSpace)
    n_side = max(2, int(np.ceil(np.sqrt(samples))))
    dirsA, dirsB = [], []
    bA, bB = _canonical_ball(SA), _canonical_ball(SB)
    Om = w.reshape(SA.k, SB.k)
    if bA is not None or bB is not None:
        MA = bA.frame_inv if bA is not None else np.eye(SA.k)
        MB = bB.frame_inv if bB is not None else np.eye(SB.k)
        C = MA @ Om @ MB.T
        if bA is not None:
            dirsA.append(C[1:, 0])
        if bB is not None:
            dirsB.append(C[0, 1:])
        if bA is not None and bB is not None:
            Uu, _, Vt = np.linalg.svd(C[1:, 1:])
            dirsA += list(Uu.T)
            dirsB += list(Vt)
    PA = _factor_candidates(SA, dirsA, n_side, rng)
    PB = _factor_candidates(SB, dirsB, n_side, rng)
    prods = np.einsum("ai,bj->abij", PA, PB).reshape(len(PA) * len(PB), -1)
    lam, resid = feasible_combination(prods.T, w, total="le", tol=tol * 1e-2)
    scale = max(1.0, float(np.abs(w).sum()))
    ok = lam is not None and resid <= max(tol, 1e-9) * scale
    return SeparabilityVerdict(bool(ok), float(resid), len(prods), exact)
