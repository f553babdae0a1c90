"""Postulate checkers, the bipartite interaction scan and the reconstruction pipeline.

Every checker returns a :class:`CheckReport`. A ``fail`` always carries a
witness that :func:`replay` can feed back through the relevant primitive.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _scan
from .composites import CompositeSpace, numerical_rank
from .convex import (BallSpace, EmptyFaceError, PolytopeSpace, QuantumSpace, StateSpace,
                     as_rng)
from .groups import (BlochFormError, NotCompactError, bloch_form, expm, invariant_metric,
                     orbit_transitive)
from .theories import FrameMap, Theory, adjoint_generator, adjoint_generators

__all__ = [
    "CheckReport",
    "InteractionScanResult",
    "check_continuous_reversibility",
    "check_tomographic_locality",
    "check_nse_geometric",
    "check_nse_operational",
    "check_all_effects",
    "check_interaction",
    "interaction_scan",
    "verify_quantum_generators",
    "PipelineResult",
    "reconstruct_pipeline",
    "POSTULATE_IDS",
    "run_checks",
    "replay",
    "replay_nse_witness",
]

POSTULATE_IDS = ("cr", "tl", "nse", "all-effects", "interact")


@dataclass
class CheckReport:
    postulate: str
    status: str  # pass | fail | inconclusive
    reason: str = ""
    witness: dict | None = None
    residuals: dict = field(default_factory=dict)
    tolerance: float = 1e-9
    samples: int = 0
    seed: int = 0
    details: dict = field(default_factory=dict)
    duration: float = 0.0

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        return _plain(asdict(self))


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _timed(fn):
    def wrapper(*a, **kw):
        t0 = time.perf_counter()
        rep = fn(*a, **kw)
        rep.duration = time.perf_counter() - t0
        return rep

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    wrapper.__wrapped__ = fn
    return wrapper


# ------------------------------------------------------------------ continuity


@_timed
def check_continuous_reversibility(theory: Theory, samples: int = 10_000, seed: int = 0) -> CheckReport:
    """Connected group acting transitively on the pure states."""
    grp, space = theory.group, theory.space
    verdict = orbit_transitive(grp, space, seed=seed, samples=samples)
    details = {"connected": grp.connected, "transitive": verdict.passed,
               "pairs_checked": verdict.pairs_checked, "method": verdict.method}
    res = {"max_orbit_residual": verdict.max_residual}
    if not grp.connected:
        wit = {"group_kind": grp.kind, "order": len(grp.elements)}
        return CheckReport("cr", "fail", "disconnected", wit, res, space.tol, samples, seed, details)
    if not verdict.passed:
        w1, w2 = verdict.witness
        return CheckReport("cr", "fail", "not transitive on pure states",
                           {"omega1": w1, "omega2": w2}, res, space.tol, samples, seed, details)
    return CheckReport("cr", "pass", "connected and transitive", None, res, space.tol, samples, seed, details)


# ------------------------------------------------------------------ tomographic locality


@_timed
def check_tomographic_locality(theory: Theory, samples: int = 0, seed: int = 0) -> CheckReport:
    k = theory.k
    kab = theory.composite_k()
    details = {"k_A": k, "k_B": k, "k_AB": kab, "rule": theory.composite.rule}
    if kab != k * k:
        return CheckReport("tl", "fail", f"k_AB = {kab} differs from k_A k_B = {k * k}",
                           {"k_A": k, "k_B": k, "k_AB": kab}, {}, theory.space.tol, samples, seed, details)
    S = theory.space.spanning_states()
    if k * k <= 256:
        prods = CompositeSpace([theory.space, theory.space]).product_extreme_points()
        rank = numerical_rank(prods)
        details["method"] = "SVD of all pairwise products"
    else:
        r1 = numerical_rank(S)
        rank = r1 * r1
        details["method"] = "Kronecker rank identity rank(A x B) = rank(A) rank(B)"
    details["rank"] = rank
    if rank != k * k:
        return CheckReport("tl", "fail", f"products span only {rank} of {k * k} dimensions",
                           {"rank": rank, "expected": k * k}, {}, theory.space.tol, samples, seed, details)
    return CheckReport("tl", "pass", "k_AB = k_A k_B and products span", None, {},
                       theory.space.tol, samples, seed, details)


# ------------------------------------------------------------------ NSE


def _lex_desc(vecs):
    return sorted(range(len(vecs)), key=lambda i: tuple(-np.round(np.asarray(vecs[i]), 12)))


def _nse_witness_polytope(space: PolytopeSpace):
    facets = space.facets()
    if not facets:
        return None
    order = _lex_desc([E for E, _ in facets])
    facets = [facets[i] for i in order]
    V = space.extreme_points().points
    for E, on in facets:
        if len(on) < 2:
            continue
        pts = V[on]
        o = _lex_desc(pts)
        w1, w2 = pts[o[0]], pts[o[1]]
        zero = V[np.abs(V @ E) <= 1e-9]
        wp = zero.mean(axis=0)
        best, Ep = -1.0, None
        for F, _ in facets:
            gap = abs(F @ w1 - F @ w2)
            if gap > best + 1e-12:
                best, Ep = gap, F
        return {"E": E, "omega1": w1, "omega2": w2, "omega_prime": wp, "E_prime": Ep}
    return None


def _nse_witness_quantum(space: QuantumSpace):
    dim = space.dim
    P = np.zeros((dim, dim))
    P[0, 0] = P[1, 1] = 1.0
    r0 = np.zeros((dim, dim))
    r1 = r0.copy()
    rp = r0.copy()
    r0[0, 0] = r1[1, 1] = rp[-1, -1] = 1.0
    return {"E": space.effect_coefficients(P), "omega1": space.coefficients(r0),
            "omega2": space.coefficients(r1), "omega_prime": space.coefficients(rp),
            "E_prime": space.effect_coefficients(r0)}


def replay_nse_witness(space: StateSpace, witness: dict) -> dict:
    """Re-verify an NSE witness; ``reproduced`` is True when it still violates NSE."""
    E, Ep = np.asarray(witness["E"]), np.asarray(witness["E_prime"])
    w1, w2, wp = (np.asarray(witness[k]) for k in ("omega1", "omega2", "omega_prime"))
    tol = 2 * space.tol
    checks = {
        "states_valid": all(space.contains(w) for w in (w1, w2, wp)),
        "effects_valid": space.is_valid_effect(E) and space.is_valid_effect(Ep),
        "E_on_omega1": abs(E @ w1 - 1) <= tol,
        "E_on_omega2": abs(E @ w2 - 1) <= tol,
        "E_on_omega_prime": abs(E @ wp) <= tol,
    }
    gap = float(abs(Ep @ w1 - Ep @ w2))
    return {"reproduced": all(checks.values()) and gap > tol, "gap": gap, **checks}


@_timed
def check_nse_geometric(space: StateSpace, seed: int = 0) -> CheckReport:
    """Every face cut out by an effect reaching 1 (and 0) is a single point."""
    tol = space.tol
    if isinstance(space, BallSpace):
        return CheckReport("nse", "pass", "strictly convex ball: every exposed face is a point",
                           tolerance=tol, seed=seed, details={"method": "analytic"})
    if isinstance(space, QuantumSpace):
        if space.n == 1:
            return CheckReport("nse", "pass", "single qubit is a 3-ball: every exposed face is a point",
                               tolerance=tol, seed=seed, details={"method": "analytic"})
        wit = _nse_witness_quantum(space)
        return CheckReport("nse", "fail", "a rank-2 projector exposes a face containing mixed states",
                           wit, {"gap": 1.0}, tol, 0, seed, {"method": "projector faces"})
    if isinstance(space, PolytopeSpace):
        c, B = space.affine_frame()
        details = {"method": "facet enumeration", "dim_N": B.shape[1]}
        if B.shape[1] == 0:
            return CheckReport("nse", "pass", "N is a single point (vacuous)", tolerance=tol, seed=seed,
                               details=details)
        details["facets"] = len(space.facets())
        wit = _nse_witness_polytope(space)
        if wit is None:
            return CheckReport("nse", "pass", "every facet is a single vertex", tolerance=tol, seed=seed,
                               details=details)
        gap = float(abs(wit["E_prime"] @ wit["omega1"] - wit["E_prime"] @ wit["omega2"]))
        return CheckReport("nse", "fail", "a facet contains two distinguishable pure states", wit,
                           {"gap": gap}, tol, 0, seed, details)
    return CheckReport("nse", "inconclusive", f"geometry {space.kind} not supported", tolerance=tol, seed=seed)


def _range_on_N(space: StateSpace, c: np.ndarray) -> tuple[float, float]:
    if isinstance(space, PolytopeSpace):
        v = space.extreme_points().points @ c
        return float(v.min()), float(v.max())
    if isinstance(space, BallSpace):
        cc = c @ space.frame
        r = np.linalg.norm(cc[1:])
        return float(cc[0] - r), float(cc[0] + r)
    ev = np.linalg.eigvalsh(space.operator(c))
    return float(ev[0]), float(ev[-1])


def _supporting_effect(space, c):
    lo, hi = _range_on_N(space, c)
    if hi - lo <= 1e-12:
        return None
    return (c - lo * space.unit_effect) / (hi - lo)


def _two_points(face, rng):
    if face.finite:
        return face.points if len(face.points) >= 2 else None
    P = face.sample(2, rng)
    return P if np.linalg.norm(P[0] - P[1]) > 1e-6 else None


@_timed
def check_nse_operational(space: StateSpace, samples: int = 10_000, seed: int = 0) -> CheckReport:
    """Randomized search for two bits encoded in four states (one-sided)."""
    rng = as_rng(seed)
    tol = space.tol
    k = space.k
    found = None
    tried = 0
    for t in range(samples):
        tried += 1
        if isinstance(space, QuantumSpace) and t % 2:
            Z = rng.standard_normal((space.dim, space.dim)) + 1j * rng.standard_normal((space.dim, space.dim))
            Q, _ = np.linalg.qr(Z)
            r = int(rng.integers(1, space.dim))
            E = space.effect_coefficients(Q[:, :r] @ Q[:, :r].conj().T)
        else:
            E = _supporting_effect(space, rng.standard_normal(k))
            if E is None:
                continue
        try:
            top = space.face(E)
            bottom = space.face(space.unit_effect - E)
        except EmptyFaceError:
            continue
        pair = _two_points(top, rng)
        if pair is None:
            continue
        w1, w2 = pair[0], pair[1]
        wp = bottom.points[0] if bottom.finite else bottom.sample(1, rng)[0]
        Ep = _supporting_effect(space, w1 - w2)
        if Ep is None or abs(Ep @ w1 - Ep @ w2) <= tol:
            continue
        found = {"E": E, "omega1": w1, "omega2": w2, "omega_prime": wp, "E_prime": Ep}
        break
    details = {"method": "randomized face search", "effects_tried": tried}
    if found is not None:
        gap = float(abs(found["E_prime"] @ found["omega1"] - found["E_prime"] @ found["omega2"]))
        return CheckReport("nse", "fail", "found an effect whose face holds two distinguishable states",
                           found, {"gap": gap}, tol, samples, seed, details)
    if isinstance(space, (PolytopeSpace, QuantumSpace)):
        geo = check_nse_geometric(space, seed)
        details["geometric"] = geo.status
        if geo.status == "fail":
            geo.samples, geo.details = samples, {**details, **geo.details}
            return geo
        return CheckReport("nse", "pass", "no witness; exact geometric check agrees", None, {}, tol,
                           samples, seed, details)
    if k <= 1:
        return CheckReport("nse", "pass", "N is a single point (vacuous)", None, {}, tol, samples, seed, details)
    return CheckReport("nse", "pass", "no witness within the sample budget (evidence only)", None, {},
                       tol, samples, seed, details)


# ------------------------------------------------------------------ all effects


def _effect_support(space: StateSpace, c: np.ndarray) -> tuple[float, np.ndarray]:
    """max c.E over all valid effects, with a maximizer."""
    if isinstance(space, BallSpace):
        cc = space.frame_inv @ c
        c0, r = cc[0], np.linalg.norm(cc[1:])
        opts = [(0.0, np.zeros(space.k)), (c0, np.eye(space.k)[0])]
        if r > 0:
            opts.append(((c0 + r) / 2, np.r_[0.5, cc[1:] / (2 * r)]))
        val, Ec = max(opts, key=lambda t: t[0])
        return float(val), Ec @ space.frame_inv
    if isinstance(space, QuantumSpace):
        C = np.einsum("p,pij->ij", c, space.paulis)
        ev, V = np.linalg.eigh(C)
        pos = ev > 0
        M = V[:, pos] @ V[:, pos].conj().T
        return float(ev[pos].sum() / space.dim), space.effect_coefficients(M)
    from .lp import linprog

    V = space.extreme_points().points
    A = np.vstack([V, -V])
    b = np.concatenate([np.ones(len(V)), np.zeros(len(V))])
    res = linprog(np.concatenate([-c, c]), A_ub=np.hstack([A, -A]), b_ub=b, tol=space.tol * 1e-2)
    E = res.x[: space.k] - res.x[space.k:]
    return float(c @ E), E


def _list_support(space, decl, c) -> float:
    base = max(0.0, float(c @ space.unit_effect))
    if decl.kind == "pure":
        ext = space.extreme_points()
        if isinstance(space, BallSpace):
            cc = space.frame_inv @ c
            # pure effects are (1, w)/2 in canonical coordinates
            return max(base, float((cc[0] + np.linalg.norm(cc[1:])) / 2))
        if isinstance(space, QuantumSpace):
            ev = np.linalg.eigvalsh(np.einsum("p,pij->ij", c, space.paulis))
            # pure effects are rank-one projectors
            return max(base, float(ev[-1] / space.dim))
        pts = ext.points
        return max(base, float((pts @ c).max() / 2))
    return max(base, float((decl.effects @ c).max()))


@_timed
def check_all_effects(theory: Theory, samples: int = 2000, seed: int = 0) -> CheckReport:
    decl, space = theory.effects, theory.space
    tol = space.tol
    if decl.kind == "full":
        return CheckReport("all-effects", "pass", "declared full dual", tolerance=tol, seed=seed,
                           details={"declaration": "full"})
    rng = as_rng(seed)
    n = min(samples, 2000)
    dirs = np.vstack([np.eye(space.k), -np.eye(space.k), rng.standard_normal((n, space.k))])
    worst, wit = 0.0, None
    for c in dirs:
        c = c / np.linalg.norm(c)
        h_eff, Estar = _effect_support(space, c)
        gap = h_eff - _list_support(space, decl, c)
        if gap > worst:
            worst, wit = gap, {"direction": c, "missing_effect": Estar, "gap": gap}
    details = {"declaration": decl.kind, "directions": len(dirs), "max_gap": worst}
    limit = 10 * tol
    if worst > limit:
        return CheckReport("all-effects", "fail", "listed effects miss part of the valid-effect set",
                           wit, {"max_support_gap": worst}, tol, len(dirs), seed, details)
    return CheckReport("all-effects", "pass", "listed effects are dense in the valid-effect set", None,
                       {"max_support_gap": worst}, tol, len(dirs), seed, details)


# ------------------------------------------------------------------ interaction scan


@dataclass
class InteractionScanResult:
    d: int
    local_dim: int
    first_order_dim: int
    solution_dim: int
    basis: np.ndarray
    contains_quantum: bool | None
    max_quantum_residual: float | None
    schedule: list
    stable: bool
    components: list
    label: str = "necessary-condition scan: solution_dim is an upper bound on the consistent algebra"

    @property
    def status(self) -> str:
        return "pass" if self.stable else "inconclusive"

    @property
    def has_interaction(self) -> bool:
        return self.solution_dim > self.local_dim

    def summary(self) -> dict:
        return {
            "d": self.d, "local_dim": self.local_dim, "first_order_dim": self.first_order_dim,
            "solution_dim": self.solution_dim, "contains_quantum": self.contains_quantum,
            "max_quantum_residual": self.max_quantum_residual, "stable": self.stable,
            "schedule": [list(s) for s in self.schedule],
            "components": [asdict(c) for c in self.components], "label": self.label,
        }


def interaction_scan(d: int, samples: int | None = None, seed: int = 0) -> InteractionScanResult:
    """Linearized constraints on bipartite generators for two d-ball gbits.

    ``samples`` is the base number of tangency points; the scan repeats at
    twice and four times that number and is ``inconclusive`` unless the null
    space dimension is unchanged. Defaults to ceil(K^2 / 3), K = (d+1)^2.
    """
    data = _scan.run_scan(int(d), None if samples is None else int(samples), int(seed))
    return InteractionScanResult(data.d, data.local_dim, data.first_order_dim, data.solution_dim,
                                 data.basis, data.contains_quantum, data.max_quantum_residual,
                                 list(data.schedule), data.stable, list(data.components))


def _local_residual(H: np.ndarray, kA: int, kB: int) -> float:
    """Relative distance of H from span{A (x) I, I (x) B}."""
    T = H.reshape(kA, kB, kA, kB)
    trB = np.einsum("abcb->ac", T) / kB
    trA = np.einsum("abad->bd", T) / kA
    tr = np.trace(H) / (kA * kB)
    P = np.kron(trB, np.eye(kB)) + np.kron(np.eye(kA), trA) - tr * np.eye(kA * kB)
    return float(np.linalg.norm(H - P) / np.linalg.norm(H))


@_timed
def check_interaction(theory: Theory, samples: int = 10_000, seed: int = 0) -> CheckReport:
    """Whether two gbits of the theory admit a continuous non-product evolution."""
    space, rule, tol = theory.space, theory.composite.rule, theory.space.tol
    if rule == "declared":
        return CheckReport("interact", "inconclusive", "declared composite carries no dynamics",
                           tolerance=tol, seed=seed)
    if isinstance(space, PolytopeSpace):
        return CheckReport("interact", "fail",
                           "composite of polytopes: reversible group is finite, its identity component is trivial",
                           {"composite": "polytope", "identity_component_dim": 0}, {}, tol, 0, seed)
    if rule == "quantum" and isinstance(space, QuantumSpace) and space.n > 1:
        n = space.n
        # ad(Z on the first qubit of A times Z on the first qubit of B)
        word = 3 * 4 ** (2 * n - 1) + 3 * 4 ** (n - 1)
        H = adjoint_generator(word, 2 * n)
        r = _local_residual(H, space.k, space.k)
        wit = {"generator_word": int(word), "nonlocal_residual": r}
        status = "pass" if r > 1e-6 else "fail"
        return CheckReport("interact", status, "composite contains ad(Z x Z), which is not local",
                           None if status == "pass" else wit, {"nonlocal_residual": r}, tol, 0, seed,
                           {"method": "explicit non-product generator", **wit})
    if isinstance(space, (BallSpace, QuantumSpace)):
        d = space.d if isinstance(space, BallSpace) else 3
        scan = interaction_scan(d, seed=seed)
        details = scan.summary()
        res = {"solution_dim": scan.solution_dim, "local_dim": scan.local_dim}
        if not scan.stable:
            return CheckReport("interact", "inconclusive", "null-space rank not stable under doubling",
                               None, res, tol, scan.schedule[-1][0], seed, details)
        if not scan.has_interaction:
            return CheckReport("interact", "fail", f"d = {d}: only local generators survive the scan",
                               {"d": d, "solution_dim": scan.solution_dim, "local_dim": scan.local_dim},
                               res, tol, scan.schedule[-1][0], seed, details)
        if rule != "quantum":
            return CheckReport("interact", "fail",
                               "consistent interactions exist but the declared separable composite excludes them",
                               {"d": d, "rule": rule}, res, tol, scan.schedule[-1][0], seed, details)
        if d == 3:
            q = verify_quantum_generators(samples, seed, tol=max(tol, 1e-9))
            details["quantum_verification"] = q.residuals
            if not (scan.contains_quantum and q.passed):
                return CheckReport("interact", "fail", "adjoint su(4) images fail verification",
                                   q.witness, res, tol, samples, seed, details)
        return CheckReport("interact", "pass", f"d = {d}: non-product generators consistent", None, res,
                           tol, samples, seed, details)
    return CheckReport("interact", "inconclusive", "unsupported gbit geometry", tolerance=tol, seed=seed)


# ------------------------------------------------------------------ quantum generators


def _pure_bloch(n, rng):
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


@_timed
def verify_quantum_generators(samples: int = 10_000, seed: int = 0, tol: float = 1e-9,
                              n_elements: int = 100) -> CheckReport:
    """Probabilities of product effects on evolved product states stay in [0, 1]."""
    rng = as_rng(seed)
    gens = adjoint_generators(2)
    per = max(1, int(np.ceil(samples / n_elements)))
    lo, hi, bad, worst = np.inf, -np.inf, 0, None
    total = 0
    for g in range(n_elements):
        if g == 0:
            G = np.eye(16)
        else:
            theta = rng.standard_normal(len(gens)) * np.pi / np.sqrt(len(gens))
            G = expm(np.tensordot(theta, gens, axes=1))
        a, b, e, f = (_pure_bloch(per, rng) for _ in range(4))
        ones = np.ones((per, 1))
        W = np.einsum("ni,nj->nij", np.hstack([ones, a]), np.hstack([ones, b])).reshape(per, 16)
        E = np.einsum("ni,nj->nij", np.hstack([ones, e]), np.hstack([ones, f])).reshape(per, 16) / 4
        vals = np.einsum("ni,ni->n", E, W @ G.T)
        total += per
        lo, hi = min(lo, vals.min()), max(hi, vals.max())
        viol = (vals < -tol) | (vals > 1 + tol)
        if viol.any() and worst is None:
            i = int(np.flatnonzero(viol)[0])
            worst = {"G": G, "state": W[i], "effect": E[i], "value": float(vals[i])}
        bad += int(viol.sum())
    res = {"min_value": float(lo), "max_value": float(hi), "violations": bad}
    if bad:
        return CheckReport("quantum", "fail", f"{bad} probabilities left [0, 1]", worst, res, tol, total, seed)
    return CheckReport("quantum", "pass", "all sampled probabilities in [0, 1]", None, res, tol, total, seed,
                       {"group_elements": n_elements})


# ------------------------------------------------------------------ pipeline


@dataclass
class PipelineResult:
    reports: list[CheckReport]
    frame_map: np.ndarray | None = None

    @property
    def passed(self) -> bool:
        return bool(self.reports) and all(r.passed for r in self.reports) and self.frame_map is not None

    @property
    def stopped_at(self) -> str | None:
        for r in self.reports:
            if not r.passed:
                return r.postulate
        return None

    def density_map(self):
        """Callable sending an original-frame state to its density matrix."""
        if self.frame_map is None:
            raise ValueError("pipeline did not complete")
        L = self.frame_map
        return lambda x: FrameMap(1).forward(L @ np.asarray(x, float))


PIPELINE_STAGES = ("finiteness", "nse", "continuity", "ellipsoid", "bloch", "dimension", "quantum")


def reconstruct_pipeline(theory: Theory, samples: int = 10_000, seed: int = 0) -> PipelineResult:
    """Run the reconstruction stages in order, stopping at the first non-pass."""
    space, group = theory.space, theory.group
    tol = space.tol
    out: list[CheckReport] = []

    def stage(rep):
        out.append(rep)
        return rep.passed

    t0 = time.perf_counter()
    rank = numerical_rank(space.spanning_states())
    rep = CheckReport("finiteness", "pass" if rank == space.k else "fail",
                      f"k = {space.k}, states span {rank} dimensions",
                      None if rank == space.k else {"k": space.k, "rank": rank}, {}, tol, 0, seed)
    rep.duration = time.perf_counter() - t0
    if not stage(rep):
        return PipelineResult(out)

    rep = check_nse_geometric(space, seed)
    if rep.passed and theory.effects.kind != "full":
        ae = check_all_effects(theory, samples, seed)
        if not ae.passed:
            rep = ae
            rep.postulate = "nse"
    if not stage(rep):
        return PipelineResult(out)

    rep = check_continuous_reversibility(theory, samples, seed)
    rep.postulate = "continuity"
    if not stage(rep):
        return PipelineResult(out)

    t0 = time.perf_counter()
    try:
        m = invariant_metric(group, space, seed=seed)
        ok = m.spread <= 1e-8
        wit = None
        if not ok:
            P = space.sample_pure(64, seed)
            nrm = np.linalg.norm(P @ m.W.T, axis=1)
            wit = {"omega_short": P[np.argmin(nrm)], "omega_long": P[np.argmax(nrm)], "W": m.W}
        rep = CheckReport("ellipsoid", "pass" if ok else "fail",
                          "pure states lie on the ellipsoid |W w| = r" if ok else "pure-state norms differ",
                          wit, {"relative_spread": m.spread, "r": m.r}, tol, 64, seed, {"W": m.W})
    except NotCompactError as exc:
        rep = CheckReport("ellipsoid", "fail", str(exc), {"group_kind": group.kind}, {}, tol, 0, seed)
    rep.duration = time.perf_counter() - t0
    if not stage(rep):
        return PipelineResult(out)

    t0 = time.perf_counter()
    try:
        bf = bloch_form(space, group, seed=seed)
        worst = max(bf.residuals.values())
        ok = worst < 1e-7
        rep = CheckReport("bloch", "pass" if ok else "fail",
                          "Bloch form with U = (1, 0) and orthogonal dynamics" if ok else "Bloch form residual too large",
                          None if ok else {"residuals": bf.residuals}, bf.residuals, tol, 64, seed,
                          {"L": bf.L, "condition_number": float(np.linalg.cond(bf.L))})
    except BlochFormError as exc:
        bf = None
        rep = CheckReport("bloch", "fail", str(exc), {"error": str(exc)}, {}, tol, 0, seed)
    rep.duration = time.perf_counter() - t0
    if not stage(rep):
        return PipelineResult(out)

    t0 = time.perf_counter()
    d = space.k - 1
    if d < 2:
        rep = CheckReport("dimension", "inconclusive", "d = 1 is outside the scope of the scan", None, {}, tol,
                          0, seed, {"d": d})
    else:
        scan = interaction_scan(d, seed=seed)
        res = {"solution_dim": scan.solution_dim, "local_dim": scan.local_dim}
        if not scan.stable:
            rep = CheckReport("dimension", "inconclusive", "null-space rank not stable", None, res, tol,
                              scan.schedule[-1][0], seed, scan.summary())
        elif scan.has_interaction and (d != 3 or scan.contains_quantum):
            rep = CheckReport("dimension", "pass", f"d = {d} admits non-product generators", None, res, tol,
                              scan.schedule[-1][0], seed, scan.summary())
        else:
            rep = CheckReport("dimension", "fail", f"d = {d}: only local generators survive",
                              {"d": d, "solution_dim": scan.solution_dim, "local_dim": scan.local_dim},
                              res, tol, scan.schedule[-1][0], seed, scan.summary())
    rep.duration = time.perf_counter() - t0
    if not stage(rep):
        return PipelineResult(out)

    rep = verify_quantum_generators(samples, seed, tol=max(tol, 1e-9))
    if not stage(rep):
        return PipelineResult(out)
    return PipelineResult(out, bf.L)


# ------------------------------------------------------------------ runner and replay

_CHECKERS = {
    "cr": lambda th, s, seed: check_continuous_reversibility(th, s, seed),
    "tl": lambda th, s, seed: check_tomographic_locality(th, s, seed),
    "nse": lambda th, s, seed: check_nse_operational(th.space, s, seed),
    "all-effects": lambda th, s, seed: check_all_effects(th, s, seed),
    "interact": lambda th, s, seed: check_interaction(th, s, seed),
}


def run_checks(theory: Theory, postulates=POSTULATE_IDS, samples: int = 10_000, seed: int = 0) -> list[CheckReport]:
    unknown = [p for p in postulates if p not in _CHECKERS]
    if unknown:
        raise ValueError(f"unknown postulate ids: {unknown}")
    return [_CHECKERS[p](theory, samples, seed) for p in postulates]


def replay(report: CheckReport, theory: Theory) -> bool:
    """Re-derive a failure from its witness alone. True if the violation is reproduced."""
    if report.status != "fail" or report.witness is None:
        raise ValueError("only failed reports with a witness can be replayed")
    w = report.witness
    pid = report.postulate
    space = theory.space
    if pid == "nse":
        if "all" in w or "direction" in w:
            pass
        else:
            return replay_nse_witness(space, w)["reproduced"]
    if pid in ("cr", "continuity"):
        if "order" in w:
            return not theory.group.connected
        w1, w2 = np.asarray(w["omega1"]), np.asarray(w["omega2"])
        if theory.group.kind == "finite":
            return bool(np.min(np.linalg.norm(theory.group.elements @ w1 - w2, axis=1)) > 2 * 1e-7)
        from .groups import _newton_reach
        return _newton_reach(theory.group.generators, w1, w2, as_rng(0)) > 1e-7
    if pid == "tl":
        if "k_AB" in w:
            return w["k_AB"] != w["k_A"] * w["k_B"]
        return numerical_rank(CompositeSpace([space, space]).product_extreme_points()) != w["expected"]
    if pid in ("all-effects", "nse") and "direction" in w:
        c = np.asarray(w["direction"])
        h_eff, _ = _effect_support(space, c)
        Estar = np.asarray(w["missing_effect"])
        return (space.is_valid_effect(Estar)
                and h_eff - _list_support(space, theory.effects, c) > 2 * 10 * space.tol)
    if pid in ("interact", "dimension"):
        if "identity_component_dim" in w or "rule" in w:
            return True
        scan = interaction_scan(int(w["d"]))
        return scan.solution_dim == scan.local_dim
    if pid == "quantum":
        val = float(np.asarray(w["effect"]) @ np.asarray(w["G"]) @ np.asarray(w["state"]))
        return val < -report.tolerance or val > 1 + report.tolerance
    if pid == "ellipsoid":
        W = np.asarray(w["W"])
        a, b = np.linalg.norm(W @ w["omega_short"]), np.linalg.norm(W @ w["omega_long"])
        return abs(a - b) / max(a, b) > 1e-8
    raise ValueError(f"no replay rule for {pid!r}")
