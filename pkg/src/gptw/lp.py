"""Small dense two-phase simplex solver.

Problems handled here are tiny (a few dozen rows, at most ~10^4 columns), so a
tableau implementation with Dantzig pricing and a Bland fallback is adequate
and keeps the package free of solver-specific behaviour.

Standard form solved::

    minimize    c @ x
    subject to  A_ub @ x <= b_ub
                A_eq @ x == b_eq
                x >= 0
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LPResult", "linprog", "feasible_combination"]


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded" | "iteration_limit"
    x: np.ndarray | None
    fun: float | None
    iterations: int

    @property
    def success(self) -> bool:
        return self.status == "optimal"


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    piv = T[row]
    colv = T[:, col].copy()
    colv[row] = 0.0
    nz = np.flatnonzero(colv)
    if nz.size:
        T[nz] -= np.outer(colv[nz], piv)


def _tableau(A: np.ndarray, b: np.ndarray, cost: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Rebuild the tableau for ``basis`` from the original data."""
    B = A[:, basis]
    T = np.empty((A.shape[0] + 1, A.shape[1] + 1))
    T[:-1, :-1] = np.linalg.solve(B, A)
    T[:-1, -1] = np.linalg.solve(B, b)
    y = np.linalg.solve(B.T, cost[basis])
    T[-1, :-1] = cost - y @ A
    T[-1, -1] = -(y @ b)
    return T


def _simplex(A, b, cost, basis, ncols, tol, max_iter, it0, refresh_every=64):
    """Minimise ``cost @ x`` over ``A x = b, x >= 0`` from a feasible ``basis``.

    Only the first ``ncols`` columns may enter. The tableau is rebuilt from
    ``A`` every ``refresh_every`` pivots to stop round-off accumulating.
    """
    T = _tableau(A, b, cost, basis)
    m = A.shape[0]
    it = it0
    stall = 0
    last_obj = T[-1, -1]
    since = 0
    while it < max_iter:
        red = T[-1, :ncols]
        if stall > 50:
            cand = np.flatnonzero(red < -tol)
            col = int(cand[0]) if cand.size else -1
        else:
            col = int(np.argmin(red))
            if red[col] >= -tol:
                col = -1
        if col < 0:
            return "optimal", T, basis, it
        colv = T[:m, col]
        pos = colv > tol
        if not pos.any():
            if since:
                try:
                    T = _tableau(A, b, cost, basis)
                except np.linalg.LinAlgError:
                    return "unbounded", T, basis, it
                since = 0
                continue
            return "unbounded", T, basis, it
        ratios = np.full(m, np.inf)
        ratios[pos] = np.maximum(T[:m, -1][pos], 0.0) / colv[pos]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + tol * max(1.0, abs(best)))
        # Bland-style tie-break on the leaving variable prevents cycling.
        row = int(ties[np.argmin(basis[ties])])
        _pivot(T, row, col)
        basis[row] = col
        it += 1
        since += 1
        if since >= refresh_every:
            try:
                T = _tableau(A, b, cost, basis)
            except np.linalg.LinAlgError:
                pass
            since = 0
        obj = T[-1, -1]
        stall = stall + 1 if abs(obj - last_obj) <= tol else 0
        last_obj = obj
    return "iteration_limit", T, basis, it


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, *, tol: float = 1e-9,
            max_iter: int = 50_000) -> LPResult:
    """Solve a linear program with nonnegative variables.

    Returns an :class:`LPResult`; infeasibility and unboundedness are reported
    through ``status`` rather than raised.
    """
    c = np.asarray(c, dtype=float).ravel()
    n = c.size
    blocks_A, blocks_b, n_slack = [], [], 0
    if A_ub is not None and np.size(A_ub):
        A_ub = np.atleast_2d(np.asarray(A_ub, dtype=float))
        n_slack = A_ub.shape[0]
        blocks_A.append(np.hstack([A_ub, np.eye(n_slack)]))
        blocks_b.append(np.asarray(b_ub, dtype=float).ravel())
    if A_eq is not None and np.size(A_eq):
        A_eq = np.atleast_2d(np.asarray(A_eq, dtype=float))
        blocks_A.append(np.hstack([A_eq, np.zeros((A_eq.shape[0], n_slack))]))
        blocks_b.append(np.asarray(b_eq, dtype=float).ravel())
    if not blocks_A:
        if np.any(c < -tol):
            return LPResult("unbounded", None, None, 0)
        return LPResult("optimal", np.zeros(n), 0.0, 0)

    A = np.vstack(blocks_A)
    b = np.concatenate(blocks_b)
    if A.shape[1] != n + n_slack:
        raise ValueError("constraint matrix width does not match len(c)")
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0
    m, nv = A.shape
    scale = max(1.0, float(np.abs(A).max(initial=0.0)), float(np.abs(b).max(initial=0.0)))
    ttol = tol * scale

    # Phase 1: artificial identity block, minimise the sum of artificials.
    A1 = np.hstack([A, np.eye(m)])
    cost1 = np.concatenate([np.zeros(nv), np.ones(m)])
    basis = np.arange(nv, nv + m)
    status, T, basis, it = _simplex(A1, b, cost1, basis, nv, ttol, max_iter, 0)
    if status == "iteration_limit":
        return LPResult(status, None, None, it)
    if -T[-1, -1] > ttol * max(1, m):
        return LPResult("infeasible", None, None, it)

    # Drive artificial variables out of the basis; drop redundant rows.
    keep = np.ones(m, dtype=bool)
    for r in range(m):
        if basis[r] >= nv:
            cand = np.flatnonzero(np.abs(T[r, :nv]) > ttol)
            if cand.size:
                col = int(cand[np.argmax(np.abs(T[r, cand]))])
                _pivot(T, r, col)
                basis[r] = col
            else:
                keep[r] = False
    rows = np.flatnonzero(keep)
    A2, b2, basis = A[rows], b[rows], basis[rows]
    cost = np.concatenate([c, np.zeros(n_slack)])
    status, T, basis, it = _simplex(A2, b2, cost, basis, nv, ttol, max_iter, it)
    if status != "optimal":
        return LPResult(status, None, None, it)
    x = np.zeros(nv)
    x[basis] = T[:-1, -1]
    x = np.maximum(x[:n], 0.0)
    return LPResult("optimal", x, float(c @ x), it)


def feasible_combination(P: np.ndarray, target: np.ndarray, *, total: str = "le",
                         tol: float = 1e-9) -> tuple[np.ndarray | None, float]:
    """Find ``lam >= 0`` with ``P @ lam ~= target`` and ``sum(lam) <= 1``.

    ``total="eq"`` requires ``sum(lam) == 1`` instead. The equality is relaxed
    by nonnegative slacks whose L1 norm is minimised, so the LP is always
    feasible; the second return value is that L1 residual.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    target = np.asarray(target, dtype=float).ravel()
    k, m = P.shape
    A_eq = np.hstack([P, np.eye(k), -np.eye(k)])
    c = np.concatenate([np.zeros(m), np.ones(2 * k)])
    row = np.concatenate([np.ones(m), np.zeros(2 * k)])[None, :]
    if total == "eq":
        res = linprog(c, A_eq=np.vstack([A_eq, row]), b_eq=np.append(target, 1.0), tol=tol)
    else:
        res = linprog(c, A_ub=row, b_ub=[1.0], A_eq=A_eq, b_eq=target, tol=tol)
    if not res.success:
        return None, float("inf")
    return res.x[:m], float(res.fun)
