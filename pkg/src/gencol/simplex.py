"""Dense revised simplex for ``min c^T x  s.t.  A x = b, x >= 0``.

Sized for restricted master problems: a few dozen rows and a few hundred
columns.  The basis is refactored at every pivot, which is cheap at that
size and keeps the iterates clean.  Dantzig pricing is used until a run of
degenerate pivots is seen, then Bland's rule takes over so the method
cannot cycle.

Variables ``0..n-1`` are the columns of ``A``; ``n..n+m-1`` are artificial
unit columns used to complete a starting basis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

__all__ = ["LPResult", "solve_lp"]

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
NUMERICAL_FAILURE = "numerical_failure"
UNBOUNDED = "unbounded"

_PIVOT_TOL = 1e-9
_DEGENERATE_STREAK = 50


@dataclass
class LPResult:
    x: np.ndarray
    y: np.ndarray
    value: float
    status: str
    iterations: int
    basis: np.ndarray  # real column indices in the final basis


class _Tableau:
    """Basis bookkeeping over the real columns plus signed artificials."""

    def __init__(self, A, b, basis, art_sign):
        self.A = A
        self.b = b
        self.m, self.n = A.shape
        self.basis = np.asarray(basis, dtype=np.int64)
        self.art_sign = art_sign

    def column(self, j):
        if j < self.n:
            return self.A[:, j]
        e = np.zeros(self.m)
        e[j - self.n] = self.art_sign[j - self.n]
        return e

    def matrix(self):
        B = np.empty((self.m, self.m))
        for p, j in enumerate(self.basis):
            B[:, p] = self.column(j)
        return B

    def factor(self):
        with np.errstate(all="ignore"):
            lu = sla.lu_factor(self.matrix(), check_finite=False)
        if not np.all(np.isfinite(lu[0])) or np.min(np.abs(np.diag(lu[0]))) < 1e-13:
            raise np.linalg.LinAlgError("singular basis")
        return lu


def _crash_basis(A, b):
    """Unit-vector columns of ``A`` where available, artificials elsewhere."""
    m, n = A.shape
    basis = np.full(m, -1, dtype=np.int64)
    nz = A != 0
    unit = np.flatnonzero(nz.sum(axis=0) == 1)
    for j in unit:
        r = int(np.flatnonzero(nz[:, j])[0])
        if basis[r] < 0 and A[r, j] > 0:
            basis[r] = j
    missing = basis < 0
    basis[missing] = n + np.flatnonzero(missing)
    art_sign = np.where(b < 0, -1.0, 1.0)
    return basis, art_sign


def _complete_basis(A, keep):
    """Extend independent columns ``keep`` by artificials to a full basis."""
    m, n = A.shape
    keep = [int(j) for j in dict.fromkeys(keep) if 0 <= j < n]
    basis = np.full(m, -1, dtype=np.int64)
    if keep:
        P, _, U = sla.lu(A[:, keep])
        rows = np.argmax(P, axis=0)
        k = len(keep)
        diag = np.abs(np.diag(U[:k, :k]))
        scale = max(1.0, float(diag.max(initial=0.0)))
        for p in range(k):
            if diag[p] > 1e-9 * scale:
                basis[rows[p]] = keep[p]
    missing = basis < 0
    basis[missing] = n + np.flatnonzero(missing)
    return basis


def _iterate(tab, cost, tol, max_pivots, counter, entering_ok):
    """Primal simplex pivots from a feasible basis.

    ``counter`` is a one-element list accumulating pivots across phases.
    Returns (status, xB, y).
    """
    A, b, n = tab.A, tab.b, tab.n
    bland = False
    streak = 0
    while True:
        lu = tab.factor()
        xB = sla.lu_solve(lu, b, check_finite=False)
        y = sla.lu_solve(lu, cost[tab.basis], trans=1, check_finite=False)
        d = cost[:n] - A.T @ y
        cand = entering_ok.copy()
        cand[tab.basis[tab.basis < n]] = False
        neg = np.flatnonzero(cand & (d < -tol))
        if neg.size == 0:
            return OPTIMAL, xB, y
        if counter[0] >= max_pivots:
            return NUMERICAL_FAILURE, xB, y
        q = int(neg[0]) if bland else int(neg[np.argmin(d[neg])])
        w = sla.lu_solve(lu, A[:, q], check_finite=False)
        pos = np.flatnonzero(w > _PIVOT_TOL)
        if pos.size == 0:
            return UNBOUNDED, xB, y
        ratios = np.maximum(xB[pos], 0.0) / w[pos]
        theta = ratios.min()
        ties = pos[ratios <= theta + 1e-12 * (1.0 + theta)]
        if bland:
            r = int(ties[np.argmin(tab.basis[ties])])
        else:
            # artificials leave first, then the numerically largest pivot
            art = ties[tab.basis[ties] >= n]
            pool = art if art.size else ties
            r = int(pool[np.argmax(w[pool])])
        tab.basis[r] = q
        counter[0] += 1
        if theta <= 1e-12:
            streak += 1
            if streak > _DEGENERATE_STREAK:
                bland = True
        else:
            streak = 0


def _drive_out_artificials(tab):
    n = tab.n
    for p in range(tab.m):
        if tab.basis[p] < n:
            continue
        lu = tab.factor()
        e = np.zeros(tab.m)
        e[p] = 1.0
        row = sla.lu_solve(lu, e, trans=1, check_finite=False) @ tab.A
        row[tab.basis[tab.basis < n]] = 0.0
        j = int(np.argmax(np.abs(row)))
        if abs(row[j]) > 1e-7:
            tab.basis[p] = j
        # otherwise the row is redundant for the current columns; the
        # artificial stays basic at level zero and never changes


def solve_lp(A, c, b, basis=None, tol: float = 1e-9, max_pivots: int | None = None):
    """Solve the standard-form LP; see module docstring.

    Parameters
    ----------
    basis : sequence of int, optional
        Column indices of a previous basis (warm start).  Missing or stale
        entries are replaced by artificials; an infeasible warm basis falls
        back to the crash basis.
    tol : float
        Reduced-cost optimality and feasibility tolerance.
    max_pivots : int, optional
        Pivot cap; defaults to ``50 * m**2``.
    """
    A = np.asarray(A, dtype=float)
    c = np.asarray(c, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if max_pivots is None:
        max_pivots = 50 * m * m
    counter = [0]

    tab = None
    if basis is not None and len(basis) > 0:
        try:
            cand = _complete_basis(A, basis)
            art_sign = np.ones(m)
            t = _Tableau(A, b, cand, art_sign)
            xB = sla.lu_solve(t.factor(), b, check_finite=False)
            is_art = cand >= n
            art_sign[cand[is_art] - n] = np.where(xB[is_art] < 0, -1.0, 1.0)
            xB = np.where(is_art, np.abs(xB), xB)
            if xB.min() >= -1e-11:
                tab = t
        except (np.linalg.LinAlgError, ValueError):
            tab = None
    if tab is None:
        cand, art_sign = _crash_basis(A, b)
        tab = _Tableau(A, b, cand, art_sign)

    entering = np.ones(n, dtype=bool)
    try:
        if np.any(tab.basis >= n):
            phase1 = np.concatenate([np.zeros(n), np.ones(m)])
            status, xB, _ = _iterate(tab, phase1, tol, max_pivots, counter, entering)
            if status != OPTIMAL:
                return _result(tab, c, status, counter[0])
            infeas = float(xB[tab.basis >= n].sum())
            if infeas > 1e3 * tol * (1.0 + np.abs(b).sum()):
                return _result(tab, c, INFEASIBLE, counter[0])
            _drive_out_artificials(tab)
        phase2 = np.concatenate([c, np.zeros(m)])
        status, _, _ = _iterate(tab, phase2, tol, max_pivots, counter, entering)
        return _result(tab, c, status, counter[0])
    except np.linalg.LinAlgError:
        return _result(None, c, NUMERICAL_FAILURE, counter[0], shape=(m, n))


def _result(tab, c, status, iterations, shape=None):
    if tab is None:
        m, n = shape
        return LPResult(np.zeros(n), np.zeros(m), float("nan"), status, iterations,
                        np.zeros(0, dtype=np.int64))
    n, m = tab.n, tab.m
    lu = tab.factor()
    xB = sla.lu_solve(lu, tab.b, check_finite=False)
    cost = np.concatenate([c, np.zeros(m)])
    y = sla.lu_solve(lu, cost[tab.basis], trans=1, check_finite=False)
    x = np.zeros(n)
    real = tab.basis < n
    x[tab.basis[real]] = xB[real]
    x[np.abs(x) < 1e-15] = 0.0
    if status == OPTIMAL:
        x = np.maximum(x, 0.0)
    return LPResult(x, y, float(c @ x), status, iterations, tab.basis[real].copy())
