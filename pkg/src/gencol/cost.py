"""Pairwise costs, fast column costs and two-point marginals.

For a pairwise symmetric cost ``c(x_1..x_N) = sum_{i<j} w(x_i, x_j)`` the
cost of a configuration with occupancies ``n`` is

    c_n = 1/2 * n^T C n - 1/2 * diag(C)^T n,     C_ij = w(a_i, a_j),

i.e. the same number as ``N^2/2 lam^T C lam - N/2 diag(C)^T lam`` with
``lam = n / N``.  Only the occupied sites enter, so the work is quadratic
in the support size, not in ``N`` or the grid size.
"""
from __future__ import annotations

from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .state_space import Column, Grid

__all__ = [
    "regularized_coulomb",
    "build_cost_matrix",
    "as_cost_matrix",
    "load_cost_csv",
    "column_cost",
    "column_costs",
    "column_cost_bruteforce",
    "pair_marginal",
    "plan_pair_marginal",
]

PairPotential = Callable[[np.ndarray, np.ndarray], np.ndarray]


def regularized_coulomb(epsilon: float = 0.1) -> PairPotential:
    """``w(x, y) = 1 / sqrt(epsilon**2 + |x - y|**2)`` on coordinate arrays."""
    eps2 = float(epsilon) ** 2

    def w(x, y):
        d2 = np.sum((np.asarray(x, float) - np.asarray(y, float)) ** 2, axis=-1)
        with np.errstate(divide="ignore"):
            return 1.0 / np.sqrt(eps2 + d2)

    return w


def as_cost_matrix(C) -> np.ndarray:
    """Validate a tabulated cost matrix (square, symmetric, finite)."""
    C = np.array(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError("cost matrix must be square")
    if not np.all(np.isfinite(C)):
        raise ValueError("cost matrix has non-finite entries")
    if not np.allclose(C, C.T, rtol=0, atol=1e-12 * (1 + np.abs(C).max())):
        raise ValueError("cost matrix must be symmetric")
    C = 0.5 * (C + C.T)
    C.setflags(write=False)
    return C


def build_cost_matrix(grid: Grid, w: PairPotential) -> np.ndarray:
    """``C[i, j] = w(a_i, a_j)`` over all site pairs, diagonal included."""
    x = grid.sites
    C = np.asarray(w(x[:, None, :], x[None, :, :]), dtype=float)
    if C.shape != (grid.n_sites, grid.n_sites):
        raise ValueError("pair potential returned the wrong shape")
    if not np.all(np.isfinite(C)):
        raise ValueError(
            "pair potential is not finite on all site pairs "
            "(unregularized Coulomb has infinite self-interaction)"
        )
    return as_cost_matrix(C)


def load_cost_csv(path) -> np.ndarray:
    return as_cost_matrix(np.loadtxt(Path(path), delimiter=",", ndmin=2))


def _occupancy(col) -> np.ndarray:
    return col.occupancy if isinstance(col, Column) else np.asarray(col)


def column_cost(col, C: np.ndarray) -> float:
    """Interaction energy of a configuration, evaluated on its support."""
    n = _occupancy(col)
    if n.shape[0] != C.shape[0]:
        raise ValueError("column length does not match the cost matrix")
    s = np.flatnonzero(n)
    ns = n[s].astype(float)
    Cs = C[np.ix_(s, s)]
    return 0.5 * float(ns @ Cs @ ns - np.diagonal(Cs) @ ns)


def column_costs(occupancies: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Vectorized :func:`column_cost` for the rows of an occupancy array."""
    n = np.asarray(occupancies, dtype=float)
    if n.shape[1] != C.shape[0]:
        raise ValueError("column length does not match the cost matrix")
    return 0.5 * (np.einsum("ki,ij,kj->k", n, C, n) - n @ np.diagonal(C))


def column_cost_bruteforce(col, C: np.ndarray) -> float:
    """Sum of ``C[x_i, x_j]`` over all unordered particle pairs ``i < j``."""
    n = _occupancy(col)
    if n.shape[0] != C.shape[0]:
        raise ValueError("column length does not match the cost matrix")
    x = np.repeat(np.arange(n.shape[0]), n)
    total = 0.0
    for i in range(len(x)):
        for j in range(i + 1, len(x)):
            total += C[x[i], x[j]]
    return total


def pair_marginal(col: Column) -> np.ndarray:
    """Two-point marginal of the symmetrized configuration.

    ``N/(N-1) lam lam^T - 1/(N-1) diag(lam)`` with ``lam = n / N``.
    """
    N = col.n_particles
    if N < 2:
        raise ValueError("pair marginal needs at least 2 particles")
    lam = col.occupancy / N
    M = (N * np.outer(lam, lam) - np.diag(lam)) / (N - 1)
    # exact zeros where the formula cancels (single occupancy on the diagonal)
    M[np.abs(M) < 1e-15] = 0.0
    return M


def plan_pair_marginal(weighted: Iterable[tuple[Column, float]]) -> np.ndarray:
    """Two-point marginal of the plan ``sum_k alpha_k gamma_{lam_k}``."""
    total = None
    wsum = 0.0
    for col, alpha in weighted:
        if alpha < 0:
            raise ValueError("plan weights must be nonnegative")
        if alpha == 0:
            continue
        term = alpha * pair_marginal(col)
        total = term if total is None else total + term
        wsum += alpha
    if total is None:
        raise ValueError("plan has no positive weights")
    if abs(wsum - 1.0) > 1e-9:
        raise ValueError(f"plan weights sum to {wsum}, not 1")
    return total
