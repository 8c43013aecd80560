"""Restricted master problem: primal weights, dual potential, certificates.

The restricted problem over a column set ``I`` is

    minimize  c_I^T alpha   subject to  A_I alpha = lambda*,  alpha >= 0,

where the columns of ``A_I`` are the probability vectors ``n / N``.  Its
dual ``max lambda*^T y  s.t.  A_I^T y <= c_I`` yields the Kantorovich
potential iterate ``y``.  Solutions are judged by certificates (primal and
dual feasibility, duality gap, complementary slackness), not by method.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .cost import column_cost
from .simplex import NUMERICAL_FAILURE, OPTIMAL, solve_lp
from .state_space import Column

__all__ = [
    "RestrictedProblem",
    "RmpSolution",
    "solve_rmp",
    "is_active",
    "certificate_residuals",
    "certificates_hold",
    "write_lp",
]


@dataclass
class RestrictedProblem:
    columns: list[Column]
    costs: np.ndarray
    marginal: np.ndarray

    def __post_init__(self):
        self.costs = np.asarray(self.costs, dtype=float)
        self.marginal = np.asarray(self.marginal, dtype=float)
        if len(self.columns) != self.costs.size:
            raise ValueError("one cost per column required")
        if self.columns and any(c.n_sites != self.marginal.size for c in self.columns):
            raise ValueError("column length does not match the marginal")

    @classmethod
    def from_columns(cls, columns: Sequence[Column], C: np.ndarray, marginal):
        columns = list(columns)
        return cls(columns, np.array([column_cost(col, C) for col in columns]), marginal)

    @property
    def n_sites(self) -> int:
        return self.marginal.size

    def constraint_matrix(self) -> np.ndarray:
        """``A_I`` with one probability-vector column per configuration."""
        if not self.columns:
            return np.zeros((self.n_sites, 0))
        occ = np.stack([c.occupancy for c in self.columns], axis=1).astype(float)
        return occ / occ.sum(axis=0)


@dataclass
class RmpSolution:
    alpha: np.ndarray
    dual: np.ndarray
    value: float
    status: str
    iterations: int
    basis: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def solve_rmp(
    problem: RestrictedProblem,
    tol: float = 1e-9,
    method: str = "simplex",
    basis=None,
    max_iterations: int | None = None,
) -> RmpSolution:
    """Solve the restricted master problem and its dual.

    Parameters
    ----------
    method : {"simplex", "highs"}
        ``"simplex"`` is the built-in revised simplex (deterministic, warm
        startable through ``basis``); ``"highs"`` calls scipy's HiGHS dual
        simplex and ignores ``basis``.
    basis : sequence of int, optional
        Column positions of a previous optimal basis.
    max_iterations : int, optional
        Pivot cap, default ``50 * n_sites**2``.  Hitting it gives status
        ``"numerical_failure"``.
    """
    A = problem.constraint_matrix()
    c, b = problem.costs, problem.marginal
    m = problem.n_sites
    if max_iterations is None:
        max_iterations = 50 * m * m
    if A.shape[1] == 0:
        return RmpSolution(np.zeros(0), np.zeros(m), float("nan"), "infeasible", 0)
    if method == "simplex":
        res = solve_lp(A, c, b, basis=basis, tol=tol, max_pivots=max_iterations)
        return RmpSolution(res.x, res.y, res.value, res.status, res.iterations, res.basis)
    if method == "highs":
        from scipy.optimize import linprog

        res = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs-ds",
                      options={"maxiter": max_iterations})
        status = {0: OPTIMAL, 2: "infeasible"}.get(res.status, NUMERICAL_FAILURE)
        if res.x is None:
            return RmpSolution(np.zeros(A.shape[1]), np.zeros(m), float("nan"),
                               status, int(res.nit or 0))
        x = np.maximum(res.x, 0.0)
        return RmpSolution(x, np.asarray(res.eqlin.marginals), float(c @ x), status,
                           int(res.nit))
    raise ValueError(f"unknown LP method {method!r}")


def is_active(solution: RmpSolution, k: int, activity_tol: float = 1e-10) -> bool:
    return bool(solution.alpha[k] > activity_tol)


def certificate_residuals(problem: RestrictedProblem, solution: RmpSolution) -> dict:
    """Worst violations of the optimality certificate.

    Keys: ``primal`` (inf-norm of ``A alpha - lambda*``), ``negativity``
    (largest ``-alpha_k``), ``dual`` (largest ``lambda_k^T y - c_k``),
    ``gap`` (``|c^T alpha - lambda*^T y| / (1 + |value|)``) and
    ``slackness`` (largest ``alpha_k (c_k - lambda_k^T y)``).
    """
    A = problem.constraint_matrix()
    alpha, y, c = solution.alpha, solution.dual, problem.costs
    reduced = c - A.T @ y
    primal_value = float(c @ alpha)
    return {
        "primal": float(np.abs(A @ alpha - problem.marginal).max()),
        "negativity": float(max(0.0, -alpha.min())),
        "dual": float(max(0.0, -reduced.min())),
        "gap": abs(primal_value - float(problem.marginal @ y)) / (1.0 + abs(primal_value)),
        "slackness": float(max(0.0, (alpha * reduced).max())),
    }


def certificates_hold(problem: RestrictedProblem, solution: RmpSolution,
                      tau: float = 1e-8) -> bool:
    if not solution.optimal:
        return False
    return all(v <= tau for v in certificate_residuals(problem, solution).values())


def write_lp(problem: RestrictedProblem, path) -> None:
    """Dump the restricted problem in CPLEX LP text format."""
    A = problem.constraint_matrix()
    lines = ["\\ restricted master problem", "Minimize"]
    terms = " + ".join(f"{c:.17g} x{k}" for k, c in enumerate(problem.costs))
    lines.append(f" obj: {terms}")
    lines.append("Subject To")
    for i in range(A.shape[0]):
        nz = np.flatnonzero(A[i])
        row = " + ".join(f"{A[i, k]:.17g} x{k}" for k in nz) or "0 x0"
        lines.append(f" m{i}: {row} = {problem.marginal[i]:.17g}")
    lines.append("Bounds")
    lines.extend(f" x{k} >= 0" for k in range(A.shape[1]))
    lines.append("End")
    Path(path).write_text("\n".join(lines) + "\n")
