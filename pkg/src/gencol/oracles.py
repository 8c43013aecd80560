"""Ground truth for small instances and the clique reduction of pricing.

* :func:`solve_full_lp` solves the master problem over every configuration.
* :func:`homogeneous_monge_solution` is the exact optimizer for a uniform
  marginal on a 1D chain when ``N`` divides the number of sites.
* :func:`clique_to_pdp` maps a clique decision instance to a pricing
  decision instance; :func:`cdp_bruteforce` and :func:`pdp_bruteforce`
  decide both sides by exhaustive search.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cost import column_costs
from .rmp import RestrictedProblem, RmpSolution, solve_rmp
from .state_space import Column, count_columns, enumerate_occupancies

__all__ = [
    "Graph",
    "PdpInstance",
    "FullLPResult",
    "solve_full_lp",
    "homogeneous_monge_solution",
    "plan_cost",
    "clique_to_pdp",
    "pdp_bruteforce",
    "cdp_bruteforce",
    "e_matrix_extremum_check",
    "load_edge_list",
]

FULL_LP_CAP = 10**5


@dataclass
class FullLPResult:
    value: float
    weights: np.ndarray
    columns: list[Column]
    solution: RmpSolution
    problem: RestrictedProblem

    def support(self, tol: float = 1e-10) -> list[tuple[Column, float]]:
        return [(c, float(w)) for c, w in zip(self.columns, self.weights) if w > tol]


def solve_full_lp(n_sites: int, n_particles: int, C: np.ndarray, marginal,
                  cap: int = FULL_LP_CAP, method: str = "simplex",
                  tol: float = 1e-9) -> FullLPResult:
    """Optimal value of the discrete problem by enumerating all columns."""
    if count_columns(n_sites, n_particles) > cap:
        raise ValueError("full LP exceeds the enumeration cap")
    occ = enumerate_occupancies(n_sites, n_particles, cap=cap)
    columns = [Column(row) for row in occ]
    problem = RestrictedProblem(columns, column_costs(occ, C), marginal)
    sol = solve_rmp(problem, tol=tol, method=method,
                    max_iterations=max(50 * n_sites**2, 10 * len(columns)))
    if not sol.optimal:
        raise RuntimeError(f"full LP solve failed: {sol.status}")
    return FullLPResult(sol.value, sol.alpha, columns, sol, problem)


def homogeneous_monge_solution(n_sites: int, n_particles: int) -> list[tuple[Column, float]]:
    """Superposition of uniformly spaced configurations.

    Site sets ``{i, i + s, ..., i + (N-1) s}`` with ``s = n_sites / N`` for
    ``i = 1..s``, each with weight ``N / n_sites``.  Indices that would pass
    the last site wrap around, which only relabels the same ``s`` sets.
    """
    N, n = n_particles, n_sites
    if N < 1 or n % N:
        raise ValueError("number of particles must divide the number of sites")
    s = n // N
    out = []
    for i in range(s):
        occ = np.zeros(n, dtype=np.int64)
        occ[(i + s * np.arange(N)) % n] = 1
        out.append((Column(occ), N / n))
    return out


def plan_cost(weighted, C: np.ndarray) -> float:
    occ = np.array([c.occupancy for c, _ in weighted])
    w = np.array([a for _, a in weighted], dtype=float)
    return float(w @ column_costs(occ, C))


@dataclass(frozen=True)
class Graph:
    n_vertices: int
    edges: frozenset

    def __post_init__(self):
        edges = set()
        for e in self.edges:
            u, v = sorted(int(x) for x in e)
            if u == v:
                raise ValueError("self-loops are not allowed")
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise ValueError(f"edge {e} out of range")
            edges.add((u, v))
        object.__setattr__(self, "edges", frozenset(edges))

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.n_vertices, self.n_vertices), dtype=np.int64)
        for u, v in self.edges:
            A[u, v] = A[v, u] = 1
        return A


@dataclass(frozen=True)
class PdpInstance:
    """Is there ``lam in {0..N}^l`` with ``sum lam = N`` and ``lam^T V lam + a^T lam >= K``?"""

    N: int
    n_sites: int
    K: float
    a: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        V = np.asarray(self.V, dtype=float)
        a = np.asarray(self.a, dtype=float)
        if self.N < 1 or self.n_sites < 1:
            raise ValueError("N and n_sites must be positive")
        if V.shape != (self.n_sites, self.n_sites) or not np.array_equal(V, V.T):
            raise ValueError("V must be a symmetric n_sites x n_sites matrix")
        if a.shape != (self.n_sites,):
            raise ValueError("a must have length n_sites")
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "a", a)

    def to_text(self) -> str:
        lines = [f"N {self.N}", f"l {self.n_sites}", f"K {self.K:.17g}",
                 "a " + " ".join(f"{x:.17g}" for x in self.a), "V"]
        lines += [" ".join(f"{x:.17g}" for x in row) for row in self.V]
        return "\n".join(lines) + "\n"


def clique_to_pdp(g: Graph, k: int) -> PdpInstance:
    """``N = k``, ``K = k (k - 1)``, ``a = 0``, ``V`` = adjacency matrix."""
    if k < 1:
        raise ValueError("clique size must be positive")
    return PdpInstance(N=k, n_sites=g.n_vertices, K=k * (k - 1),
                       a=np.zeros(g.n_vertices), V=g.adjacency().astype(float))


def pdp_bruteforce(inst: PdpInstance, cap: int = 10**6) -> bool:
    occ = enumerate_occupancies(inst.n_sites, inst.N, cap=cap).astype(float)
    vals = np.einsum("ki,ij,kj->k", occ, inst.V, occ) + occ @ inst.a
    return bool(np.any(vals >= inst.K))


def cdp_bruteforce(g: Graph, k: int) -> bool:
    """Does ``g`` contain a clique with at least ``k`` vertices?"""
    if g.n_vertices > 12:
        raise ValueError("exhaustive clique search limited to 12 vertices")
    if k <= 1:
        return k <= g.n_vertices
    for subset in itertools.combinations(range(g.n_vertices), k):
        if all((u, v) in g.edges for u, v in itertools.combinations(subset, 2)):
            return True
    return False


def e_matrix_extremum_check(q: int):
    """Maximize ``lam^T E lam`` over ``lam in N_0^q`` with ``sum lam = q``.

    ``E`` has zero diagonal and unit off-diagonal entries.  Returns the
    maximum and the list of maximizers (as tuples).
    """
    if not 2 <= q <= 7:
        raise ValueError("q must lie in 2..7")
    occ = enumerate_occupancies(q, q)
    E = np.ones((q, q), dtype=np.int64) - np.eye(q, dtype=np.int64)
    vals = np.einsum("ki,ij,kj->k", occ, E, occ)
    best = int(vals.max())
    return best, [tuple(int(x) for x in occ[k]) for k in np.flatnonzero(vals == best)]


def load_edge_list(path, n_vertices: int | None = None) -> Graph:
    """Read ``u v`` pairs (1-based), one per line; ``#`` starts a comment."""
    edges = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        u, v = (int(t) for t in line.split()[:2])
        edges.append((u - 1, v - 1))
    n = n_vertices or max([max(e) for e in edges], default=-1) + 1
    return Graph(n, frozenset(edges))
