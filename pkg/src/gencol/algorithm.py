"""Genetic column generation.

The outer loop solves the restricted master problem, then mutates randomly
chosen active columns until a child with positive gain ``lam^T y - c`` is
found against the current dual ``y``.  The child joins the pool; when the
pool reaches ``beta * n_sites`` columns the oldest inactive ones are
dropped.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .cost import build_cost_matrix, column_cost, regularized_coulomb
from .rmp import RestrictedProblem, RmpSolution, certificate_residuals, solve_rmp
from .state_space import (
    Column,
    Grid,
    build_marginal,
    make_uniform_grid_1d,
    mutate,
    neighbor_children,
    random_column,
)

__all__ = [
    "GenColConfig",
    "ColumnPool",
    "IterationRecord",
    "RunTrace",
    "GenColResult",
    "SampleOutcome",
    "SolverError",
    "make_rng",
    "initialize_pool",
    "gain",
    "sample_candidate",
    "prune",
    "run",
]

logger = logging.getLogger(__name__)

MAXITER_REACHED = "maxiter_reached"
BUDGET_EXHAUSTED = "sampling_budget_exhausted"
CONVERGED = "converged_to_reference"


class SolverError(RuntimeError):
    """The restricted master problem could not be solved to a certificate."""


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 stream; every random draw of a run comes from it."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass
class GenColConfig:
    """Inputs of a GenCol run.

    ``potential`` is either a pair potential ``w(x, y)`` on coordinate
    arrays or a precomputed symmetric cost matrix.  ``maxiter`` defaults to
    ``200 * n_sites`` and ``init_random_columns`` to ``(beta - 1) * n_sites``.
    ``on_budget`` selects what happens when ``maxsamples`` children in one
    iteration all fail the gain test: ``"terminate"`` ends the run,
    ``"insert"`` appends the last child anyway and carries on.
    """

    n_particles: int
    grid: Grid
    marginal: np.ndarray
    potential: Callable | np.ndarray = field(default_factory=lambda: regularized_coulomb(0.1))
    beta: float = 5
    maxiter: int | None = None
    maxsamples: int = 1000
    seed: int = 0
    init_random_columns: int | None = None
    activity_tol: float = 1e-10
    lp_tol: float = 1e-9
    gain_tol: float = 1e-12
    mutation: str = "stochastic"
    on_budget: str = "terminate"
    reference: float | None = None
    reference_tol: float = 1e-10
    lp_method: str = "simplex"
    warm_start: bool = True

    def __post_init__(self):
        self.marginal = np.asarray(self.marginal, dtype=float)
        n = self.grid.n_sites
        if self.marginal.shape != (n,):
            raise ValueError("marginal length must equal the number of sites")
        if np.any(self.marginal < 0) or abs(self.marginal.sum() - 1) > 1e-12:
            raise ValueError("marginal must be a probability vector")
        if self.n_particles < 2:
            raise ValueError("need at least 2 particles")
        if self.beta < 2:
            raise ValueError("beta must be at least 2")
        if self.maxiter is None:
            self.maxiter = 200 * n
        if self.init_random_columns is None:
            self.init_random_columns = int(round((self.beta - 1) * n))
        if self.maxiter < 1 or self.maxsamples < 1:
            raise ValueError("maxiter and maxsamples must be at least 1")
        if self.mutation not in ("stochastic", "best_neighbor"):
            raise ValueError(f"unknown mutation strategy {self.mutation!r}")
        if self.on_budget not in ("terminate", "insert"):
            raise ValueError(f"unknown budget action {self.on_budget!r}")
        if isinstance(self.potential, np.ndarray):
            from .cost import as_cost_matrix

            self.cost_matrix = as_cost_matrix(self.potential)
            if self.cost_matrix.shape != (n, n):
                raise ValueError("cost matrix does not match the grid")
        else:
            self.cost_matrix = build_cost_matrix(self.grid, self.potential)

    @property
    def n_sites(self) -> int:
        return self.grid.n_sites

    @property
    def capacity(self) -> int:
        """Pool size ``beta * n_sites`` that triggers pruning."""
        return int(round(self.beta * self.n_sites))

    @classmethod
    def coulomb_1d(cls, n_particles: int, n_sites: int, marginal="uniform",
                   epsilon: float = 0.1, spacing: float = 1.0, **kwargs):
        """Regularized Coulomb problem on a uniform 1D chain."""
        grid = make_uniform_grid_1d(n_sites, spacing)
        return cls(n_particles, grid, build_marginal(marginal, n_sites),
                   regularized_coulomb(epsilon), **kwargs)


class ColumnPool:
    """Columns of the restricted problem with ages and activity flags."""

    def __init__(self, marginal):
        self.marginal = np.asarray(marginal, dtype=float)
        self.columns: list[Column] = []
        self.costs: list[float] = []
        self.ages: list[int] = []
        self.active: list[bool] = []
        self._keys: set[bytes] = set()
        self._counter = 0

    def __len__(self):
        return len(self.columns)

    def __contains__(self, col: Column):
        return col.key in self._keys

    def add(self, col: Column, cost: float) -> bool:
        """Append a column; duplicates are rejected."""
        if col.key in self._keys:
            return False
        self.columns.append(col)
        self.costs.append(float(cost))
        self.ages.append(self._counter)
        self.active.append(True)  # unknown until the next solve
        self._keys.add(col.key)
        self._counter += 1
        return True

    def remove(self, positions) -> None:
        drop = set(int(p) for p in positions)
        for p in drop:
            self._keys.discard(self.columns[p].key)
        keep = [p for p in range(len(self)) if p not in drop]
        self.columns = [self.columns[p] for p in keep]
        self.costs = [self.costs[p] for p in keep]
        self.ages = [self.ages[p] for p in keep]
        self.active = [self.active[p] for p in keep]

    def refresh(self, solution: RmpSolution, activity_tol: float) -> None:
        self.active = [bool(a > activity_tol) for a in solution.alpha]

    def problem(self) -> RestrictedProblem:
        return RestrictedProblem(list(self.columns), np.array(self.costs), self.marginal)

    def positions_of(self, ages) -> list[int]:
        where = {a: p for p, a in enumerate(self.ages)}
        return [where[a] for a in ages if a in where]


class IterationRecord(NamedTuple):
    iteration: int
    value: float
    gain: float  # gain of the accepted column, nan if none
    samples: int
    pool_size: int
    active: int
    certificate: float  # worst certificate residual of this solve


@dataclass
class RunTrace:
    records: list[IterationRecord] = field(default_factory=list)
    accepted_columns: int = 0
    sampled_columns: int = 0
    termination: str = ""

    @property
    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.records])

    def __len__(self):
        return len(self.records)


@dataclass
class GenColResult:
    columns: list[Column]
    weights: np.ndarray
    dual: np.ndarray
    cost: float
    trace: RunTrace
    solution: RmpSolution
    pool: ColumnPool
    wall_seconds: float = 0.0

    def weighted_columns(self) -> list[tuple[Column, float]]:
        return list(zip(self.columns, self.weights.tolist()))


class SampleOutcome(NamedTuple):
    child: Column | None
    cost: float
    gain: float
    samples: int
    last: Column | None = None  # last child tried, accepted or not
    last_cost: float = float("nan")


def initialize_pool(config: GenColConfig, rng: np.random.Generator) -> ColumnPool:
    """Stacked columns ``N e_i`` for every site plus distinct random columns."""
    N, n = config.n_particles, config.n_sites
    C = config.cost_matrix
    pool = ColumnPool(config.marginal)
    for i in range(n):
        occ = np.zeros(n, dtype=np.int64)
        occ[i] = N
        col = Column(occ)
        pool.add(col, column_cost(col, C))
    target = len(pool) + config.init_random_columns
    attempts = 0
    # redraw duplicates; the attempt cap only matters for tiny state spaces
    while len(pool) < target and attempts < 100 * max(config.init_random_columns, 1):
        col = random_column(n, N, rng)
        attempts += 1
        if col not in pool:
            pool.add(col, column_cost(col, C))
    return pool


def gain(candidate: Column, y: np.ndarray, cost: float) -> float:
    """``lam^T y - c_lam`` with ``lam = n / N``."""
    return float(candidate.occupancy @ y) / candidate.n_particles - cost


def sample_candidate(pool: ColumnPool, solution: RmpSolution, grid: Grid,
                     rng: np.random.Generator, maxsamples: int, C: np.ndarray,
                     activity_tol: float = 1e-10, gain_tol: float = 1e-12,
                     mutation: str = "stochastic") -> SampleOutcome:
    """Mutate random active columns until one child beats ``gain_tol``.

    Children already in the pool count as samples but are never accepted.
    """
    parents = [pool.columns[k] for k, a in enumerate(solution.alpha) if a > activity_tol]
    y = solution.dual
    samples = 0
    last, last_cost = None, float("nan")
    if not parents:
        return SampleOutcome(None, float("nan"), float("nan"), 0)
    while samples < maxsamples:
        parent = parents[int(rng.integers(0, len(parents)))]
        if mutation == "stochastic":
            children = [mutate(parent, grid, rng)]
        else:
            occ = parent.occupancy
            k = int(rng.integers(0, parent.n_particles))
            site = int(np.searchsorted(np.cumsum(occ), k, side="right"))
            children = neighbor_children(parent, grid, site)
        best = None
        for child in children:
            if samples >= maxsamples:
                break
            samples += 1
            c = column_cost(child, C)
            last, last_cost = child, c
            if child in pool:
                continue
            g = gain(child, y, c)
            if g > gain_tol and (best is None or g > best[2]):
                best = (child, c, g)
        if best is not None:
            return SampleOutcome(best[0], best[1], best[2], samples, last, last_cost)
    return SampleOutcome(None, float("nan"), float("nan"), samples, last, last_cost)


def prune(pool: ColumnPool, n_sites: int, capacity: int) -> list[int]:
    """Drop the oldest ``n_sites`` inactive columns once the pool is full.

    Returns the ages of the removed columns.  Activity flags must reflect
    the latest solve; columns added since then count as active.
    """
    if len(pool) < capacity:
        return []
    inactive = [p for p in range(len(pool)) if not pool.active[p]]
    inactive.sort(key=lambda p: pool.ages[p])
    drop = inactive[:n_sites]
    ages = [pool.ages[p] for p in drop]
    pool.remove(drop)
    return ages


def _solve(pool, config, basis_ages):
    basis = None
    if config.warm_start and basis_ages is not None:
        basis = pool.positions_of(basis_ages)
    problem = pool.problem()
    sol = solve_rmp(problem, tol=config.lp_tol, method=config.lp_method, basis=basis)
    if not sol.optimal:
        raise SolverError(f"restricted master problem: {sol.status}")
    residual = max(certificate_residuals(problem, sol).values())
    return sol, residual


def run(config: GenColConfig, callback: Callable[[IterationRecord], None] | None = None
        ) -> GenColResult:
    """Run GenCol to termination.

    Terminates on ``maxiter`` outer iterations, on a sampling round that
    finds no positive-gain child (unless ``on_budget="insert"``), or when the
    RMP value reaches ``config.reference``.  ``callback`` receives every
    :class:`IterationRecord` as soon as it is complete.
    """
    start = time.perf_counter()
    rng = make_rng(config.seed)
    C = config.cost_matrix
    pool = initialize_pool(config, rng)
    trace = RunTrace()
    basis_ages = None
    iteration = 0
    while True:
        sol, residual = _solve(pool, config, basis_ages)
        basis_ages = [pool.ages[p] for p in sol.basis]
        pool.refresh(sol, config.activity_tol)
        n_active = sum(pool.active)

        def record(g=float("nan"), samples=0):
            rec = IterationRecord(iteration, sol.value, g, samples, len(pool), n_active,
                                  residual)
            trace.records.append(rec)
            if callback is not None:
                callback(rec)

        if config.reference is not None and (
            abs(sol.value - config.reference) <= config.reference_tol * (1 + abs(config.reference))
        ):
            trace.termination = CONVERGED
            record()
            break
        if iteration >= config.maxiter:
            trace.termination = MAXITER_REACHED
            record()
            break
        out = sample_candidate(pool, sol, config.grid, rng, config.maxsamples, C,
                               config.activity_tol, config.gain_tol, config.mutation)
        trace.sampled_columns += out.samples
        child, child_cost = out.child, out.cost
        if child is None:
            if config.on_budget == "terminate" or out.last is None or out.last in pool:
                trace.termination = BUDGET_EXHAUSTED
                record(samples=out.samples)
                break
            child, child_cost = out.last, out.last_cost
            out = out._replace(gain=gain(child, sol.dual, child_cost))
        pool.add(child, child_cost)
        trace.accepted_columns += 1
        prune(pool, config.n_sites, config.capacity)
        record(out.gain, out.samples)
        iteration += 1
        if iteration % 500 == 0:
            logger.info("iteration %d value %.12g pool %d", iteration, sol.value, len(pool))

    # every column carrying weight, so that the plan reproduces sol.value exactly
    act = [p for p in range(len(pool)) if sol.alpha[p] > 0]
    return GenColResult(
        columns=[pool.columns[p] for p in act],
        weights=sol.alpha[act].copy(),
        dual=sol.dual.copy(),
        cost=sol.value,
        trace=trace,
        solution=sol,
        pool=pool,
        wall_seconds=time.perf_counter() - start,
    )
