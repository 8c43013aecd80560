"""Grids, marginals and N-particle configurations ("columns").

A column is a 1/N-quantized probability measure on the grid.  It is stored
by its integer occupancy vector ``n`` (``n_i`` particles on site ``i``) so
that ``lambda = n / N``; the symmetrized N-point Dirac measure it stands for
is never materialized.
"""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = [
    "Grid",
    "Column",
    "make_uniform_grid_1d",
    "make_grid",
    "build_marginal",
    "count_columns",
    "enumerate_occupancies",
    "enumerate_columns",
    "column_to_probability",
    "mutate",
    "neighbor_children",
    "random_column",
    "load_grid_csv",
]

DEFAULT_ENUMERATION_CAP = 10**6


@dataclass(frozen=True)
class Grid:
    """Finite state space with a nearest-neighbour structure.

    Attributes
    ----------
    sites : ndarray, shape (n_sites, dim)
        Euclidean coordinates of the discretization points.
    neighbors : tuple of tuple of int
        ``neighbors[i]`` lists the (0-based) sites adjacent to site ``i``.
    """

    sites: np.ndarray
    neighbors: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        sites = np.array(self.sites, dtype=float)
        if sites.ndim == 1:
            sites = sites[:, None]
        sites.setflags(write=False)
        object.__setattr__(self, "sites", sites)
        object.__setattr__(
            self, "neighbors", tuple(tuple(int(j) for j in nb) for nb in self.neighbors)
        )
        n = sites.shape[0]
        if len(self.neighbors) != n:
            raise ValueError("need one neighbour list per site")
        if len({tuple(s) for s in sites.tolist()}) != n:
            raise ValueError("grid sites must be pairwise distinct")
        for i, nb in enumerate(self.neighbors):
            if not nb:
                raise ValueError(f"site {i} has no neighbours")
            for j in nb:
                if not 0 <= j < n or j == i:
                    raise ValueError(f"invalid neighbour {j} of site {i}")
                if i not in self.neighbors[j]:
                    raise ValueError("neighbour relation must be symmetric")

    @property
    def n_sites(self) -> int:
        return self.sites.shape[0]

    @property
    def dim(self) -> int:
        return self.sites.shape[1]


def make_grid(sites, neighbors) -> Grid:
    return Grid(np.asarray(sites, dtype=float), neighbors)


def make_uniform_grid_1d(n_sites: int, spacing: float = 1.0) -> Grid:
    """Uniform chain ``spacing * (1, ..., n_sites)`` without wraparound."""
    if n_sites < 2:
        raise ValueError("a 1D grid needs at least 2 sites")
    if not spacing > 0:
        raise ValueError("spacing must be positive")
    sites = spacing * np.arange(1, n_sites + 1, dtype=float)
    neighbors = [
        tuple(j for j in (i - 1, i + 1) if 0 <= j < n_sites) for i in range(n_sites)
    ]
    return Grid(sites[:, None], tuple(neighbors))


def build_marginal(kind, n_sites: int | None = None) -> np.ndarray:
    """Normalized one-point marginal.

    Parameters
    ----------
    kind : {"uniform", "sine"} or array_like
        ``"sine"`` gives ``c0 * (0.2 + sin(i / (n_sites + 1))**2)`` for
        ``i = 1..n_sites`` with the argument in radians.  An array is taken
        as explicit nonnegative weights and renormalized.
    n_sites : int, optional
        Required for the named kinds.
    """
    if isinstance(kind, str):
        if n_sites is None or n_sites < 1:
            raise ValueError("n_sites required for named marginals")
        if kind == "uniform":
            w = np.ones(n_sites)
        elif kind == "sine":
            i = np.arange(1, n_sites + 1)
            w = 0.2 + np.sin(i / (n_sites + 1)) ** 2
        else:
            raise ValueError(f"unknown marginal kind {kind!r}")
    else:
        w = np.asarray(kind, dtype=float).ravel()
        if n_sites is not None and w.size != n_sites:
            raise ValueError("weights length does not match n_sites")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("marginal weights must be finite and nonnegative")
        if w.sum() <= 0:
            raise ValueError("marginal weights are all zero")
    return w / w.sum()


class Column:
    """An N-particle configuration given by integer site occupancies."""

    __slots__ = ("occupancy", "n_particles", "_key")

    def __init__(self, occupancy):
        occ = np.array(occupancy, dtype=np.int64).ravel()
        if occ.size == 0 or np.any(occ < 0):
            raise ValueError("occupancy must be a nonempty nonnegative vector")
        occ.setflags(write=False)
        self.occupancy = occ
        self.n_particles = int(occ.sum())
        if self.n_particles < 1:
            raise ValueError("a column needs at least one particle")
        self._key = occ.tobytes()

    @property
    def n_sites(self) -> int:
        return self.occupancy.size

    @property
    def key(self) -> bytes:
        """Hashable identity of the configuration."""
        return self._key

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.occupancy)

    def particles(self) -> np.ndarray:
        """Site index of each particle, sorted."""
        return np.repeat(np.arange(self.n_sites), self.occupancy)

    def __eq__(self, other):
        if not isinstance(other, Column):
            return NotImplemented
        return self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"Column({self.occupancy.tolist()})"


def count_columns(n_sites: int, n_particles: int) -> int:
    """Number of N-particle configurations on ``n_sites`` sites."""
    return math.comb(n_particles + n_sites - 1, n_particles)


def enumerate_occupancies(
    n_sites: int, n_particles: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> np.ndarray:
    """All occupancy vectors as rows of an int array, lexicographically descending.

    The order is that of ``itertools.combinations_with_replacement`` on the
    particle sites, i.e. ``(N, 0, ...), (N-1, 1, 0, ...), ...``.
    """
    total = count_columns(n_sites, n_particles)
    if total > cap:
        raise ValueError(f"{total} columns exceed the enumeration cap {cap}")
    out = np.zeros((total, n_sites), dtype=np.int64)
    combos = itertools.combinations_with_replacement(range(n_sites), n_particles)
    for k, combo in enumerate(combos):
        np.add.at(out[k], list(combo), 1)
    return out


def enumerate_columns(
    n_sites: int, n_particles: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> list[Column]:
    return [Column(row) for row in enumerate_occupancies(n_sites, n_particles, cap)]


def column_to_probability(col: Column) -> np.ndarray:
    return col.occupancy / col.n_particles


def random_column(n_sites: int, n_particles: int, rng: np.random.Generator) -> Column:
    """Drop ``n_particles`` independently and uniformly onto the sites."""
    sites = rng.integers(0, n_sites, size=n_particles)
    return Column(np.bincount(sites, minlength=n_sites))


def _pick_particle_site(occupancy: np.ndarray, rng: np.random.Generator) -> int:
    # uniform over particles == site chosen with probability n_a / N
    k = int(rng.integers(0, int(occupancy.sum())))
    return int(np.searchsorted(np.cumsum(occupancy), k, side="right"))


def mutate(parent: Column, grid: Grid, rng: np.random.Generator) -> Column:
    """Move one uniformly chosen particle to a uniformly chosen neighbouring site."""
    a = _pick_particle_site(parent.occupancy, rng)
    nb = grid.neighbors[a]
    b = nb[int(rng.integers(0, len(nb)))]
    child = parent.occupancy.copy()
    child[a] -= 1
    child[b] += 1
    return Column(child)


def neighbor_children(parent: Column, grid: Grid, site: int) -> list[Column]:
    """All children obtained by moving one particle from ``site`` to a neighbour."""
    if parent.occupancy[site] == 0:
        raise ValueError("site is unoccupied")
    children = []
    for b in grid.neighbors[site]:
        occ = parent.occupancy.copy()
        occ[site] -= 1
        occ[b] += 1
        children.append(Column(occ))
    return children


def load_grid_csv(path, neighbors: Sequence[Sequence[int]] | None = None):
    """Read sites and marginal weights from CSV rows ``coord_1, ..., coord_d, weight``.

    Without explicit ``neighbors`` the sites must be 1D; they are sorted
    into a chain.  Returns ``(grid, marginal)``.
    """
    rows = []
    with open(Path(path), newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].lstrip().startswith("#"):
                continue
            try:
                rows.append([float(v) for v in rec])
            except ValueError:
                if rows:
                    raise
                continue  # header line
    data = np.array(rows, dtype=float)
    if data.ndim != 2 or data.shape[1] < 2:
        raise ValueError("expected rows of coordinates followed by a weight")
    coords, weights = data[:, :-1], data[:, -1]
    if neighbors is None:
        if coords.shape[1] != 1:
            raise ValueError("neighbour lists are required for dim > 1")
        order = np.argsort(coords[:, 0], kind="stable")
        coords, weights = coords[order], weights[order]
        n = len(coords)
        if n < 2:
            raise ValueError("a 1D grid needs at least 2 sites")
        neighbors = [tuple(j for j in (i - 1, i + 1) if 0 <= j < n) for i in range(n)]
    return Grid(coords, tuple(tuple(nb) for nb in neighbors)), build_marginal(weights)
