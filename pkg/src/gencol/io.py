"""Result files for plotting and reproducibility.

Every float is written with 17 significant digits so a reloaded run
reproduces its costs to machine precision.  Site indices are 1-based.
"""
from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import numpy as np

from .algorithm import GenColResult, IterationRecord
from .cost import column_costs, plan_pair_marginal
from .state_space import Column, Grid

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = [
    "TRACE_FIELDS",
    "SUMMARY_KEYS",
    "fmt",
    "TraceWriter",
    "write_trace",
    "write_columns",
    "read_columns",
    "write_potential",
    "write_pair_density",
    "write_summary",
    "emit_results",
    "recost_columns",
    "load_toml",
]

TRACE_FIELDS = ("iteration", "value", "gain", "samples", "pool_size", "active", "certificate")
SUMMARY_KEYS = ("final_cost", "reference_cost", "matched", "accepted_columns",
                "sampled_columns", "termination", "wall_seconds")


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


class TraceWriter:
    """Append trace rows to a CSV file as they are produced."""

    def __init__(self, path):
        self._fh = open(Path(path), "w", newline="")
        self._w = csv.writer(self._fh, lineterminator="\n")
        self._w.writerow(TRACE_FIELDS)

    def __call__(self, rec: IterationRecord) -> None:
        self._w.writerow([fmt(v) for v in rec])
        self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_trace(records, path) -> None:
    with TraceWriter(path) as tw:
        for rec in records:
            tw(rec)


def write_columns(weighted, path) -> None:
    """Rows ``weight, n_1, ..., n_l``."""
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for col, alpha in weighted:
            w.writerow([fmt(alpha)] + [str(int(v)) for v in col.occupancy])


def read_columns(path) -> list[tuple[Column, float]]:
    out = []
    with open(Path(path), newline="") as fh:
        for row in csv.reader(fh):
            if row:
                out.append((Column([int(v) for v in row[1:]]), float(row[0])))
    return out


def recost_columns(weighted, C: np.ndarray) -> float:
    occ = np.array([c.occupancy for c, _ in weighted])
    return float(np.array([a for _, a in weighted]) @ column_costs(occ, C))


def write_potential(dual, grid: Grid, path) -> None:
    """Rows ``site, coordinate(s), y``."""
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        coord_names = ["x"] if grid.dim == 1 else [f"x{k + 1}" for k in range(grid.dim)]
        w.writerow(["site", *coord_names, "potential"])
        for i, (x, y) in enumerate(zip(grid.sites, dual)):
            w.writerow([i + 1, *(fmt(v) for v in x), fmt(y)])


def write_pair_density(M: np.ndarray, path) -> None:
    """Nonzero entries of the pair density as ``i, j, value``."""
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j", "value"])
        for i, j in zip(*np.nonzero(M)):
            w.writerow([i + 1, j + 1, fmt(M[i, j])])


def write_summary(path, final_cost, reference_cost, matched, accepted, sampled,
                  termination, wall_seconds) -> dict:
    summary = dict(zip(SUMMARY_KEYS, (float(final_cost), reference_cost, matched,
                                      int(accepted), int(sampled), termination,
                                      float(wall_seconds))))
    Path(path).write_text(json.dumps(summary, indent=2) + "\n")
    return summary


def emit_results(result: GenColResult, grid: Grid, out_dir, reference_cost=None,
                 match_tol: float = 1e-8, trace: bool = True) -> dict:
    """Write summary.json, trace.csv, columns.csv, potential.csv, pair_density.csv.

    Pass ``trace=False`` when trace.csv was already streamed during the run.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    weighted = result.weighted_columns()
    if trace:
        write_trace(result.trace.records, out / "trace.csv")
    write_columns(weighted, out / "columns.csv")
    write_potential(result.dual, grid, out / "potential.csv")
    write_pair_density(plan_pair_marginal(weighted), out / "pair_density.csv")
    matched = None
    if reference_cost is not None:
        matched = bool(abs(result.cost - reference_cost) <= match_tol)
    return write_summary(out / "summary.json", result.cost, reference_cost, matched,
                         result.trace.accepted_columns, result.trace.sampled_columns,
                         result.trace.termination, result.wall_seconds)


def load_toml(path) -> dict:
    with open(Path(path), "rb") as fh:
        return tomllib.load(fh)
