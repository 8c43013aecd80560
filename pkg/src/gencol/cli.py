"""Command-line front end: ``solve``, ``suite``, ``oracle`` and ``reduce``.

Run ``python -m gencol <command> --help`` for the flags.  ``solve`` and
``suite`` accept TOML files whose keys mirror the long flag names
(``init-random`` or ``init_random``); explicit flags win over file values.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .algorithm import GenColConfig, SolverError, run
from .cost import load_cost_csv, regularized_coulomb
from .io import (
    TraceWriter,
    emit_results,
    fmt,
    load_toml,
    write_columns,
    write_summary,
)
from .oracles import (
    cdp_bruteforce,
    clique_to_pdp,
    e_matrix_extremum_check,
    homogeneous_monge_solution,
    load_edge_list,
    pdp_bruteforce,
    plan_cost,
    solve_full_lp,
)
from .state_space import build_marginal, count_columns, load_grid_csv, make_uniform_grid_1d

logger = logging.getLogger("gencol")

DEFAULTS = {
    "particles": None,
    "gridpoints": None,
    "beta": 5.0,
    "epsilon": 0.1,
    "spacing": 1.0,
    "marginal": "uniform",
    "cost_file": None,
    "seed": 0,
    "maxiter": None,
    "maxsamples": 1000,
    "init_random": "betaminus1",
    "mutation": "stochastic",
    "on_budget": "terminate",
    "reference": "none",
    "match_tol": 1e-8,
    "full_lp_cap": 10**5,
    "out": None,
}


class UsageError(Exception):
    pass


def _add_problem_flags(p, with_run=True):
    p.add_argument("--config", help="TOML file with flag values")
    p.add_argument("--particles", type=int, help="number of particles N")
    p.add_argument("--gridpoints", type=int, help="number of sites (uniform 1D chain)")
    p.add_argument("--epsilon", type=float, help="Coulomb regularization (default 0.1)")
    p.add_argument("--spacing", type=float, help="grid spacing (default 1)")
    p.add_argument("--marginal", help="uniform | sine | file:PATH (CSV: coords..., weight)")
    p.add_argument("--cost-file", help="tabulated cost matrix CSV (overrides --epsilon)")
    if with_run:
        p.add_argument("--beta", type=float, help="pool factor (default 5)")
        p.add_argument("--seed", type=int, help="64-bit seed of the PCG64 stream")
        p.add_argument("--maxiter", type=int, help="outer iterations (default 200*l)")
        p.add_argument("--maxsamples", type=int, help="samples per iteration (default 1000)")
        p.add_argument("--init-random", help="betaminus1 | ntimesl | COUNT")
        p.add_argument("--mutation", choices=["stochastic", "best_neighbor"])
        p.add_argument("--on-budget", choices=["terminate", "insert"],
                       help="action when a sampling round finds no improving child")
        p.add_argument("--reference", choices=["none", "full-lp", "monge"],
                       help="stop once this exact value is reached and report the match")
        p.add_argument("--match-tol", type=float, help="tolerance of the match flag")
    p.add_argument("--full-lp-cap", type=int, help="column cap for the full LP oracle")
    p.add_argument("--out", help="output directory")


def _settings(args, file_values=None) -> dict:
    s = dict(DEFAULTS)
    for k, v in (file_values or {}).items():
        key = k.replace("-", "_")
        if key not in DEFAULTS and key not in ("seeds", "name"):
            raise UsageError(f"unknown configuration key {k!r}")
        s[key] = v
    for k in DEFAULTS:
        v = getattr(args, k, None)
        if v is not None:
            s[k] = v
    return s


def _problem(s):
    """Grid, marginal, potential and marginal kind from settings."""
    m = str(s["marginal"])
    if m.startswith("file:"):
        grid, marginal = load_grid_csv(m[5:])
        kind = "file"
        if s["gridpoints"] is not None and s["gridpoints"] != grid.n_sites:
            raise UsageError("--gridpoints disagrees with the marginal file")
    else:
        if s["gridpoints"] is None:
            raise UsageError("--gridpoints is required")
        grid = make_uniform_grid_1d(int(s["gridpoints"]), float(s["spacing"]))
        marginal = build_marginal(m, grid.n_sites)
        kind = m
    if s["cost_file"]:
        potential = load_cost_csv(s["cost_file"])
    else:
        potential = regularized_coulomb(float(s["epsilon"]))
    if s["particles"] is None:
        raise UsageError("--particles is required")
    return grid, marginal, potential, kind


def _init_random(value, n_particles, n_sites, beta):
    v = str(value)
    if v == "betaminus1":
        return int(round((beta - 1) * n_sites))
    if v == "ntimesl":
        return n_particles * n_sites
    try:
        count = int(v)
    except ValueError:
        raise UsageError(f"bad --init-random value {value!r}") from None
    if count < 0:
        raise UsageError("--init-random must be nonnegative")
    return count


def _reference_cost(s, kind, grid, marginal, C, N):
    ref = s["reference"]
    if ref == "none":
        return None
    if ref == "monge":
        uniform = np.allclose(marginal, 1.0 / grid.n_sites, rtol=0, atol=1e-15)
        if grid.n_sites % N or not uniform or grid.dim != 1:
            raise UsageError("monge reference needs N | l and a uniform 1D marginal")
        return plan_cost(homogeneous_monge_solution(grid.n_sites, N), C)
    if ref == "full-lp":
        return solve_full_lp(grid.n_sites, N, C, marginal, cap=int(s["full_lp_cap"])).value
    raise UsageError(f"unknown reference {ref!r}")


def build_config(s) -> tuple[GenColConfig, float | None]:
    grid, marginal, potential, kind = _problem(s)
    N = int(s["particles"])
    beta = float(s["beta"])
    cfg = GenColConfig(
        n_particles=N,
        grid=grid,
        marginal=marginal,
        potential=potential,
        beta=beta,
        maxiter=s["maxiter"],
        maxsamples=int(s["maxsamples"]),
        seed=int(s["seed"]),
        init_random_columns=_init_random(s["init_random"], N, grid.n_sites, beta),
        mutation=s["mutation"],
        on_budget=s["on_budget"],
    )
    ref = _reference_cost(s, kind, grid, marginal, cfg.cost_matrix, N)
    cfg.reference = ref
    return cfg, ref


def solve_one(s) -> dict:
    """Run one configuration and write its result files into ``s["out"]``."""
    cfg, ref = build_config(s)
    out = Path(s["out"])
    out.mkdir(parents=True, exist_ok=True)
    with TraceWriter(out / "trace.csv") as tw:
        result = run(cfg, callback=tw)
    return emit_results(result, cfg.grid, out, reference_cost=ref,
                        match_tol=float(s["match_tol"]), trace=False)


def cmd_solve(args) -> int:
    s = _settings(args, load_toml(args.config) if args.config else None)
    if not s["out"]:
        raise UsageError("--out is required")
    summary = solve_one(s)
    print(json.dumps(summary))
    return 0


def _suite_job(job):
    name, seed, s = job
    summary = solve_one(s)
    return name, seed, summary


def cmd_suite(args) -> int:
    manifest = load_toml(args.manifest)
    out_root = Path(args.out or manifest.get("out") or "suite_out")
    experiments = manifest.get("experiment") or []
    if not experiments:
        raise UsageError("manifest has no [[experiment]] tables")
    jobs = []
    for k, exp in enumerate(experiments):
        exp = dict(exp)
        name = str(exp.pop("name", f"exp{k}"))
        seeds = exp.pop("seeds", [exp.get("seed", 0)])
        if len(set(seeds)) != len(seeds):
            raise UsageError(f"experiment {name}: seeds must be distinct")
        base = _settings(argparse.Namespace(), exp)
        for seed in seeds:
            s = dict(base, seed=int(seed), out=str(out_root / name / f"seed{seed}"))
            jobs.append((name, int(seed), s))
    # validate every configuration before spending time on runs
    for _, _, s in jobs:
        _problem(s)
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            results = list(ex.map(_suite_job, jobs))
    else:
        results = [_suite_job(j) for j in jobs]

    out_root.mkdir(parents=True, exist_ok=True)
    with open(out_root / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["system", "seed", "final_cost", "reference_cost", "matched",
                    "accepted_columns", "sampled_columns", "wall_seconds", "termination"])
        for name, seed, r in results:
            ref = "" if r["reference_cost"] is None else fmt(r["reference_cost"])
            w.writerow([name, seed, fmt(r["final_cost"]), ref, r["matched"],
                        r["accepted_columns"], r["sampled_columns"],
                        fmt(r["wall_seconds"]), r["termination"]])
    table = []
    for name in dict.fromkeys(n for n, _, _ in results):
        rows = [r for n, _, r in results if n == name]
        s = next(j[2] for j in jobs if j[0] == name)
        total = count_columns(int(s["gridpoints"] or 0), int(s["particles"])) \
            if s["gridpoints"] else None
        table.append({
            "system": name,
            "total_columns": total,
            "accepted": [r["accepted_columns"] for r in rows],
            "sampled": [r["sampled_columns"] for r in rows],
            "sampled_average": float(np.mean([r["sampled_columns"] for r in rows])),
            "all_matched": all(bool(r["matched"]) for r in rows)
            if rows[0]["matched"] is not None else None,
        })
    (out_root / "table.json").write_text(json.dumps(table, indent=2) + "\n")
    for t in table:
        total = f"{t['total_columns']:.4e}" if t["total_columns"] else "-"
        print(f"{t['system']:<12} {total:>12}  accepted {t['accepted']}  "
              f"sampled {t['sampled']}  average {t['sampled_average']:.1f}")
    return 0


def cmd_oracle(args) -> int:
    if args.kind == "extremum":
        if args.q is None:
            raise UsageError("--q is required for the extremum check")
        best, argmax = e_matrix_extremum_check(args.q)
        print(json.dumps({"q": args.q, "max": best, "maximizers": argmax}))
        return 0
    s = _settings(args, load_toml(args.config) if args.config else None)
    grid, marginal, potential, kind = _problem(s)
    N = int(s["particles"])
    cfg = GenColConfig(N, grid, marginal, potential)
    if args.kind == "monge":
        s["reference"] = "monge"
        plan = homogeneous_monge_solution(grid.n_sites, N)
        value = _reference_cost(s, kind, grid, marginal, cfg.cost_matrix, N)
    else:
        res = solve_full_lp(grid.n_sites, N, cfg.cost_matrix, marginal,
                            cap=int(s["full_lp_cap"]))
        plan, value = res.support(), res.value
    if s["out"]:
        out = Path(s["out"])
        out.mkdir(parents=True, exist_ok=True)
        write_columns(plan, out / "columns.csv")
        write_summary(out / "summary.json", value, value, True, 0, 0, args.kind, 0.0)
    print(json.dumps({"kind": args.kind, "value": value, "support": len(plan)}))
    return 0


def cmd_reduce(args) -> int:
    g = load_edge_list(args.graph, args.vertices)
    inst = clique_to_pdp(g, args.k)
    answer = {"cdp": cdp_bruteforce(g, args.k), "pdp": pdp_bruteforce(inst)}
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "pdp.txt").write_text(inst.to_text())
        (out / "answers.json").write_text(json.dumps(answer) + "\n")
    else:
        sys.stdout.write(inst.to_text())
    print(json.dumps(answer))
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gencol", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run GenCol on one problem")
    _add_problem_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("suite", help="run every (experiment, seed) of a TOML manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", help="output root (overrides the manifest)")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("oracle", help="exact reference solutions")
    p.add_argument("kind", choices=["full-lp", "monge", "extremum"])
    p.add_argument("--q", type=int, help="size for the extremum check")
    _add_problem_flags(p, with_run=False)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("reduce", help="clique instance -> pricing decision instance")
    p.add_argument("--graph", required=True, help="edge list, one 1-based 'u v' per line")
    p.add_argument("--k", type=int, required=True, help="clique size K'")
    p.add_argument("--vertices", type=int, help="vertex count (default: largest label)")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_reduce)
    return parser


def run_cli(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ValueError, FileNotFoundError) as exc:
        print(f"gencol: error: {exc}", file=sys.stderr)
        return 2
    except (SolverError, RuntimeError) as exc:
        print(f"gencol: solver failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"gencol: I/O error: {exc}", file=sys.stderr)
        return 4


def main():
    sys.exit(run_cli())
