import csv
import json

import numpy as np
import pytest

from gencol.algorithm import GenColConfig, run
from gencol.cli import run_cli
from gencol.cost import build_cost_matrix, regularized_coulomb
from gencol.io import SUMMARY_KEYS, emit_results, read_columns, recost_columns
from gencol.state_space import make_uniform_grid_1d

SOLVE = ["solve", "--particles", "5", "--gridpoints", "20", "--marginal", "uniform",
         "--epsilon", "0.1", "--seed", "1"]


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_solve_writes_all_files(tmp_path, capsys):
    out = tmp_path / "a"
    assert run_cli(SOLVE + ["--out", str(out)]) == 0
    for name in ("summary.json", "trace.csv", "columns.csv", "potential.csv",
                 "pair_density.csv"):
        assert (out / name).exists()
    summary = json.loads((out / "summary.json").read_text())
    assert tuple(summary) == SUMMARY_KEYS
    assert summary["reference_cost"] is None and summary["matched"] is None
    trace = rows(out / "trace.csv")
    assert trace[0][:5] == ["iteration", "value", "gain", "samples", "pool_size"]
    assert summary["accepted_columns"] + 1 == len(trace) - 1
    assert len(rows(out / "potential.csv")) == 21
    assert json.loads(capsys.readouterr().out)["final_cost"] == summary["final_cost"]


def test_round_trip_recost(tmp_path):
    out = tmp_path / "a"
    run_cli(SOLVE + ["--reference", "monge", "--init-random", "ntimesl", "--out", str(out)])
    summary = json.loads((out / "summary.json").read_text())
    assert summary["matched"] is True
    C = build_cost_matrix(make_uniform_grid_1d(20), regularized_coulomb(0.1))
    weighted = read_columns(out / "columns.csv")
    assert recost_columns(weighted, C) == pytest.approx(summary["final_cost"], rel=1e-12)
    dens = rows(out / "pair_density.csv")[1:]
    assert {abs(int(i) - int(j)) for i, j, _ in dens} == {4, 8, 12, 16}


def test_identical_invocations_identical_csv(tmp_path):
    for d in ("a", "b"):
        run_cli(SOLVE + ["--out", str(tmp_path / d)])
    for name in ("trace.csv", "columns.csv", "potential.csv", "pair_density.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_seventeen_digits(tmp_path):
    run_cli(SOLVE + ["--out", str(tmp_path)])
    value = rows(tmp_path / "trace.csv")[1][1]
    assert len(value.replace(".", "").lstrip("0")) >= 15


def test_identity_only_result_is_diagonal(tmp_path):
    cfg = GenColConfig.coulomb_1d(3, 6, init_random_columns=0, maxiter=1)
    cfg.maxiter = 1
    res = run(cfg)
    res.trace.records = res.trace.records[:1]
    # emulate the state right after the first solve: stacked columns only
    from gencol.algorithm import initialize_pool, make_rng
    from gencol.rmp import solve_rmp

    pool = initialize_pool(cfg, make_rng(0))
    sol = solve_rmp(pool.problem())
    res.columns, res.weights, res.dual = pool.columns, sol.alpha, sol.dual
    emit_results(res, cfg.grid, tmp_path)
    dens = rows(tmp_path / "pair_density.csv")[1:]
    assert dens and all(i == j for i, j, _ in dens)


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text('particles = 3\ngridpoints = 6\nseed = 4\ninit-random = "0"\nmaxiter = 2\n')
    assert run_cli(["solve", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert len(rows(tmp_path / "a" / "trace.csv")) == 4
    assert run_cli(["solve", "--config", str(cfg), "--maxiter", "1",
                    "--out", str(tmp_path / "b")]) == 0
    assert len(rows(tmp_path / "b" / "trace.csv")) == 3


def test_marginal_and_cost_files(tmp_path):
    dens = tmp_path / "dens.csv"
    dens.write_text("\n".join(f"{i},{w}" for i, w in enumerate([1, 2, 3, 2, 1], 1)) + "\n")
    C = build_cost_matrix(make_uniform_grid_1d(5), regularized_coulomb(0.3))
    np.savetxt(tmp_path / "C.csv", C, delimiter=",", fmt="%.17g")
    out = tmp_path / "o"
    assert run_cli(["solve", "--particles", "3", "--marginal", f"file:{dens}",
                    "--cost-file", str(tmp_path / "C.csv"), "--reference", "full-lp",
                    "--out", str(out)]) == 0
    assert json.loads((out / "summary.json").read_text())["matched"] is True


def test_bad_flags(tmp_path, capsys):
    assert run_cli(["solve", "--particles", "3", "--gridpoints", "7", "--reference", "monge",
                    "--out", str(tmp_path)]) == 2
    assert "monge" in capsys.readouterr().err
    assert run_cli(["solve", "--gridpoints", "7", "--out", str(tmp_path)]) == 2
    assert run_cli(["solve", "--particles", "3", "--gridpoints", "7",
                    "--init-random", "lots", "--out", str(tmp_path)]) == 2
    with pytest.raises(SystemExit):
        run_cli(["solve", "--mutation", "crossover"])


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert run_cli(SOLVE + ["--out", str(blocker / "sub")]) != 0


def test_suite(tmp_path, capsys):
    manifest = tmp_path / "thermo.toml"
    manifest.write_text(f"""
out = "{tmp_path / 'suite'}"

[[experiment]]
name = "N5_L20"
particles = 5
gridpoints = 20
init-random = "ntimesl"
reference = "monge"
seeds = [1, 2]

[[experiment]]
name = "N3_L6"
particles = 3
gridpoints = 6
marginal = "sine"
reference = "full-lp"
seeds = [1]
""")
    assert run_cli(["suite", "--manifest", str(manifest)]) == 0
    summary = rows(tmp_path / "suite" / "summary.csv")
    assert len(summary) == 4 and all(r[4] == "True" for r in summary[1:])
    table = json.loads((tmp_path / "suite" / "table.json").read_text())
    assert table[0]["total_columns"] == 42504
    assert table[0]["sampled_average"] == np.mean(table[0]["sampled"])
    assert (tmp_path / "suite" / "N5_L20" / "seed2" / "trace.csv").exists()
    assert "N5_L20" in capsys.readouterr().out


def test_suite_rejects_repeated_seeds(tmp_path):
    manifest = tmp_path / "m.toml"
    manifest.write_text('[[experiment]]\nparticles = 2\ngridpoints = 4\nseeds = [1, 1]\n')
    assert run_cli(["suite", "--manifest", str(manifest), "--out", str(tmp_path)]) == 2


def test_reduce(tmp_path, capsys):
    g = tmp_path / "g.txt"
    g.write_text("1 2\n2 3\n")
    assert run_cli(["reduce", "--graph", str(g), "--k", "3", "--out", str(tmp_path / "r")]) == 0
    assert json.loads(capsys.readouterr().out) == {"cdp": False, "pdp": False}
    assert (tmp_path / "r" / "pdp.txt").read_text().startswith("N 3\nl 3\nK 6\n")


def test_oracle_commands(tmp_path, capsys):
    assert run_cli(["oracle", "extremum", "--q", "5"]) == 0
    assert json.loads(capsys.readouterr().out)["max"] == 20
    assert run_cli(["oracle", "monge", "--particles", "5", "--gridpoints", "20",
                    "--out", str(tmp_path / "m")]) == 0
    monge = json.loads(capsys.readouterr().out)
    assert run_cli(["oracle", "full-lp", "--particles", "5", "--gridpoints", "20"]) == 0
    full = json.loads(capsys.readouterr().out)
    assert full["value"] == pytest.approx(monge["value"], abs=1e-10)
    assert len(read_columns(tmp_path / "m" / "columns.csv")) == 4
