import numpy as np
import pytest

from gencol.algorithm import (
    BUDGET_EXHAUSTED,
    CONVERGED,
    MAXITER_REACHED,
    ColumnPool,
    GenColConfig,
    initialize_pool,
    gain,
    make_rng,
    prune,
    run,
    sample_candidate,
)
from gencol.cost import column_cost
from gencol.oracles import homogeneous_monge_solution, plan_cost, solve_full_lp
from gencol.rmp import RestrictedProblem, certificates_hold, solve_rmp
from gencol.state_space import Column, enumerate_columns


def test_config_defaults():
    cfg = GenColConfig.coulomb_1d(5, 20)
    assert cfg.beta == 5 and cfg.capacity == 100
    assert cfg.maxiter == 4000 and cfg.maxsamples == 1000
    assert cfg.init_random_columns == 80
    with pytest.raises(ValueError):
        GenColConfig.coulomb_1d(1, 20)
    with pytest.raises(ValueError):
        GenColConfig.coulomb_1d(5, 20, beta=1.5)
    with pytest.raises(ValueError):
        GenColConfig.coulomb_1d(5, 20, mutation="crossover")


@pytest.mark.parametrize("N, l, init, size", [(5, 20, 80, 100), (10, 40, 400, 440)])
def test_initial_pool_sizes(N, l, init, size):
    cfg = GenColConfig.coulomb_1d(N, l, init_random_columns=init)
    pool = initialize_pool(cfg, make_rng(0))
    assert len(pool) == size
    assert len({c.key for c in pool.columns}) == size
    for i in range(l):
        assert pool.columns[i].occupancy[i] == N
    for col, c in zip(pool.columns, pool.costs):
        assert c == column_cost(col, cfg.cost_matrix)


def test_identity_only_pool_is_feasible():
    cfg = GenColConfig.coulomb_1d(3, 7, marginal=[1, 2, 3, 4, 3, 2, 1], init_random_columns=0)
    pool = initialize_pool(cfg, make_rng(0))
    sol = solve_rmp(pool.problem())
    assert len(pool) == 7
    np.testing.assert_allclose(sol.alpha, cfg.marginal, atol=1e-15)


def test_gain_examples():
    cfg = GenColConfig.coulomb_1d(2, 6, init_random_columns=0)
    C = cfg.cost_matrix
    pool = initialize_pool(cfg, make_rng(0))
    sol = solve_rmp(pool.problem())
    np.testing.assert_allclose(sol.dual, np.diag(C), rtol=1e-13)
    cand = Column((1, 1, 0, 0, 0, 0))
    g = gain(cand, sol.dual, column_cost(cand, C))
    assert g == pytest.approx((C[0, 0] + C[1, 1]) / 2 - C[0, 1], rel=1e-13)
    assert g > 0
    assert gain(cand, np.zeros(6), 0.7) == -0.7
    for k, col in enumerate(pool.columns):
        assert gain(col, sol.dual, pool.costs[k]) <= cfg.lp_tol


def _solved_pool(cfg, seed=0):
    pool = initialize_pool(cfg, make_rng(seed))
    sol = solve_rmp(pool.problem())
    pool.refresh(sol, cfg.activity_tol)
    return pool, sol


def test_sample_zero_budget():
    cfg = GenColConfig.coulomb_1d(3, 8)
    pool, sol = _solved_pool(cfg)
    out = sample_candidate(pool, sol, cfg.grid, make_rng(1), 0, cfg.cost_matrix)
    assert out.child is None and out.samples == 0


def test_sample_at_full_optimum_finds_nothing():
    cfg = GenColConfig.coulomb_1d(3, 6, marginal=[2, 1, 3, 1, 2, 1])
    pool = ColumnPool(cfg.marginal)
    for col in enumerate_columns(6, 3):
        pool.add(col, column_cost(col, cfg.cost_matrix))
    sol = solve_rmp(pool.problem())
    out = sample_candidate(pool, sol, cfg.grid, make_rng(2), 500, cfg.cost_matrix)
    assert out.child is None and out.samples == 500


def test_sample_accepts_only_positive_new_children():
    cfg = GenColConfig.coulomb_1d(4, 12)
    pool, sol = _solved_pool(cfg)
    out = sample_candidate(pool, sol, cfg.grid, make_rng(3), 1000, cfg.cost_matrix)
    assert out.child is not None and out.child not in pool
    assert out.gain > 0
    assert out.gain == pytest.approx(gain(out.child, sol.dual, out.cost))
    assert 1 <= out.samples <= 1000


def test_sample_best_neighbor():
    cfg = GenColConfig.coulomb_1d(4, 12, mutation="best_neighbor")
    pool, sol = _solved_pool(cfg)
    out = sample_candidate(pool, sol, cfg.grid, make_rng(3), 1000, cfg.cost_matrix,
                           mutation="best_neighbor")
    assert out.child is not None and out.gain > 0


def _pool_with_activity(n, active):
    pool = ColumnPool(np.full(4, 0.25))
    for col in enumerate_columns(4, 4)[:n]:
        pool.add(col, 1.0)
    assert len(pool) == n
    pool.active = list(active)
    return pool


def test_prune_below_capacity_is_noop():
    pool = _pool_with_activity(19, [False] * 19)
    assert prune(pool, 4, 20) == [] and len(pool) == 19


def test_prune_removes_oldest_inactive():
    active = [k % 3 == 0 for k in range(20)]
    pool = _pool_with_activity(20, active)
    removed = prune(pool, 4, 20)
    assert removed == [1, 2, 4, 5]
    assert len(pool) == 16
    assert all(pool.active[p] for p in range(len(pool)) if pool.ages[p] % 3 == 0)


def test_prune_with_few_inactive():
    active = [True] * 20
    for k in (3, 11, 17):
        active[k] = False
    pool = _pool_with_activity(20, active)
    assert prune(pool, 4, 20) == [3, 11, 17]
    assert len(pool) == 17 and all(pool.active)


def test_pool_rejects_duplicates():
    pool = ColumnPool(np.full(3, 1 / 3))
    assert pool.add(Column((1, 1, 0)), 1.0)
    assert not pool.add(Column((1, 1, 0)), 1.0)
    assert len(pool) == 1


def test_run_two_sites():
    cfg = GenColConfig.coulomb_1d(2, 2, seed=0)
    res = run(cfg)
    full = solve_full_lp(2, 2, cfg.cost_matrix, cfg.marginal)
    assert res.cost == pytest.approx(full.value, abs=1e-12)
    assert res.trace.termination == BUDGET_EXHAUSTED


def test_run_invariants():
    cfg = GenColConfig.coulomb_1d(4, 12, marginal="sine", seed=3)
    seen = []
    res = run(cfg, callback=seen.append)
    tr = res.trace
    assert seen == tr.records
    assert np.all(np.diff(tr.values) <= cfg.lp_tol)
    assert all(r.certificate <= 1e-8 for r in tr.records)
    assert all(r.pool_size <= cfg.capacity for r in tr.records)
    accepted = [r for r in tr.records if not np.isnan(r.gain)]
    assert len(accepted) == tr.accepted_columns
    assert all(r.gain > 0 for r in accepted)
    assert tr.sampled_columns == sum(r.samples for r in tr.records)
    assert len(res.columns) <= cfg.capacity
    assert res.weights.sum() == pytest.approx(1, abs=1e-12)
    assert certificates_hold(res.pool.problem(), res.solution, 1e-8)
    full = solve_full_lp(12, 4, cfg.cost_matrix, cfg.marginal)
    assert res.cost == pytest.approx(full.value, abs=1e-8)


def test_run_is_reproducible():
    a, b, c = (repr(run(GenColConfig.coulomb_1d(4, 12, seed=s)).trace.records)
               for s in (9, 9, 10))
    assert a == b and a != c


def test_run_maxiter():
    res = run(GenColConfig.coulomb_1d(5, 20, maxiter=3))
    assert res.trace.termination == MAXITER_REACHED
    assert res.trace.accepted_columns == 3 and len(res.trace) == 4


def test_run_reference_stop():
    cfg = GenColConfig.coulomb_1d(5, 20, seed=1, init_random_columns=100)
    cfg.reference = plan_cost(homogeneous_monge_solution(20, 5), cfg.cost_matrix)
    res = run(cfg)
    assert res.trace.termination == CONVERGED
    assert res.cost == pytest.approx(cfg.reference, abs=1e-10)


def test_insert_on_budget_variant():
    cfg = GenColConfig.coulomb_1d(3, 6, seed=0, on_budget="insert", maxsamples=20, maxiter=60)
    res = run(cfg)
    assert res.trace.termination in (MAXITER_REACHED, BUDGET_EXHAUSTED)
    gains = [r.gain for r in res.trace.records if not np.isnan(r.gain)]
    assert len(gains) == res.trace.accepted_columns
    assert any(g <= 0 for g in gains)  # the literal variant inserts non-improving children


def test_highs_backend_agrees():
    a = run(GenColConfig.coulomb_1d(3, 8, seed=4))
    b = run(GenColConfig.coulomb_1d(3, 8, seed=4, lp_method="highs"))
    assert a.cost == pytest.approx(b.cost, abs=1e-9)


def test_cold_and_warm_runs_agree():
    a = run(GenColConfig.coulomb_1d(3, 8, seed=4))
    b = run(GenColConfig.coulomb_1d(3, 8, seed=4, warm_start=False))
    assert a.cost == pytest.approx(b.cost, abs=1e-9)


def test_tabulated_potential():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(6, 6))
    C = X @ X.T
    cfg = GenColConfig.coulomb_1d(3, 6, seed=2)
    cfg = GenColConfig(3, cfg.grid, cfg.marginal, C, seed=2)
    res = run(cfg)
    full = solve_full_lp(6, 3, C, cfg.marginal)
    assert res.cost >= full.value - 1e-9
    prob = RestrictedProblem.from_columns(res.columns, C, cfg.marginal)
    assert np.allclose(prob.costs, [column_cost(c, C) for c in res.columns])
