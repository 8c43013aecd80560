# %% [markdown]
# # Homogeneous systems at fixed density
#
# N particles on l = 4N uniformly spaced sites with a uniform marginal.  The
# exact optimum is known: a mixture of the l/N equally spaced configurations.
# GenCol only ever holds a few hundred columns although the full problem has
# binom(N + l - 1, N) of them.
#
# The same experiments run from the command line with
# ``gencol suite --manifest demos/thermo.toml``.

# %%
import numpy as np

from gencol import GenColConfig, run
from gencol.oracles import homogeneous_monge_solution, plan_cost
from gencol.state_space import count_columns

SEEDS = range(1, 6)

# %%
print(f"{'N':>3} {'l':>4} {'columns':>12} {'sampled (mean)':>15} {'exact':>6}")
for N in (5, 10):
    l = 4 * N
    sampled, exact = [], True
    for seed in SEEDS:
        cfg = GenColConfig.coulomb_1d(N, l, seed=seed, init_random_columns=N * l)
        cfg.reference = plan_cost(homogeneous_monge_solution(l, N), cfg.cost_matrix)
        res = run(cfg)
        sampled.append(res.trace.sampled_columns)
        exact &= abs(res.cost - cfg.reference) <= 1e-8
    print(f"{N:>3} {l:>4} {count_columns(l, N):>12.4e} {np.mean(sampled):>15.1f} {exact!s:>6}")

# %% [markdown]
# The trace of the last run shows the restricted problem value decreasing
# to the reference.  Flat stretches are accepted columns that only change
# the dual.

# %%
values = res.trace.values
for k in np.linspace(0, len(values) - 1, 8).astype(int):
    print(f"iteration {k:>5}  value {values[k]:.12f}")
