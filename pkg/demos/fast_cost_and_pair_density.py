# %% [markdown]
# # Column costs and pair densities
#
# A column is an N-particle configuration on the grid, stored as integer
# occupancies.  Its interaction energy is a sum over particle pairs, but it
# can be computed from the occupancy vector alone.

# %%
import math
import time

import numpy as np

from gencol import Column, build_cost_matrix, make_uniform_grid_1d, regularized_coulomb
from gencol.cost import column_cost, column_cost_bruteforce, pair_marginal

grid = make_uniform_grid_1d(40)
C = build_cost_matrix(grid, regularized_coulomb(0.1))
rng = np.random.default_rng(0)

# %% [markdown]
# The occupancy form only touches the occupied sites, so its cost grows
# with the support size rather than with the number of particle pairs.

# %%
cols = [Column(np.bincount(rng.integers(0, 40, 15), minlength=40)) for _ in range(2000)]
t0 = time.perf_counter()
fast = np.array([column_cost(c, C) for c in cols])
t1 = time.perf_counter()
slow = np.array([column_cost_bruteforce(c, C) for c in cols])
t2 = time.perf_counter()
print(f"max relative difference {np.max(np.abs(fast - slow) / slow):.1e}")
print(f"occupancy form {1e6 * (t1 - t0) / len(cols):.1f} us/column, "
      f"pair loop {1e6 * (t2 - t1) / len(cols):.1f} us/column")

# %% [markdown]
# The two-point marginal of a column is the distribution of an ordered pair
# of distinct particles.  Its row sums give back the one-point marginal and
# binom(N, 2) times its pairing with C gives back the cost.

# %%
col = cols[0]
M = pair_marginal(col)
N = col.n_particles
print("row sums == n / N:", np.allclose(M.sum(axis=1), col.occupancy / N, atol=1e-14))
print("cost via pair density:", math.comb(N, 2) * np.sum(M * C), "direct:", column_cost(col, C))
