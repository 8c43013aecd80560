# %% [markdown]
# # An inhomogeneous density
#
# Ten particles on 100 sites with weights proportional to
# 0.2 + sin^2(i / (l + 1)).  The density grows to the right, so particles
# crowd there and the pair density shows which site pairs are occupied
# together.

# %%
import numpy as np

from gencol import GenColConfig, run
from gencol.cost import plan_pair_marginal

cfg = GenColConfig.coulomb_1d(10, 100, marginal="sine", seed=1)
res = run(cfg)
print(f"termination {res.trace.termination}, cost {res.cost:.10f}")
print(f"{len(res.trace)} solves, {res.trace.sampled_columns} sampled columns, "
      f"{int(np.sum(res.weights > 1e-10))} columns in the optimal plan")

# %% [markdown]
# The Kantorovich potential is the dual of the marginal constraints.  It is
# only determined up to the support of the plan, so it is printed at a few
# sites.

# %%
for i in range(0, 100, 11):
    print(f"site {i + 1:>3}  marginal {cfg.marginal[i]:.5f}  potential {res.dual[i]: .5f}")

# %% [markdown]
# Rows of the pair density show where the other particles sit, given one
# particle at a site.  A particle at the sparse left end is partnered with
# the crowded right half.

# %%
M = plan_pair_marginal(res.weighted_columns())
for i in (5, 35, 65, 95):
    j = np.argsort(M[i])[::-1][:3]
    print(f"site {i + 1:>3} pairs most often with sites {(j + 1).tolist()}")
