# %% [markdown]
# # Why pricing is hard
#
# Finding a column with positive gain is an integer quadratic problem.  A
# graph with a clique of size K' maps to an instance with N = K' particles,
# one site per vertex, the adjacency matrix as V and threshold K'(K' - 1).
# The instance is solvable exactly when the clique exists.

# %%
import itertools

from gencol.oracles import Graph, cdp_bruteforce, clique_to_pdp, e_matrix_extremum_check, pdp_bruteforce

triangle_plus_tail = Graph(4, frozenset({(0, 1), (1, 2), (0, 2), (2, 3)}))
inst = clique_to_pdp(triangle_plus_tail, 3)
print(inst.to_text())
print("clique of size 3:", cdp_bruteforce(triangle_plus_tail, 3),
      " pricing instance solvable:", pdp_bruteforce(inst))

# %% [markdown]
# The key step is that the quadratic form of the all-ones-off-diagonal
# matrix, over q particles on q sites, peaks at q(q - 1) and only when every
# site holds one particle.

# %%
for q in range(2, 8):
    best, argmax = e_matrix_extremum_check(q)
    print(q, best, argmax)

# %% [markdown]
# An exhaustive check on all small graphs.

# %%
mismatches = 0
for n in range(1, 6):
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(2 ** len(pairs)):
        g = Graph(n, frozenset(p for b, p in enumerate(pairs) if mask >> b & 1))
        for k in range(1, 6):
            mismatches += cdp_bruteforce(g, k) != pdp_bruteforce(clique_to_pdp(g, k))
print("mismatches:", mismatches)
