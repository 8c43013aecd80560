"""Genetic column generation for symmetric multi-marginal optimal transport
with pairwise costs."""
from .algorithm import GenColConfig, GenColResult, RunTrace, run
from .cost import (
    build_cost_matrix,
    column_cost,
    column_cost_bruteforce,
    pair_marginal,
    plan_pair_marginal,
    regularized_coulomb,
)
from .oracles import homogeneous_monge_solution, solve_full_lp
from .rmp import RestrictedProblem, RmpSolution, solve_rmp
from .state_space import (
    Column,
    Grid,
    build_marginal,
    enumerate_columns,
    make_uniform_grid_1d,
    mutate,
)

__version__ = "0.1.0"
