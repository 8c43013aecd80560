import itertools

import numpy as np
import pytest

from gencol.cost import build_cost_matrix, regularized_coulomb
from gencol.state_space import make_uniform_grid_1d

_CRITERIA = []


def record_criterion(number, name, passed, detail=""):
    _CRITERIA.append((number, name, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, passed, detail in sorted(_CRITERIA):
        flag = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{flag}] {number:>2}. {name}: {detail}")


def brute_occupancies(n_sites, n_particles):
    """All occupancy vectors via the full product {0..N}^l (independent of the library)."""
    return [v for v in itertools.product(range(n_particles + 1), repeat=n_sites)
            if sum(v) == n_particles]


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def coulomb20():
    grid = make_uniform_grid_1d(20)
    return grid, build_cost_matrix(grid, regularized_coulomb(0.1))
