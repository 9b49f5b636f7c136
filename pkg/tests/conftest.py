import numpy as np
import pytest

import multiagg as mg


@pytest.fixture
def two_species_attractive():
    """Quadratic kernels with kappa = [[2,1],[1,2]], m = p = (1,1): modulus 2."""
    params = mg.SystemParams(m=[1.0, 1.0], p=[1.0, 1.0], E=[0.0])
    pm = mg.matrix_from_entries(
        [[mg.Quadratic(2.0), mg.Quadratic(1.0)],
         [None, mg.Quadratic(2.0)]],
        kappa=[[2.0, 1.0], [1.0, 2.0]])
    return pm, params


def uniform_state(params, M, lo, hi):
    """Uniform-density quantiles per species; lo/hi are per-species sequences."""
    z = mg.measures.cell_midpoints(M) if hasattr(mg, "measures") else (np.arange(M) + 0.5) / M
    u = np.vstack([l + (h - l) * z for l, h in zip(lo, hi)])
    return mg.QuantileState(u, params)


@pytest.fixture
def make_uniform_state():
    return uniform_state


def random_monotone_u(rng, n, M, lo=-1.0, hi=1.0):
    return np.sort(rng.uniform(lo, hi, size=(n, M)), axis=1)
