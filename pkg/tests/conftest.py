import math

import numpy as np
import pytest

import bpsvortex as bv

L20 = math.sqrt(20.0)


@pytest.fixture(scope="session")
def torus_small():
    return bv.TorusGrid(2.0, 3.0, 32, 48)


@pytest.fixture(scope="session")
def torus_32():
    return bv.TorusGrid(L20, L20, 32, 32)


@pytest.fixture(scope="session")
def plane_32():
    return bv.PlaneGrid(6.0, 32)


@pytest.fixture(scope="session")
def torus_criterion_setup():
    """lambda=1, |Omega|=20, n=2 on 128^2: the workhorse configuration."""
    grid = bv.TorusGrid(L20, L20, 128, 128)
    params = bv.PhysicalParams(lam=1.0)
    cfg = bv.VortexConfig(phi_zeros=((0.3 * L20, 0.4 * L20), (0.7 * L20, 0.6 * L20)))
    bg = bv.build_background_torus(cfg, grid, params)
    return grid, params, cfg, bg


@pytest.fixture(scope="session")
def torus_criterion_solution(torus_criterion_setup):
    grid, params, cfg, bg = torus_criterion_setup
    sol = bv.solve("torus", "base", cfg, grid, params, background=bg)
    assert sol.converged
    return sol


def random_state(grid, seed, amplitude=0.5):
    rng = np.random.default_rng(seed)
    return np.stack([bv.random_smooth_field(grid, rng, amplitude),
                     bv.random_smooth_field(grid, rng, amplitude)])
