"""Shared fixtures. Expensive objects (quadrature rules, eigen solves) are
session-scoped and cached so the unit tests stay fast."""

import pytest

from sobstab.params import Params
from sobstab.quadrature import build_rule
from sobstab.spectrum import MeshSpec, build_channel, solve_channel


@pytest.fixture(scope="session")
def params():
    return Params.make(4, 2.5)


@pytest.fixture(scope="session")
def params_p2():
    return Params.make(4, 2.0)


@pytest.fixture(scope="session")
def rule(params):
    # far cutoff so tail truncation sits well below the tolerances under test
    return build_rule(params, count=512, rmax=1e8)


@pytest.fixture(scope="session")
def coarse_rule(params):
    return build_rule(params, count=256, rmax=1e6)


@pytest.fixture(scope="session")
def mesh():
    return MeshSpec()


@pytest.fixture(scope="session")
def channel_pairs(params, mesh):
    cache = {}

    def get(l, k, plain=False):
        key = (l, k, plain)
        if key not in cache:
            cache[key] = solve_channel(
                build_channel(params, l, mesh, plain=plain), k, params
            )
        return cache[key]

    return get
