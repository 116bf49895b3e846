import numpy as np
import pytest
from hypothesis import settings

from hilbertlab import fixtures as fx
from hilbertlab.blaschke import blaschke_from_embedding
from hilbertlab.monge_ampere import solve_monge_ampere

settings.register_profile("lab", deadline=None, max_examples=30,
                          derandomize=True)
settings.load_profile("lab")

_DOMAINS = {
    "disc": fx.unit_disc,
    "square": fx.unit_square,
    "triangle": fx.standard_triangle,
    "ellipse": fx.ellipse_fixture,
}


@pytest.fixture(scope="session")
def domains():
    return {k: v() for k, v in _DOMAINS.items()}


@pytest.fixture(scope="session")
def solved():
    """Cached (solution, field) per (domain name, h)."""
    cache = {}

    def get(name, h=1 / 64):
        key = (name, h)
        if key not in cache:
            sol = solve_monge_ampere(_DOMAINS[name](), h)
            fld = blaschke_from_embedding(sol)
            cache[key] = (sol, fld)
        return cache[key]

    return get


@pytest.fixture()
def rng():
    return np.random.default_rng(20240613)
