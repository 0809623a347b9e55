import math
import random

import pytest

from wdegcsp.gac import SearchState
from wdegcsp.model import Csp, generate_random, relation_size
from wdegcsp.poac import run_poac
from wdegcsp.rnic import RnicEngine

ALL_CONFIGS = [
    "gac-old",
    "poac-old",
    "poac-alls",
    "poac-lasts",
    "poac-var",
    "rnic-old",
    "rnic-allc",
    "rnic-head",
]


def gac_instance(seed: int) -> Csp:
    """n <= 7, d <= 4, k in {2, 3}, m <= 10, t in {0.3, 0.5, 0.7}."""
    rng = random.Random(seed)
    n = rng.randint(2, 7)
    k = rng.choice([2, 3]) if n >= 3 else 2
    d = rng.randint(1, 4)
    m = rng.randint(1, min(10, math.comb(n, k)))
    t = rng.choice([0.3, 0.5, 0.7])
    return generate_random(n, d, k, m, t, seed)


def poac_instance(seed: int) -> Csp:
    """n <= 6, d <= 4."""
    rng = random.Random(10_000 + seed)
    n = rng.randint(2, 6)
    k = rng.choice([2, 3]) if n >= 3 else 2
    d = rng.randint(2, 4)
    m = rng.randint(1, min(9, math.comb(n, k)))
    t = rng.choice([0.2, 0.3, 0.4, 0.5])
    return generate_random(n, d, k, m, t, seed)


def rnic_instance(seed: int) -> Csp:
    """Tables of at most 30 tuples."""
    rng = random.Random(20_000 + seed)
    while True:
        n = rng.randint(3, 6)
        k = rng.choice([2, 3]) if n >= 4 else 2
        d = rng.randint(2, 4)
        t = rng.choice([0.3, 0.5, 0.7])
        if relation_size(d, k, t) <= 30:
            break
    m = rng.randint(2, min(8, math.comb(n, k)))
    return generate_random(n, d, k, m, t, seed)


def solver_instance(seed: int) -> Csp:
    rng = random.Random(30_000 + seed)
    n = rng.randint(2, 7)
    k = rng.choice([2, 3]) if n >= 3 else 2
    d = rng.randint(2, 4)
    m = rng.randint(1, min(10, math.comb(n, k)))
    t = rng.choice([0.2, 0.3, 0.4, 0.5, 0.6])
    return generate_random(n, d, k, m, t, seed)


def live_domains(state: SearchState) -> dict:
    return {x: set(state.live_values(i)) for i, x in enumerate(state.var_ids)}


def engine_closure(csp: Csp, prop: str):
    """Run the engines from scratch; returns (wiped, domains, tables)."""
    state = SearchState(csp)
    wiped = state.propagate(range(state.m)) is not None
    if not wiped and prop == "poac":
        wiped = run_poac(state) >= 0
    if not wiped and prop == "rnic":
        wiped = RnicEngine(state).run() >= 0
    return wiped, live_domains(state), state.tables()


@pytest.fixture
def xy_equal():
    return Csp.build("eq", {"x": [0, 1], "y": [0, 1]}, [("c1", ["x", "y"], [(0, 0), (1, 1)])])


@pytest.fixture
def xy_single():
    return Csp.build("one", {"x": [0, 1], "y": [0, 1]}, [("c1", ["x", "y"], [(0, 0)])])
