"""Shared fixtures and random-instance generators for the test suite."""

from __future__ import annotations

import random

import pytest
from hypothesis import HealthCheck, settings

from walras import Instance, Valuation, evaluate
from walras.instance import iter_box

settings.register_profile(
    "walras", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("walras")

EX21_VALUES = [
    [1, 0, 0],  # a
    [1, 0, 0],  # b
    [0, 1, 1],  # c
    [0, 1, 1],  # d
    [0, 1, 1],  # e
    [1, 1, 0],  # g
]

EX21_JSON = (
    '{"model": "unit", "n": 3, "m": 6, "valuations": ['
    '{"family": "unit_demand", "values": [1, 0, 0]}, '
    '{"family": "unit_demand", "values": [1, 0, 0]}, '
    '{"family": "unit_demand", "values": [0, 1, 1]}, '
    '{"family": "unit_demand", "values": [0, 1, 1]}, '
    '{"family": "unit_demand", "values": [0, 1, 1]}, '
    '{"family": "unit_demand", "values": [1, 1, 0]}]}'
)


def make_ex21() -> Instance:
    return Instance(model="unit", n=3, u=(1, 1, 1),
                    valuations=tuple(Valuation.unit_demand(v) for v in EX21_VALUES))


def make_two_bidder_multi() -> Instance:
    """n=1, u=(2), two bidders each worth 3 then 2 per extra unit."""
    return Instance(model="multi", n=1, u=(2,),
                    valuations=(Valuation.separable([[3, 2]]),
                                Valuation.separable([[3, 2]])))


@pytest.fixture
def ex21() -> Instance:
    return make_ex21()


@pytest.fixture
def two_bidder_multi() -> Instance:
    return make_two_bidder_multi()


def random_unit_instance(rng: random.Random, *, n_max: int = 5, m_max: int = 7,
                         value_max: int = 5) -> Instance:
    n = rng.randint(1, n_max)
    m = rng.randint(0, m_max)
    vals = tuple(Valuation.unit_demand([rng.randint(0, value_max) for _ in range(n)])
                 for _ in range(m))
    return Instance(model="unit", n=n, u=(1,) * n, valuations=vals)


def random_separable_valuation(rng: random.Random, u, *, value_max: int = 6) -> Valuation:
    rows = []
    for cap in u:
        row = sorted((rng.randint(0, value_max) for _ in range(cap)), reverse=True)
        rows.append(row)
    return Valuation.separable(rows)


def random_multi_instance(rng: random.Random, *, n_max: int = 3, u_max: int = 3,
                          m_max: int = 4, m_min: int = 1,
                          value_max: int = 6) -> Instance:
    n = rng.randint(1, n_max)
    u = tuple(rng.randint(1, u_max) for _ in range(n))
    m = rng.randint(m_min, m_max)
    vals = tuple(random_separable_valuation(rng, u, value_max=value_max)
                 for _ in range(m))
    return Instance(model="multi", n=n, u=u, valuations=vals)


def tabulate(v: Valuation) -> Valuation:
    """Re-express any valuation as an explicit table over its own box."""
    return Valuation.from_table({x: evaluate(v, x) for x in iter_box(v.box())})
