"""Shared pytest fixtures for the prosumer QAOA test suite."""

import pytest

from src.problem_model import Load, ProsumerInstance, load_fixture_a
from src.reduction import reduce_instance


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: stochastic end-to-end QAOA runs (deselect with -m 'not slow')")


@pytest.fixture(scope="session")
def fixture_a() -> ProsumerInstance:
    return load_fixture_a()


@pytest.fixture(scope="session")
def reduction_a(fixture_a):
    return reduce_instance(fixture_a)


@pytest.fixture
def single_slot_instance() -> ProsumerInstance:
    """One load, one hour, E = E_max = 1: the smallest legal instance."""
    return ProsumerInstance(
        loads=(Load(id="a", alpha=1, beta=1, duration=1, power=1),),
        hours=(1,),
        tariff={1: 30},
        e_max=1,
    )


def make_instance(prices, e_max, loads) -> ProsumerInstance:
    """prices: list per hour; loads: (id, alpha, beta, delta, power) tuples."""
    return ProsumerInstance(
        loads=tuple(Load(*spec) for spec in loads),
        hours=tuple(range(1, len(prices) + 1)),
        tariff={h: p for h, p in enumerate(prices, start=1)},
        e_max=e_max,
    )
