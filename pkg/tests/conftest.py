import numpy as np
import pytest

from element_fogran.core import placement
from element_fogran.core.topology import new_topology


@pytest.fixture
def rng():
    return np.random.default_rng(20171029)


@pytest.fixture(scope="session")
def net_8_2():
    return new_topology(8, 2)


@pytest.fixture(scope="session")
def net_11_4():
    return new_topology(11, 4)


@pytest.fixture(scope="session")
def net_9_2():
    return new_topology(9, 2)


@pytest.fixture(scope="session")
def gf65537():
    return placement.PrimeField(65537)


def transmission_set(slot):
    """(en, user, type) triples of a slot."""
    return {(tx.en, tx.user, tx.tau) for tx in slot.transmissions}
