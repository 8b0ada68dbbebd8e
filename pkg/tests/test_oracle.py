import math

import pytest

from element_fogran.core import oracle
from element_fogran.core.topology import new_topology


@pytest.mark.parametrize("k", range(2, 9))
def test_degree_one_needs_one_slot(k):
    t = new_topology(k, 1)
    assert oracle.min_slots(t, 3) == 1
    assert oracle.max_concurrent(t) == k


@pytest.mark.parametrize("k, d", [(5, 2), (7, 2), (8, 2)])
def test_search_never_worse_than_schedule(k, d):
    t = new_topology(k, d)
    value = oracle.min_slots(t, oracle.heuristic_slots(t))
    assert value is not None
    assert value <= oracle.heuristic_slots(t)


def test_max_concurrent_8_2():
    t = new_topology(8, 2)
    # an active EN needs an idle neighbour: at most 2 of any 3 consecutive ENs
    assert oracle.max_concurrent(t) >= 4
    assert oracle.max_concurrent(t) == 5


def test_max_concurrent_11_4():
    assert oracle.max_concurrent(new_topology(11, 4)) >= 4


def test_budget_exceeded_returns_none():
    assert oracle.min_slots(new_topology(8, 2), 2) is None


def test_instance_limits():
    with pytest.raises(ValueError):
        oracle.min_slots(new_topology(9, 2), 5)
    with pytest.raises(ValueError):
        oracle.min_slots(new_topology(8, 4), 5)
    with pytest.raises(ValueError):
        oracle.min_slots(new_topology(5, 2), 0)
    with pytest.raises(ValueError):
        oracle.max_concurrent(new_topology(13, 2))


def test_slot_patterns_are_maximal():
    t = new_topology(5, 2)
    patterns = oracle.slot_patterns(t)
    assert patterns
    for a in patterns:
        assert not any(a != b and a & b == a for b in patterns)


def test_delivery_state():
    t = new_topology(3, 2)
    state = oracle.DeliveryState(0)
    assert not state.is_goal(t)
    state = state.after(0b000011).after(0b111100)
    assert state.slots_used == 2
    assert state.is_goal(t)
    assert state.pairs(t) == {(u, tau) for u in (1, 2, 3) for tau in (1, 2)}


@pytest.mark.parametrize("k, d", [(3, 2), (5, 2), (7, 2), (8, 2), (4, 3)])
def test_search_respects_concurrency_floor(k, d):
    t = new_topology(k, d)
    value = oracle.min_slots(t, oracle.heuristic_slots(t))
    assert value >= math.ceil(k * d / oracle.max_concurrent(t))


def test_heuristic_needs_schedulable_network():
    with pytest.raises(ValueError):
        oracle.heuristic_slots(new_topology(2, 2))
