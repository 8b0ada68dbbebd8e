"""
Brute-force reference search for small networks

A slot activates a subset of ENs; every active EN addresses one user it reaches, and that
user must hear no other active EN. The oracle finds the fewest such slots delivering all
K*d (user, subfile type) pairs, to sanity-check the scheduler's slot count.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

from .scheduler import slot_count, subfile_type
from .topology import Topology

logger = logging.getLogger(__name__)

MAX_SEARCH_K, MAX_SEARCH_D = 8, 3
MAX_CONCURRENT_K = 12


def _popcount(mask: int) -> int:
    return bin(mask).count("1")


def _bit(t: Topology, user: int, tau: int) -> int:
    return 1 << ((user - 1) * t.d + (tau - 1))


@dataclass(frozen=True)
class DeliveryState:
    """Delivered (user, type) pairs as a K*d-bit mask, and the slots spent on them."""

    delivered: int
    slots_used: int = 0

    def pairs(self, t: Topology) -> frozenset:
        return frozenset(
            (user, tau)
            for user in t.users
            for tau in range(1, t.d + 1)
            if self.delivered & _bit(t, user, tau)
        )

    def is_goal(self, t: Topology) -> bool:
        return self.delivered == (1 << (t.k * t.d)) - 1

    def after(self, pattern: int) -> "DeliveryState":
        return DeliveryState(self.delivered | pattern, self.slots_used + 1)


def _private_targets(t: Topology, active: frozenset) -> dict:
    """Users each active EN can reach without interference."""
    return {
        en: [u for u in t.receivers(en) if active & set(t.transmitters(u)) == {en}]
        for en in active
    }


def _activation_patterns(t: Topology):
    for size in range(1, t.k + 1):
        for active in itertools.combinations(t.ens, size):
            targets = _private_targets(t, frozenset(active))
            if all(targets.values()):
                yield active, targets


def slot_patterns(t: Topology) -> list:
    """Maximal per-slot delivery masks, largest first."""
    masks = set()
    for active, targets in _activation_patterns(t):
        for choice in itertools.product(*(targets[en] for en in active)):
            mask = 0
            for en, user in zip(active, choice):
                mask |= _bit(t, user, subfile_type(t, en, user))
            masks.add(mask)

    maximal = []
    for mask in sorted(masks, key=_popcount, reverse=True):
        if not any(mask & other == mask for other in maximal):
            maximal.append(mask)
    logger.debug(f"{t}: {len(maximal)} maximal slot patterns out of {len(masks)}")
    return maximal


def max_concurrent(t: Topology) -> int:
    """Most interference-free deliveries a single slot can carry."""
    if t.k > MAX_CONCURRENT_K:
        raise ValueError(f"Instance too large: K={t.k} > {MAX_CONCURRENT_K}")
    return max(len(active) for active, _ in _activation_patterns(t))


def min_slots(t: Topology, slot_budget: int):
    """Fewest slots delivering every subfile type to every user.

    Iterative deepening from the counting bound ceil(K*d / max_concurrent) up to
    `slot_budget`. Each level covers the lowest undelivered (user, type) pair first, so
    the first slot always activates EN 1 (UE 1's type-1 source).

    Returns:
        int or None: the minimum, or None when it exceeds `slot_budget`.
    """
    if t.k > MAX_SEARCH_K or t.d > MAX_SEARCH_D:
        raise ValueError(
            f"Instance too large: need K <= {MAX_SEARCH_K} and d <= {MAX_SEARCH_D},"
            f" got K={t.k}, d={t.d}"
        )
    if slot_budget < 1:
        raise ValueError(f"slot_budget must be >= 1, got {slot_budget}")

    goal = (1 << (t.k * t.d)) - 1
    patterns = slot_patterns(t)
    capacity = max(_popcount(p) for p in patterns)
    covering = {
        b: [p for p in patterns if p >> b & 1] for b in range(t.k * t.d)
    }
    failed = set()

    def search(state: DeliveryState, budget: int) -> bool:
        if state.delivered == goal:
            return True
        missing = goal & ~state.delivered
        if _popcount(missing) > budget * capacity:
            return False
        if (state.delivered, budget) in failed:
            return False
        lowest = (missing & -missing).bit_length() - 1
        if any(search(state.after(p), budget - 1) for p in covering[lowest]):
            return True
        failed.add((state.delivered, budget))
        return False

    lower = math.ceil(t.k * t.d / capacity)
    for budget in range(lower, slot_budget + 1):
        logger.debug(f"{t}: searching with {budget} slots")
        if search(DeliveryState(0), budget):
            return budget
    logger.info(f"{t}: no schedule within {slot_budget} slots")
    return None


def heuristic_slots(t: Topology) -> int:
    return slot_count(t.k, t.d)
