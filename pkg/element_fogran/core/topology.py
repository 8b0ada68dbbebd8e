"""
(K, d) regular partially connected edge network

EN i reaches its own user and the d-1 subsequent users in cyclic order:

    receivers(i)    = {i, i+1, ..., i+d-1}
    transmitters(j) = {j-d+1, ..., j}

Every index is 1-based and wraps into {1, ..., K}.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Topology:
    """Connectivity between K edge nodes (ENs) and K users (UEs).

    Attributes:
        k (int): number of EN/user pairs.
        d (int): connectivity degree, 1 <= d <= k.
    """

    k: int
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"d must satisfy 1 <= d <= k, got d={self.d} < 1")
        if self.d > self.k:
            raise ValueError(
                f"d must satisfy 1 <= d <= k, got d={self.d} > k={self.k}"
            )

    @property
    def ens(self) -> range:
        return range(1, self.k + 1)

    @property
    def users(self) -> range:
        return range(1, self.k + 1)

    @property
    def fully_connected(self) -> bool:
        return self.d == self.k

    def normalize(self, x: int) -> int:
        """Wrap any integer index into {1, ..., K}."""
        return (x - 1) % self.k + 1

    def _check_index(self, x: int, kind: str):
        if not 1 <= x <= self.k:
            raise IndexError(f"{kind} index must be in [1, {self.k}], got {x}")

    def receivers(self, i: int) -> tuple[int, ...]:
        """Users reached by EN `i`, in cyclic order starting at UE i."""
        self._check_index(i, "EN")
        return tuple(self.normalize(i + offset) for offset in range(self.d))

    def transmitters(self, j: int) -> tuple[int, ...]:
        """ENs reaching user `j`, in cyclic order ending at EN j."""
        self._check_index(j, "user")
        return tuple(self.normalize(j - self.d + 1 + offset) for offset in range(self.d))

    def adjacency(self) -> np.ndarray:
        """K x K 0/1 matrix, entry [j-1, i-1] = 1 iff EN i reaches UE j."""
        adjacency = np.zeros((self.k, self.k), dtype=np.uint8)
        for i in self.ens:
            adjacency[np.array(self.receivers(i)) - 1, i - 1] = 1
        return adjacency

    def __str__(self):
        return f"({self.k},{self.d}) regular network"


def new_topology(k: int, d: int) -> Topology:
    """Build the (k, d) regular network.

    Args:
        k (int): number of EN/user pairs.
        d (int): connectivity degree.

    Returns:
        Topology: immutable topology.
    """
    if k < 1:
        raise ValueError(f"k must be a positive integer, got k={k}")
    return Topology(int(k), int(d))
