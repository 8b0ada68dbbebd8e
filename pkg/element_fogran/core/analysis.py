"""
Closed-form Normalized Delivery Time (NDT) calculator

All values are exact `Fraction`s; an infeasible configuration has NDT `math.inf`.

Two end-to-end schemes are compared on a serial cloud -> EN -> user path:

+ Proposed: MDS coded caching at mu = 1/d plus blind interference avoidance.
  Below mu = 1/d the cloud tops up the missing (1/d - mu) fraction of d files per EN.
+ FullCachingBenchmark: blind interference alignment with full EN cooperation, run on a
  (K, 2) MDS placement from mu = 1/2. Below that the cloud tops up (1/2 - mu) of 2 files.
"""
from __future__ import annotations

import concurrent.futures
import enum
import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import pandas as pd
from tqdm import tqdm

from .utils import atomic_write_text, convert_to_fraction, format_fraction

logger = logging.getLogger(__name__)

INF = math.inf
SWEEP_COLUMNS = ["mu", "r", "d", "delta_ach", "delta_full", "best"]


class Scheme(str, enum.Enum):
    PROPOSED = "Proposed"
    FULL_CACHING = "FullCachingBenchmark"
    TIE = "Tie"


@dataclass(frozen=True)
class RegimePoint:
    mu: Fraction
    r: Fraction
    d: int
    delta_ach: object  # Fraction or INF
    delta_full: object
    best: Scheme

    def as_row(self) -> dict:
        return {
            "mu": format_fraction(self.mu),
            "r": format_fraction(self.r),
            "d": self.d,
            "delta_ach": format_fraction(self.delta_ach),
            "delta_full": format_fraction(self.delta_full),
            "best": self.best.value,
        }


def _ceil_half(d: int) -> int:
    return math.ceil(d / 2)


def _check_d(d: int, minimum: int = 1):
    if d < minimum:
        raise ValueError(f"d must be >= {minimum}, got d={d}")


def _check_regime(mu, r):
    mu, r = convert_to_fraction(mu), convert_to_fraction(r)
    if not 0 <= mu <= 1:
        raise ValueError(f"mu must be in [0, 1], got mu={format_fraction(mu)}")
    if r < 0 or r == INF:
        raise ValueError(f"r must be a finite value >= 0, got r={format_fraction(r)}")
    return mu, r


# ---------- edge NDTs ----------


def prop1_bound(d: int) -> Fraction:
    """Worst-case edge NDT of the proposed scheme: 2(d+1)ceil(d/2)/d, 1 for d = 1."""
    _check_d(d)
    if d == 1:
        return Fraction(1)
    return Fraction(2 * (d + 1) * _ceil_half(d), d)


def exact_edge_ndt(k: int, d: int) -> Fraction:
    """Edge NDT of the emitted schedule for this K: ceil(d/2)((d+1) + K mod (d+1))/d."""
    _check_d(d)
    if d == 1:
        return Fraction(1)
    if k < d + 1:
        raise ValueError(f"Schedule undefined for K < d+1, got K={k}, d={d}")
    return Fraction(_ceil_half(d) * ((d + 1) + k % (d + 1)), d)


def prop1_sum_dof(k: int, d: int) -> Fraction:
    """Sum-DoF guaranteed by the bound: K*d / (2(d+1)ceil(d/2)), K for d = 1."""
    return Fraction(k) / prop1_bound(d)


def full_caching_edge_ndt(d: int) -> Fraction:
    """Benchmark edge NDT: (d+1)/2, 1 for d = 1."""
    _check_d(d)
    return Fraction(1) if d == 1 else Fraction(d + 1, 2)


def ratio_bound(d: int) -> Fraction:
    """prop1_bound / full_caching_edge_ndt = 4 ceil(d/2) / d <= 2 + 4/d <= 4."""
    _check_d(d, minimum=2)
    ratio = Fraction(4 * _ceil_half(d), d)
    assert ratio == prop1_bound(d) / full_caching_edge_ndt(d)
    assert ratio <= 2 + Fraction(4, d) <= 4
    return ratio


# ---------- end-to-end NDTs with fronthaul ----------


def fronthaul_ndt(mu, r, target_mu, n_files: int):
    """Fronthaul term n_files * (target_mu - mu) / r, 0 once mu >= target_mu."""
    mu, r = _check_regime(mu, r)
    target_mu = convert_to_fraction(target_mu)
    if mu >= target_mu:
        return Fraction(0)
    if r == 0:
        return INF
    return n_files * (target_mu - mu) / r


def delta_ach(mu, r, d: int, edge_ndt=None):
    """End-to-end NDT of the proposed scheme.

    Args:
        edge_ndt (Fraction, optional): edge NDT to use instead of `prop1_bound(d)`,
            e.g. `exact_edge_ndt(k, d)` for the K-dependent variant.
    """
    _check_d(d)
    edge = prop1_bound(d) if edge_ndt is None else convert_to_fraction(edge_ndt)
    return fronthaul_ndt(mu, r, Fraction(1, d), d) + edge


def delta_full(mu, r, d: int):
    """End-to-end NDT of the full-caching benchmark on a (K, 2) MDS placement."""
    _check_d(d)
    return fronthaul_ndt(mu, r, Fraction(1, 2), 2) + full_caching_edge_ndt(d)


def threshold_r1(mu, d: int) -> Fraction:
    """Largest r at which the proposed scheme wins for 0 < mu < 1/d."""
    mu = convert_to_fraction(mu)
    _check_d(d, minimum=2)
    if not 0 < mu < Fraction(1, d):
        raise ValueError(f"r1 needs 0 < mu < 1/{d}, got mu={format_fraction(mu)}")
    r1 = Fraction(2 * d * (d - 2)) * mu / ((d + 1) * (4 * _ceil_half(d) - d))
    if r1 > 0:
        assert delta_ach(mu, r1, d) == delta_full(mu, r1, d)
    return r1


def threshold_r2(mu, d: int) -> Fraction:
    """Largest r at which the proposed scheme wins for 1/d <= mu < 1/2."""
    mu = convert_to_fraction(mu)
    _check_d(d, minimum=3)
    if not Fraction(1, d) <= mu < Fraction(1, 2):
        raise ValueError(f"r2 needs 1/{d} <= mu < 1/2, got mu={format_fraction(mu)}")
    r2 = Fraction(2 * d) * (1 - 2 * mu) / ((d + 1) * (4 * _ceil_half(d) - d))
    assert delta_ach(mu, r2, d) == delta_full(mu, r2, d)
    return r2


def crossover_r(mu, d: int, k: int = None):
    """Fronthaul pre-log at which both schemes tie, or None if they never do.

    With `k` the K-dependent edge NDT replaces the worst-case bound.
    """
    mu = convert_to_fraction(mu)
    edge_ach = prop1_bound(d) if k is None else exact_edge_ndt(k, d)
    # delta = load / r + edge on both sides
    load_ach = d * max(Fraction(1, d) - mu, Fraction(0))
    load_full = 2 * max(Fraction(1, 2) - mu, Fraction(0))
    edge_gap = full_caching_edge_ndt(d) - edge_ach
    if edge_gap == 0 or load_ach == load_full:
        return None
    r = (load_ach - load_full) / edge_gap
    return r if r > 0 else None


def best_scheme(mu, r, d: int, edge_ndt=None) -> RegimePoint:
    mu, r = _check_regime(mu, r)
    ach, full = delta_ach(mu, r, d, edge_ndt), delta_full(mu, r, d)
    if ach < full:
        best = Scheme.PROPOSED
    elif full < ach:
        best = Scheme.FULL_CACHING
    else:
        best = Scheme.TIE
    return RegimePoint(mu, r, d, ach, full, best)


# ---------- cache sharing ----------


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def lower_convex_hull(points) -> list:
    """Lower convex hull of (mu, ndt) points sorted by mu (monotone chain)."""
    hull = []
    for point in points:
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], point) <= 0:
            hull.pop()
        hull.append(point)
    return hull


def memory_sharing_envelope(points, query_mu) -> Fraction:
    """NDT reachable at `query_mu` by file-splitting between achievable points."""
    points = [(convert_to_fraction(m), convert_to_fraction(v)) for m, v in points]
    if not points:
        raise ValueError("At least one achievable point is required")
    if any(v == INF for _, v in points):
        raise ValueError("Achievable points must have finite NDT")
    if any(b[0] < a[0] for a, b in zip(points, points[1:])):
        raise ValueError("Points must be sorted by mu")
    query_mu = convert_to_fraction(query_mu)
    if not points[0][0] <= query_mu <= points[-1][0]:
        raise ValueError(
            f"Query mu={format_fraction(query_mu)} outside"
            f" [{format_fraction(points[0][0])}, {format_fraction(points[-1][0])}]"
        )

    # keep the lowest NDT per mu
    best = {}
    for m, v in points:
        best[m] = min(v, best.get(m, v))
    hull = lower_convex_hull(sorted(best.items()))
    for (m0, v0), (m1, v1) in zip(hull, hull[1:]):
        if m0 <= query_mu <= m1:
            return v0 + (v1 - v0) * (query_mu - m0) / (m1 - m0)
    return hull[0][1]


# ---------- sweeps ----------


def parse_grid(grid: str) -> list:
    """`a:b:step` -> [a, a+step, ...] up to and including b, all exact."""
    parts = grid.split(":")
    if len(parts) != 3:
        raise ValueError(f"Malformed grid {grid!r}, expected a:b:step")
    start, stop, step = (convert_to_fraction(p) for p in parts)
    if step <= 0:
        raise ValueError(f"Grid step must be positive, got {grid!r}")
    if stop < start:
        raise ValueError(f"Grid end precedes its start in {grid!r}")
    n_points = int((stop - start) // step) + 1
    return [start + n * step for n in range(n_points)]


def _sweep_row(args) -> list:
    mu, r_grid, d, edge_ndt = args
    return [best_scheme(mu, r, d, edge_ndt).as_row() for r in r_grid]


def sweep(d: int, mu_grid, r_grid, k: int = None, workers: int = 1) -> pd.DataFrame:
    """Evaluate both schemes over a (mu, r) grid.

    Args:
        d (int): connectivity degree.
        mu_grid (list): fractional cache sizes.
        r_grid (list): fronthaul pre-logs.
        k (int, optional): use the K-dependent edge NDT of the emitted schedule.
        workers (int): worker processes; rows keep grid order either way.

    Returns:
        pd.DataFrame: one row per grid point with the CSV columns.
    """
    if not mu_grid or not r_grid:
        raise ValueError("Sweep grids must be nonempty")
    edge_ndt = None if k is None else exact_edge_ndt(k, d)
    jobs = [(mu, list(r_grid), d, edge_ndt) for mu in mu_grid]
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row, jobs))
    else:
        rows = [_sweep_row(job) for job in tqdm(jobs, desc="sweep", disable=None)]
    return pd.DataFrame([row for mu_rows in rows for row in mu_rows], columns=SWEEP_COLUMNS)


def write_sweep(frame: pd.DataFrame, path):
    path = atomic_write_text(path, frame.to_csv(index=False, lineterminator="\n"))
    logger.info(f"Sweep of {len(frame)} points written to {path}")
    return path
