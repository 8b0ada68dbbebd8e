"""
Blind interference-avoidance delivery schedule

A stage s in {1, ..., ceil(d/2)} delivers subfile types s and d-s+1 to every user.
Phase 1 shifts blocks of d+1 EN/user pairs cyclically for d+1 slots; Phase 2 spends
K mod (d+1) slots on the users the full blocks could not reach. In every slot and every
block offset i, EN_i sends type s to UE_(i+s-1) and EN_(i+s) sends type d-s+1 to
UE_(i+d). ENs absent from a slot are silent.
"""
from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, replace
from typing import Iterator

import pandas as pd

from .placement import CodedSubfile, DemandVector
from .topology import Topology
from .utils import atomic_write_text

logger = logging.getLogger(__name__)

DUMP_COLUMNS = ["slot", "stage", "phase", "en", "ue", "file", "type"]
_DUMP_LINE = re.compile(
    r"^slot=(\d+) stage=(\d+) phase=([12]) en=(\d+) ue=(\d+) file=(\d+) type=(\d+)$"
)


@dataclass(frozen=True)
class Transmission:
    """EN `en` sends the type-`tau` coded subfile of file `file_id` to `user`."""

    en: int
    user: int
    file_id: int
    tau: int
    payload: CodedSubfile = None

    def without_payload(self) -> "Transmission":
        return replace(self, payload=None)


@dataclass(frozen=True)
class Slot:
    time: int
    stage: int
    phase: int
    transmissions: tuple

    @property
    def active_ens(self) -> frozenset:
        return frozenset(tx.en for tx in self.transmissions)


@dataclass(frozen=True)
class Schedule:
    topology: Topology
    slots: tuple

    def __len__(self):
        return len(self.slots)

    def __iter__(self) -> Iterator[Slot]:
        return iter(self.slots)

    @property
    def deliveries(self) -> int:
        return sum(len(slot.transmissions) for slot in self.slots)

    @property
    def n_stages(self) -> int:
        return max((slot.stage for slot in self.slots), default=0)

    def transmissions(self) -> Iterator[tuple[Slot, Transmission]]:
        for slot in self.slots:
            for tx in slot.transmissions:
                yield slot, tx

    def stage(self, s: int) -> "Schedule":
        return Schedule(self.topology, tuple(x for x in self.slots if x.stage == s))

    def truncate(self, n_stages: int) -> "Schedule":
        """Keep the first `n_stages` stages only."""
        return Schedule(
            self.topology, tuple(x for x in self.slots if x.stage <= n_stages)
        )


# ---------- subfile types and stages ----------


def type_source(t: Topology, user: int, tau: int) -> int:
    """EN caching the type-`tau` coded subfile for `user`: EN_(user - tau + 1)."""
    if not 1 <= tau <= t.d:
        raise ValueError(f"Subfile type must be in [1, {t.d}], got tau={tau}")
    if not 1 <= user <= t.k:
        raise IndexError(f"user index must be in [1, {t.k}], got {user}")
    return t.normalize(user - tau + 1)


def subfile_type(t: Topology, en: int, user: int) -> int:
    """Type of the subfile EN `en` holds for `user` (inverse of `type_source`)."""
    if en not in t.transmitters(user):
        raise ValueError(f"EN {en} is not connected to UE {user} in {t}")
    return (user - en) % t.k + 1


def stage_count(d: int) -> int:
    return math.ceil(d / 2)


def stage_types(s: int, d: int) -> tuple[int, int]:
    """Subfile types paired in stage `s`: (s, d-s+1)."""
    if not 1 <= s <= stage_count(d):
        raise ValueError(f"Stage must be in [1, {stage_count(d)}] for d={d}, got s={s}")
    return s, d - s + 1


def schedulable(k: int, d: int) -> bool:
    """The schedule needs K >= d+1 pairs unless d = 1."""
    return d == 1 or k >= d + 1


def slot_count(k: int, d: int) -> int:
    """Closed-form schedule length."""
    _check_schedulable(k, d)
    if d == 1:
        return 1
    return stage_count(d) * ((d + 1) + k % (d + 1))


def _check_schedulable(k: int, d: int):
    if not schedulable(k, d):
        raise ValueError(
            f"Schedule undefined for 2 <= d and K < d+1, got K={k}, d={d}"
            f" (need K >= {d + 1})"
        )


def _block_pair(t: Topology, s: int, i: int) -> tuple[tuple[int, int, int], ...]:
    """(en, user, type) pairs of the block at offset `i` in stage `s`."""
    low, high = stage_types(s, t.d)
    return (
        (t.normalize(i), t.normalize(i + s - 1), low),
        (t.normalize(i + s), t.normalize(i + t.d), high),
    )


def _stage_offsets(t: Topology) -> list[tuple[int, int, list[int]]]:
    """(within-stage slot, phase, block offsets) for one stage."""
    block = t.d + 1
    n_blocks = t.k // block
    plan = [(slot, 1, [slot + b * block for b in range(n_blocks)]) for slot in range(1, block + 1)]
    plan.extend(
        (slot, 2, [slot + (n_blocks - 1) * block])
        for slot in range(block + 1, block + 1 + t.k % block)
    )
    return plan


def leftover_users(t: Topology, s: int) -> tuple[frozenset, frozenset]:
    """Users still missing type s and type d-s+1 after Phase 1 of stage `s`."""
    if t.d < 2:
        raise ValueError(f"Leftover users are defined for d >= 2, got d={t.d}")
    _check_schedulable(t.k, t.d)
    low, high = stage_types(s, t.d)
    served = {low: set(), high: set()}
    for _, phase, offsets in _stage_offsets(t):
        if phase != 1:
            continue
        for i in offsets:
            for _, user, tau in _block_pair(t, s, i):
                served[tau].add(user)
    users = set(t.users)
    return frozenset(users - served[low]), frozenset(users - served[high])


# ---------- schedule construction ----------


def build_schedule(
    t: Topology, demands: DemandVector, cache: dict = None
) -> Schedule:
    """Build the delivery schedule for demand vector `demands`.

    Args:
        t (Topology): network with K >= d+1, or d = 1.
        demands (DemandVector): file id requested by each user.
        cache (dict, optional): {(en, file_id): CodedSubfile} from `placement.encode`;
            when given, every transmission carries the cached coded subfile.

    Returns:
        Schedule: slots in delivery order, times 1-based across all stages.
    """
    _check_schedulable(t.k, t.d)
    if len(demands) != t.k:
        raise ValueError(f"Demand vector must have {t.k} entries, got {len(demands)}")
    if cache is not None:
        demands.validate(t.k, max((file_id for _, file_id in cache), default=0))

    def transmission(en, user, tau):
        file_id = demands.demand(user)
        payload = cache[(en, file_id)] if cache is not None else None
        return Transmission(en, user, file_id, tau, payload)

    if t.d == 1:
        slots = (
            Slot(1, 1, 1, tuple(transmission(j, j, 1) for j in t.users)),
        )
    else:
        slots, time = [], 0
        for s in range(1, stage_count(t.d) + 1):
            for _, phase, offsets in _stage_offsets(t):
                time += 1
                txs = [
                    transmission(en, user, tau)
                    for i in offsets
                    for en, user, tau in _block_pair(t, s, i)
                ]
                slots.append(
                    Slot(time, s, phase, tuple(sorted(txs, key=lambda tx: tx.en)))
                )
        slots = tuple(slots)

    schedule = Schedule(t, slots)
    logger.info(
        f"{t}: {len(schedule)} slots, {schedule.deliveries} deliveries"
        f" in {schedule.n_stages} stage(s)"
    )
    return schedule


# ---------- dump format ----------


def schedule_frame(sched: Schedule) -> pd.DataFrame:
    """One row per transmission, sorted by (slot, en)."""
    records = [
        {
            "slot": slot.time,
            "stage": slot.stage,
            "phase": slot.phase,
            "en": tx.en,
            "ue": tx.user,
            "file": tx.file_id,
            "type": tx.tau,
        }
        for slot, tx in sched.transmissions()
    ]
    frame = pd.DataFrame.from_records(records, columns=DUMP_COLUMNS)
    return frame.sort_values(["slot", "en"], ignore_index=True)


def schedule_from_frame(t: Topology, frame: pd.DataFrame) -> Schedule:
    """Rebuild a Schedule (without payloads) from `schedule_frame` rows."""
    slots = []
    for time, rows in frame.groupby("slot", sort=True):
        stages, phases = set(rows["stage"]), set(rows["phase"])
        if len(stages) != 1 or len(phases) != 1:
            raise ValueError(f"Slot {time} mixes stages {stages} or phases {phases}")
        txs = tuple(
            Transmission(int(r.en), int(r.ue), int(r.file), int(r.type))
            for r in rows.sort_values("en").itertuples()
        )
        slots.append(Slot(int(time), int(stages.pop()), int(phases.pop()), txs))
    return Schedule(t, tuple(slots))


def dump_schedule(sched: Schedule) -> str:
    """Line-oriented schedule dump, one transmission per line."""
    return "".join(
        f"slot={r.slot} stage={r.stage} phase={r.phase} en={r.en}"
        f" ue={r.ue} file={r.file} type={r.type}\n"
        for r in schedule_frame(sched).itertuples()
    )


def parse_schedule(t: Topology, text: str) -> Schedule:
    """Inverse of `dump_schedule`."""
    records = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        match = _DUMP_LINE.match(line.strip())
        if match is None:
            raise ValueError(f"Malformed schedule line {line_no}: {line!r}")
        records.append([int(v) for v in match.groups()])
    return schedule_from_frame(t, pd.DataFrame(records, columns=DUMP_COLUMNS))


def write_schedule(sched: Schedule, path):
    path = atomic_write_text(path, dump_schedule(sched))
    logger.info(f"Schedule written to {path}")
    return path
