"""
Schedule verification under the deterministic collision model

A user decodes a slot iff exactly one of its connected ENs is active, and that EN is the
one addressing it. Noise, channel gains and the power constraint are not simulated.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

from . import analysis
from .placement import (
    DemandVector,
    Library,
    PlacementScheme,
    build_placement,
    decodability_rank,
    decode,
    encode,
)
from .scheduler import Schedule, subfile_type
from .topology import Topology
from .utils import format_fraction, payload_digest

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Violation:
    """A transmission its intended user cannot decode.

    Attributes:
        slot (int): slot time.
        user (int): intended user.
        interferers (tuple): active connected ENs other than the sender.
        kind (str): one of "collision", "not-connected", "duplicate-en",
            "out-of-range", "type-mismatch" or "pairing".
    """

    slot: int
    user: int
    interferers: tuple
    kind: str = "collision"


@dataclass(frozen=True)
class NdtReport:
    slots: int
    deliveries: int
    sum_dof: Fraction
    ndt_exact: Fraction
    ndt_bound: Fraction


@dataclass
class ValidationResult:
    collisions: list = field(default_factory=list)
    pairing: list = field(default_factory=list)
    missing: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not (self.collisions or self.pairing or self.missing)


@dataclass
class DeliveryOutcome:
    decoded: dict
    mismatched_users: list

    @property
    def ok(self) -> bool:
        return not self.mismatched_users

    @property
    def first_mismatch(self):
        return self.mismatched_users[0] if self.mismatched_users else None


def check_collisions(t: Topology, sched: Schedule) -> list:
    """Violations of the collision model; an empty list means success."""
    violations = []
    for slot in sched:
        senders = [tx.en for tx in slot.transmissions]
        for en in {en for en in senders if senders.count(en) > 1}:
            violations.append(Violation(slot.time, 0, (en,), "duplicate-en"))
        active = slot.active_ens
        for tx in slot.transmissions:
            if not (1 <= tx.user <= t.k and 1 <= tx.en <= t.k):
                violations.append(Violation(slot.time, tx.user, (tx.en,), "out-of-range"))
                continue
            connected = set(t.transmitters(tx.user))
            if tx.en not in connected:
                violations.append(Violation(slot.time, tx.user, (tx.en,), "not-connected"))
                continue
            if tx.tau != subfile_type(t, tx.en, tx.user):
                violations.append(Violation(slot.time, tx.user, (tx.en,), "type-mismatch"))
            interferers = tuple(sorted((active & connected) - {tx.en}))
            if interferers:
                violations.append(Violation(slot.time, tx.user, interferers))
    for v in violations:
        logger.warning(render_violation(v))
    return violations


def check_stage_pairing(t: Topology, sched: Schedule) -> list:
    """Slots whose subfile types do not sum to d+1 within a block."""
    if t.d == 1:
        return []
    violations = []
    for slot in sched:
        taus = {tx.tau for tx in slot.transmissions}
        expected = {slot.stage, t.d - slot.stage + 1}
        if not taus <= expected:
            violations.append(Violation(slot.time, 0, tuple(sorted(taus)), "pairing"))
    for v in violations:
        logger.warning(render_violation(v))
    return violations


def received_sources(t: Topology, sched: Schedule) -> dict:
    """ENs each user heard from, whatever type the transmissions claim."""
    collected = {user: set() for user in t.users}
    for slot, tx in sched.transmissions():
        collected[tx.user].add(tx.en)
    return collected


def received_types(t: Topology, sched: Schedule) -> dict:
    """Distinct subfile types each user decoded, read off the sending ENs.

    Every transmission must address a connected user (see `check_collisions`).
    """
    return {
        user: {subfile_type(t, en, user) for en in ens}
        for user, ens in received_sources(t, sched).items()
    }


def check_completeness(
    t: Topology, sched: Schedule, scheme: PlacementScheme = None
) -> dict:
    """Per-user missing types; an empty dict means every user holds all d types.

    Complete users are additionally checked to hold d coded subfiles of full rank.
    """
    scheme = scheme or build_placement(t)
    all_types = set(range(1, t.d + 1))
    sources_by_user = received_sources(t, sched)
    missing = {}
    for user, types in received_types(t, sched).items():
        if types >= all_types:
            sources = sources_by_user[user]
            rank = decodability_rank(scheme, sources)
            if rank != t.d:
                raise RuntimeError(
                    f"UE {user} holds all types but its sources {sorted(sources)}"
                    f" have rank {rank} < d={t.d}"
                )
        else:
            missing[user] = frozenset(all_types - types)
    if missing:
        logger.warning(f"{t}: {len(missing)} user(s) miss subfile types")
    return missing


def validate(t: Topology, sched: Schedule, scheme: PlacementScheme = None) -> ValidationResult:
    """Run the collision, pairing and completeness checks together."""
    result = ValidationResult(
        collisions=check_collisions(t, sched),
        pairing=check_stage_pairing(t, sched),
    )
    if not result.collisions:
        result.missing = check_completeness(t, sched, scheme)
    return result


def simulate_delivery(
    t: Topology,
    scheme: PlacementScheme,
    lib: Library,
    demands: DemandVector,
    sched: Schedule,
    cache: dict = None,
) -> DeliveryOutcome:
    """Replay the schedule and decode every user's demanded file.

    Args:
        cache (dict, optional): pre-computed `encode(scheme, lib)` output.

    Returns:
        DeliveryOutcome: decoded payloads per user and the users whose file differs.
    """
    demands.validate(t.k, lib.n_files)
    cache = cache if cache is not None else encode(scheme, lib)

    received = {user: {} for user in t.users}
    for slot in sched:
        active = slot.active_ens
        for tx in slot.transmissions:
            if active & set(t.transmitters(tx.user)) != {tx.en}:
                continue  # collided, nothing decoded
            part = tx.payload if tx.payload is not None else cache[(tx.en, tx.file_id)]
            received[tx.user][tx.en] = part

    decoded, mismatched = {}, []
    for user in t.users:
        file_id = demands.demand(user)
        parts = [p for p in received[user].values() if p.file_id == file_id][: t.d]
        if len(parts) < t.d:
            mismatched.append(user)
            logger.warning(f"UE {user} received {len(parts)} of {t.d} coded subfiles")
            continue
        decoded[user] = decode(scheme, file_id, parts)
        logger.debug(
            f"UE {user} decoded file {file_id}: {payload_digest(decoded[user])}"
        )
        if decoded[user] != lib.file(file_id):
            mismatched.append(user)
            logger.warning(f"UE {user} decoded a payload different from file {file_id}")
    return DeliveryOutcome(decoded, mismatched)


def measure(t: Topology, sched: Schedule) -> NdtReport:
    """Slot-counting NDT: an interference-free slot carries F/d bits, so NDT = S/d."""
    slots = len(sched)
    if slots == 0:
        raise ValueError("Cannot measure an empty schedule")
    deliveries = sched.deliveries
    return NdtReport(
        slots=slots,
        deliveries=deliveries,
        sum_dof=Fraction(deliveries, slots),
        ndt_exact=Fraction(slots, t.d),
        ndt_bound=analysis.prop1_bound(t.d),
    )


def render_report(report: NdtReport) -> str:
    return (
        f"ndt={format_fraction(report.ndt_exact)} dof={format_fraction(report.sum_dof)}"
        f" slots={report.slots} deliveries={report.deliveries}"
    )


def render_violation(v: Violation) -> str:
    interferers = ",".join(str(en) for en in v.interferers)
    return f"violation kind={v.kind} slot={v.slot} ue={v.user} ens={interferers}"
