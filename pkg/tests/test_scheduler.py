import pytest

from element_fogran.core import placement, scheduler, validator
from element_fogran.core.topology import new_topology

from .conftest import transmission_set


def schedule_for(k, d, n_files=None):
    t = new_topology(k, d)
    return t, scheduler.build_schedule(t, placement.canonical_demands(k, n_files or k))


def test_example_8_2():
    _, sched = schedule_for(8, 2)
    assert len(sched) == 5
    assert sched.deliveries == 16
    assert transmission_set(sched.slots[0]) == {(1, 1, 1), (2, 3, 2), (4, 4, 1), (5, 6, 2)}
    assert [len(slot.transmissions) for slot in sched.slots[3:]] == [2, 2]
    assert [slot.phase for slot in sched] == [1, 1, 1, 2, 2]


def test_example_8_2_phase_two_wraps():
    _, sched = schedule_for(8, 2)
    # last slot: EN8 serves UE8 while EN1 serves UE2
    assert transmission_set(sched.slots[4]) == {(8, 8, 1), (1, 2, 2)}


def test_example_7_2_first_slot():
    _, sched = schedule_for(7, 2)
    first = sched.slots[0]
    assert transmission_set(first) == {(1, 1, 1), (2, 3, 2), (4, 4, 1), (5, 6, 2)}
    assert not first.active_ens & {3, 6, 7}


def test_example_11_4():
    _, sched = schedule_for(11, 4)
    assert len(sched) == 12
    assert sched.deliveries == 44
    assert sched.n_stages == 2
    assert transmission_set(sched.slots[0]) == {(1, 1, 1), (2, 5, 4), (6, 6, 1), (7, 10, 4)}
    assert sched.slots[5].phase == 2
    assert transmission_set(sched.slots[5]) == {(11, 11, 1), (1, 4, 4)}
    assert sched.slots[6].stage == 2
    assert transmission_set(sched.slots[6]) == {(1, 2, 2), (3, 5, 3), (6, 7, 2), (8, 10, 3)}


def test_divisible_k_has_no_phase_two():
    _, sched = schedule_for(9, 2)
    assert len(sched) == 3
    assert sched.deliveries == 18
    assert {slot.phase for slot in sched} == {1}


def test_degree_one_single_slot():
    _, sched = schedule_for(6, 1)
    assert len(sched) == 1
    assert transmission_set(sched.slots[0]) == {(j, j, 1) for j in range(1, 7)}


@pytest.mark.parametrize("k, d", [(2, 2), (4, 4), (3, 3)])
def test_too_few_pairs_rejected(k, d):
    t = new_topology(k, d)
    with pytest.raises(ValueError):
        scheduler.build_schedule(t, placement.canonical_demands(k, k))


def test_demand_length_checked(net_8_2):
    with pytest.raises(ValueError):
        scheduler.build_schedule(net_8_2, placement.canonical_demands(7, 7))


@pytest.mark.parametrize("d", range(1, 9))
def test_slot_count_formula(d):
    for k in range(d + 1, 41):
        _, sched = schedule_for(k, d)
        assert len(sched) == scheduler.slot_count(k, d)


def test_schedule_is_demand_oblivious(net_8_2, rng):
    a = scheduler.build_schedule(net_8_2, placement.canonical_demands(8, 8))
    b = scheduler.build_schedule(net_8_2, placement.random_demands(8, 3, rng))
    def pattern(sched):
        return [
            (slot.time, slot.stage, slot.phase, sorted(transmission_set(slot)))
            for slot in sched
        ]

    assert pattern(a) == pattern(b)
    assert max(tx.file_id for _, tx in b.transmissions()) <= 3


def test_type_source(net_11_4, net_8_2):
    assert scheduler.type_source(net_11_4, 5, 4) == 2
    assert scheduler.type_source(net_8_2, 1, 2) == 8
    assert all(scheduler.type_source(net_11_4, j, 1) == j for j in net_11_4.users)
    with pytest.raises(ValueError):
        scheduler.type_source(net_8_2, 1, 3)
    with pytest.raises(IndexError):
        scheduler.type_source(net_8_2, 9, 1)


def test_subfile_type_inverts_type_source(net_11_4):
    for user in net_11_4.users:
        for tau in range(1, 5):
            en = scheduler.type_source(net_11_4, user, tau)
            assert scheduler.subfile_type(net_11_4, en, user) == tau


def test_stage_types():
    assert scheduler.stage_types(1, 4) == (1, 4)
    assert scheduler.stage_types(2, 4) == (2, 3)
    assert scheduler.stage_types(2, 3) == (2, 2)
    with pytest.raises(ValueError):
        scheduler.stage_types(3, 4)


def test_leftover_users(net_11_4, net_9_2, net_8_2):
    assert scheduler.leftover_users(net_11_4, 1) == ({11}, {4})
    assert scheduler.leftover_users(net_9_2, 1) == (frozenset(), frozenset())
    assert scheduler.leftover_users(net_8_2, 1) == ({7, 8}, {1, 2})


def test_truncate_keeps_first_stage():
    _, sched = schedule_for(11, 4)
    first = sched.truncate(1)
    assert len(first) == 6
    assert {slot.stage for slot in first} == {1}
    assert len(sched.stage(2)) == 6


def test_dump_format():
    _, sched = schedule_for(8, 2)
    lines = scheduler.dump_schedule(sched).splitlines()
    assert len(lines) == 16
    assert lines[0] == "slot=1 stage=1 phase=1 en=1 ue=1 file=1 type=1"
    assert lines[1] == "slot=1 stage=1 phase=1 en=2 ue=3 file=3 type=2"
    assert lines[-1] == "slot=5 stage=1 phase=2 en=8 ue=8 file=8 type=1"


def test_dump_parse(tmp_path):
    t, sched = schedule_for(11, 4)
    path = scheduler.write_schedule(sched, tmp_path / "sched.txt")
    parsed = scheduler.parse_schedule(t, path.read_text())
    assert parsed == sched


def test_parse_rejects_malformed(net_8_2):
    with pytest.raises(ValueError):
        scheduler.parse_schedule(net_8_2, "slot=1 stage=1 en=1\n")


@pytest.mark.parametrize("k, d", [(2, 2), (4, 4), (3, 3), (5, 7)])
def test_slot_count_needs_enough_pairs(k, d):
    assert not scheduler.schedulable(k, d)
    with pytest.raises(ValueError, match=f"need K >= {d + 1}"):
        scheduler.slot_count(k, d)


def test_degree_one_always_schedulable():
    assert scheduler.schedulable(1, 1)
    assert scheduler.slot_count(1, 1) == 1


def test_cache_checks_demand_range(net_8_2, gf65537, rng):
    scheme = placement.build_placement(net_8_2, gf65537)
    cache = placement.encode(scheme, placement.make_library(3, 16, rng))
    with pytest.raises(ValueError, match=r"\[1, 3\]"):
        scheduler.build_schedule(net_8_2, placement.canonical_demands(8, 4), cache)


@pytest.mark.parametrize("d", range(2, 9))
def test_phase_one_slots_are_cyclic_shifts(d):
    for k in range(d + 1, 41):
        t, sched = schedule_for(k, d)
        for s in range(1, scheduler.stage_count(d) + 1):
            phase_one = [slot for slot in sched.stage(s) if slot.phase == 1]
            assert len(phase_one) == d + 1
            for a, b in zip(phase_one, phase_one[1:]):
                shifted = {
                    (t.normalize(en + 1), t.normalize(user + 1), tau)
                    for en, user, tau in transmission_set(a)
                }
                assert transmission_set(b) == shifted, (k, d, s, b.time)


@pytest.mark.parametrize("d", range(1, 9))
def test_every_stage_covers_its_types(d):
    for k in range(d + 1, 41):
        t, sched = schedule_for(k, d)
        for s in range(1, scheduler.stage_count(d) + 1):
            assert validator.received_types(t, sched.stage(s)) == {
                user: set(scheduler.stage_types(s, d)) for user in t.users
            }
            covered = set(range(1, s + 1)) | set(range(d - s + 1, d + 1))
            assert validator.received_types(t, sched.truncate(s)) == {
                user: covered for user in t.users
            }
