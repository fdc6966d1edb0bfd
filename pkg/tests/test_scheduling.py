import pytest

from wsn_sched.scheduling import (ALL_KINDS, SlotAction, TableError, TableKind,
                                  build_table, parse_table, slot_action, uncontended_latency_frames,
                                  validate_table, zones_per_frame)

from helpers import single_packet_run

A = SlotAction
SLOTS = {"x": 17, "v9x9": 9, "v": 8, "leon4x4_crossed_shifted": 4,
         "leon4x4_crossed_not_shifted": 4, "crossed4x4_shifted": 4}


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_builtin_tables_valid(kind):
    t = build_table(kind)
    assert t.slots_per_frame == SLOTS[kind.value]
    assert validate_table(t).ok, str(validate_table(t))


def test_x_slot_budget():
    t = build_table("x")
    for row in t.actions:
        up = sum(a in (A.TRANSMIT_UP, A.RECEIVE_UP) for a in row)
        down = sum(a in (A.TRANSMIT_DOWN, A.RECEIVE_DOWN) for a in row)
        assert row[-1] in (A.TRANSMIT_BROADCAST, A.RECEIVE_BROADCAST, A.SLEEP)
        # up and down actions never share a slot column within a row; 8 + 8 + 1 columns
        assert up <= 8 and down <= 8
    cols_up = {s for row in t.actions for s, a in enumerate(row) if a in (A.TRANSMIT_UP, A.RECEIVE_UP)}
    cols_down = {s for row in t.actions for s, a in enumerate(row) if a in (A.TRANSMIT_DOWN, A.RECEIVE_DOWN)}
    assert len(cols_up) == 8 and len(cols_down) == 8 and not cols_up & cols_down
    assert t.broadcast_slots == {16}


def test_v_has_no_broadcast_and_v9x9_uses_last_slot():
    assert build_table("v").broadcast_slots == frozenset()
    t = build_table("v9x9")
    assert t.broadcast_slots == {8}
    assert t.actions[0][8] is A.TRANSMIT_BROADCAST


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_periodicity(kind):
    t = build_table(kind)
    for z in range(1, 3 * t.zone_period):
        for s in range(t.slots_per_frame):
            assert slot_action(t, z, s) is slot_action(t, z + t.zone_period, s)


def test_gateway_row_masking():
    t = build_table("x")
    row = [slot_action(t, 0, s) for s in range(17)]
    assert A.TRANSMIT_UP not in row and A.RECEIVE_UP in row
    assert A.TRANSMIT_DOWN in row or A.TRANSMIT_BROADCAST in row
    with pytest.raises(ValueError):
        slot_action(t, 0, 17)
    with pytest.raises(ValueError):
        slot_action(t, -1, 0)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_pairing_scan(kind):
    # scan over unrolled zones, independent of the validator's modular arithmetic
    t = build_table(kind)
    P, S = t.zone_period, t.slots_per_frame
    for z in range(1, 3 * P):
        for s in range(S):
            a = slot_action(t, z, s)
            if a is A.TRANSMIT_UP:
                assert slot_action(t, z - 1, s) is A.RECEIVE_UP
            if a is A.TRANSMIT_DOWN:
                assert slot_action(t, z + 1, s) is A.RECEIVE_DOWN


def test_constructed_pairing_violation():
    t = build_table("x")
    t = t.replace_cell(3, 2, A.TRANSMIT_UP).replace_cell(2, 2, A.SLEEP)
    rules = {v.rule for v in validate_table(t).violations}
    assert "pairing" in rules


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_mutation_sweep(kind):
    t = build_table(kind)
    for z, row in enumerate(t.actions):
        for s, a in enumerate(row):
            if a is A.SLEEP:
                continue
            assert not validate_table(t.replace_cell(z, s, A.SLEEP)).ok, (z, s)


def test_zones_per_frame_values():
    assert zones_per_frame(build_table("x"), "up") == 8
    assert zones_per_frame(build_table("v9x9"), "up") == 4
    assert zones_per_frame(build_table("x"), "down") == 8
    with pytest.raises(ValueError):
        zones_per_frame(build_table("x"), "sideways")


def _simulated_hops_in_first_frame(kind, origin):
    sim = single_packet_run(kind, origin, frames=2)
    # a hop is logged as 'rx' at the parent (or 'deliver' at the gateway)
    return sum(1 for ln in sim.events
               if ln.split()[4] in ("rx", "deliver") and int(ln.split()[1]) == 0)


def test_v_zones_per_frame_matches_line_simulation():
    t = build_table("v")
    P = t.zone_period
    simulated = max(_simulated_hops_in_first_frame("v", 2 * P + r) for r in range(P))
    assert zones_per_frame(t, "up") == simulated


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_zones_per_frame_origin_takes_one_frame(kind):
    t = build_table(kind)
    k = zones_per_frame(t, "up")
    if k <= t.zone_period:
        assert min(uncontended_latency_frames(t, z) for z in range(1, k + 1)) == 1


def test_latency_examples():
    assert uncontended_latency_frames(build_table("x"), 8) == 1
    assert uncontended_latency_frames(build_table("v9x9"), 8) == 2
    with pytest.raises(ValueError):
        uncontended_latency_frames(build_table("x"), 0)


def test_parse_errors_and_aliases():
    assert TableKind.parse("V(9x9)") is TableKind.V9X9
    assert TableKind.parse("Leon-4x4 crossed shifted") is TableKind.LEON4X4_CROSSED_SHIFTED
    with pytest.raises(TableError):
        TableKind.parse("w")
    with pytest.raises(TableError):
        parse_table("UuQd\n", "crossed4x4_shifted")
    t = parse_table(build_table("v").render(), "v")
    assert t == build_table("v")
