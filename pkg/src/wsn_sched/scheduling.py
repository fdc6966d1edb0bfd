"""Zone-periodic scheduling tables and their structural checks.

A table is a ``zone_period x slots_per_frame`` matrix of slot actions.  Row
``z mod zone_period`` gives what every node of time zone ``z`` does in each
slot of the frame, so deeper networks reuse the same rows.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path


class TableError(ValueError):
    pass


class SlotAction(str, enum.Enum):
    TRANSMIT_UP = "U"
    TRANSMIT_DOWN = "D"
    RECEIVE_UP = "u"
    RECEIVE_DOWN = "d"
    TRANSMIT_BROADCAST = "B"
    RECEIVE_BROADCAST = "b"
    SLEEP = "."

    @property
    def is_transmit(self) -> bool:
        return self in _TRANSMIT

    @property
    def is_receive(self) -> bool:
        return self in _RECEIVE


_TRANSMIT = {SlotAction.TRANSMIT_UP, SlotAction.TRANSMIT_DOWN, SlotAction.TRANSMIT_BROADCAST}
_RECEIVE = {SlotAction.RECEIVE_UP, SlotAction.RECEIVE_DOWN, SlotAction.RECEIVE_BROADCAST}
# the gateway has no upstream and never receives from farther zones
_GATEWAY_MASKED = {SlotAction.TRANSMIT_UP, SlotAction.RECEIVE_DOWN, SlotAction.RECEIVE_BROADCAST}


class TableKind(str, enum.Enum):
    X = "x"
    V = "v"
    V9X9 = "v9x9"
    LEON4X4_CROSSED_SHIFTED = "leon4x4_crossed_shifted"
    LEON4X4_CROSSED_NOT_SHIFTED = "leon4x4_crossed_not_shifted"
    CROSSED4X4_SHIFTED = "crossed4x4_shifted"

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def parse(cls, text: str) -> TableKind:
        key = re.sub(r"[^a-z0-9]", "", text.lower())
        key = {"v9": "v9x9"}.get(key, key)
        for kind in cls:
            if kind.value.replace("_", "") == key:
                return kind
        raise TableError(f"unknown table kind {text!r}")


_LABELS = {
    TableKind.X: "X",
    TableKind.V: "V",
    TableKind.V9X9: "V (9x9)",
    TableKind.LEON4X4_CROSSED_SHIFTED: "Leon (4x4) Crossed Shifted",
    TableKind.LEON4X4_CROSSED_NOT_SHIFTED: "Leon (4x4) Crossed Not Shifted",
    TableKind.CROSSED4X4_SHIFTED: "(4x4) Crossed Shifted",
}

# (slots_per_frame, zone_period)
SHAPE = {
    TableKind.X: (17, 9),
    TableKind.V9X9: (9, 9),
    TableKind.V: (8, 8),
    TableKind.LEON4X4_CROSSED_SHIFTED: (4, 4),
    TableKind.LEON4X4_CROSSED_NOT_SHIFTED: (4, 4),
    TableKind.CROSSED4X4_SHIFTED: (4, 4),
}
SINGLE_BROADCAST_SLOT = {TableKind.X, TableKind.V9X9}


@dataclass(frozen=True)
class SchedulingTable:
    kind: TableKind
    actions: tuple[tuple[SlotAction, ...], ...]

    @property
    def zone_period(self) -> int:
        return len(self.actions)

    @property
    def slots_per_frame(self) -> int:
        return len(self.actions[0]) if self.actions else 0

    @property
    def broadcast_slots(self) -> frozenset[int]:
        return frozenset(s for row in self.actions for s, a in enumerate(row)
                         if a in (SlotAction.TRANSMIT_BROADCAST, SlotAction.RECEIVE_BROADCAST))

    @property
    def sleep_after_activity(self) -> bool:
        """Nodes power down as soon as their own transfer (or its absence) is settled."""
        return self.kind is TableKind.LEON4X4_CROSSED_SHIFTED

    def row(self, zone: int) -> tuple[SlotAction, ...]:
        return self.actions[zone % self.zone_period]

    def render(self) -> str:
        return "\n".join("".join(a.value for a in row) for row in self.actions)

    def replace_cell(self, zone: int, slot: int, action: SlotAction) -> SchedulingTable:
        rows = [list(r) for r in self.actions]
        rows[zone][slot] = action
        return SchedulingTable(self.kind, tuple(tuple(r) for r in rows))


@dataclass(frozen=True)
class Violation:
    rule: str
    zone: int | None
    slot: int | None
    message: str

    def __str__(self):
        at = "" if self.zone is None else f" at (zone {self.zone}, slot {self.slot})"
        return f"[{self.rule}]{at} {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, rule, zone, slot, message):
        self.violations.append(Violation(rule, zone, slot, message))

    def __str__(self):
        return "ok" if self.ok else "\n".join(map(str, self.violations))


def parse_table(text: str, kind: TableKind | str, validate: bool = True) -> SchedulingTable:
    kind = TableKind.parse(kind) if isinstance(kind, str) else kind
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rows.append(tuple(SlotAction(c) for c in line))
        except ValueError:
            raise TableError(f"line {lineno}: bad cell in {line!r}") from None
    if not rows:
        raise TableError("empty table")
    if len({len(r) for r in rows}) != 1:
        raise TableError("rows have different lengths")
    table = SchedulingTable(kind, tuple(rows))
    if validate:
        report = validate_table(table)
        if not report.ok:
            raise TableError(f"invalid {kind.value} table:\n{report}")
    return table


def load_table(path: str | Path, kind: TableKind | str) -> SchedulingTable:
    return parse_table(Path(path).read_text(encoding="utf-8"), kind)


def build_table(kind: TableKind | str) -> SchedulingTable:
    """The canonical bundled matrix for ``kind``."""
    kind = TableKind.parse(kind) if isinstance(kind, str) else kind
    text = resources.files("wsn_sched").joinpath(f"data/tables/{kind.value}.tbl").read_text(encoding="utf-8")
    return parse_table(text, kind)


def slot_action(table: SchedulingTable, zone: int, slot: int) -> SlotAction:
    if not 0 <= slot < table.slots_per_frame:
        raise ValueError(f"slot {slot} outside [0, {table.slots_per_frame})")
    if zone < 0:
        raise ValueError("zone must be non-negative")
    action = table.actions[zone % table.zone_period][slot]
    if zone == 0 and action in _GATEWAY_MASKED:
        return SlotAction.SLEEP
    return action


_PAIRS = [
    # (action, row offset of partner, partner action)
    (SlotAction.TRANSMIT_UP, -1, SlotAction.RECEIVE_UP),
    (SlotAction.RECEIVE_UP, +1, SlotAction.TRANSMIT_UP),
    (SlotAction.TRANSMIT_DOWN, +1, SlotAction.RECEIVE_DOWN),
    (SlotAction.RECEIVE_DOWN, -1, SlotAction.TRANSMIT_DOWN),
    (SlotAction.TRANSMIT_BROADCAST, +1, SlotAction.RECEIVE_BROADCAST),
    (SlotAction.RECEIVE_BROADCAST, -1, SlotAction.TRANSMIT_BROADCAST),
]


def validate_table(table: SchedulingTable) -> ValidationReport:
    report = ValidationReport()
    kind = table.kind
    spf, period = SHAPE[kind]
    if table.slots_per_frame != spf:
        report.add("shape", None, None, f"{kind.value} needs {spf} slots per frame, has {table.slots_per_frame}")
    if table.zone_period != period:
        report.add("shape", None, None, f"{kind.value} needs {period} zone rows, has {table.zone_period}")
    if any(len(r) != table.slots_per_frame for r in table.actions):
        report.add("shape", None, None, "ragged rows")
        return report

    P, S = table.zone_period, table.slots_per_frame
    A = table.actions
    for z in range(P):
        for s in range(S):
            for action, off, partner in _PAIRS:
                if A[z][s] is action and A[(z + off) % P][s] is not partner:
                    report.add("pairing", z, s, f"{action.name} needs {partner.name} in zone row {(z + off) % P}")

    bcols = sorted(table.broadcast_slots)
    if kind is TableKind.V and bcols:
        report.add("broadcast", None, None, "V has no broadcast slot")
    if kind in SINGLE_BROADCAST_SLOT:
        if bcols != [S - 1]:
            report.add("broadcast", None, None, f"broadcast must occupy exactly the last slot, found {bcols}")
        else:
            col = [A[z][S - 1] for z in range(P)]
            if any(a not in (SlotAction.TRANSMIT_BROADCAST, SlotAction.RECEIVE_BROADCAST, SlotAction.SLEEP)
                   for a in col):
                report.add("broadcast", None, S - 1, "broadcast slot mixes in data actions")
            if col[0] is not SlotAction.TRANSMIT_BROADCAST:
                report.add("broadcast", 0, S - 1, "gateway row must broadcast in the broadcast slot")

    row0 = A[0]
    if SlotAction.RECEIVE_UP not in row0:
        report.add("gateway", 0, None, "gateway row never receives upstream")
    if SlotAction.TRANSMIT_DOWN not in row0 and SlotAction.TRANSMIT_BROADCAST not in row0:
        report.add("gateway", 0, None, "gateway row has no downstream or broadcast transmission")
    for z in range(P):
        if SlotAction.TRANSMIT_UP not in A[z]:
            report.add("coverage", z, None, "zone row cannot forward upstream")

    if kind is TableKind.LEON4X4_CROSSED_SHIFTED:
        for z in range(P):
            if SlotAction.SLEEP not in A[z]:
                report.add("kind", z, None, "every zone row must sleep at least once")
    if kind is TableKind.LEON4X4_CROSSED_NOT_SHIFTED:
        for z in range(1, P):
            for s in range(S):
                if A[z][s] is SlotAction.TRANSMIT_DOWN:
                    report.add("kind", z, s, "downstream must travel by gateway broadcast only")
    if kind is TableKind.CROSSED4X4_SHIFTED:
        if not any(A[z][s].is_transmit and A[(z + 2) % P][s].is_transmit
                   for z in range(P) for s in range(S)):
            report.add("kind", None, None, "no slot where alternate zones transmit together")
    return report


def _chase(table: SchedulingTable, zone: int, upstream: bool, start: int, n_slots: int | None,
           stop_at_gateway: bool = True) -> list[tuple[int, int]]:
    """Follow one uncontended packet; returns [(global_slot, zone_after_hop), ...]."""
    S = table.slots_per_frame
    hops = []
    t = start
    limit = start + (n_slots if n_slots is not None else (zone + 1) * S * table.zone_period * 4)
    while t < limit:
        if upstream and stop_at_gateway and zone == 0:
            break
        a = slot_action(table, zone, t % S)
        if upstream and a is SlotAction.TRANSMIT_UP:
            zone -= 1
            hops.append((t, zone))
        elif not upstream and a in (SlotAction.TRANSMIT_DOWN, SlotAction.TRANSMIT_BROADCAST):
            zone += 1
            hops.append((t, zone))
        t += 1
    return hops


def zones_per_frame(table: SchedulingTable, direction: str = "up") -> int:
    """Most zone hops one packet can make between the start and end of one frame."""
    upstream = _is_up(direction)
    S, P = table.slots_per_frame, table.zone_period
    base = P * (S // P + 2)  # deep enough that the gateway is never reached
    return max(len(_chase(table, base + r, upstream, 0, S)) for r in range(P))


def upstream_delivery_slot(table: SchedulingTable, origin_zone: int, start_slot: int = 0) -> int:
    """Global slot index in which a packet leaving ``origin_zone`` reaches the gateway."""
    if origin_zone < 1:
        raise ValueError("origin zone must be >= 1")
    hops = _chase(table, origin_zone, True, start_slot, None)
    if not hops or hops[-1][1] != 0:
        raise TableError(f"{table.kind.value}: no upstream path from zone {origin_zone}")
    return hops[-1][0]


def uncontended_latency_frames(table: SchedulingTable, origin_zone: int) -> int:
    """Frames touched by a packet ready at the start of a frame in ``origin_zone``."""
    return upstream_delivery_slot(table, origin_zone) // table.slots_per_frame + 1


def _is_up(direction) -> bool:
    d = getattr(direction, "value", direction)
    if d in ("up", "upstream", "Upstream"):
        return True
    if d in ("down", "downstream", "Downstream"):
        return False
    raise ValueError(f"direction must be upstream or downstream, got {direction!r}")


ALL_KINDS = tuple(TableKind)
