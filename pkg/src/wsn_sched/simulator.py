"""Slot-driven MAC simulator with per-node radio energy accounting.

Time advances one TDMA slot at a time.  In each slot every node does what
its zone's table row prescribes; nodes allowed to transmit that have a
queued packet run a CSMA backoff, and receivers in the adjacent zone either
get the frame or lose it to a collision.

The MAC decisions (backoffs, carrier sense, collisions) never depend on the
packet airtime, so radio-state durations are tracked as ``const + coef *
airtime`` per node.  One simulated timeline can therefore be evaluated for
any payload size or chipset sharing the same slot layout; see
:meth:`Timeline.evaluate`.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from .core import (
    ChipsetProfile, ConfigError, Direction, EnergyAccount, MAX_EXTRA_PAYLOAD_BITS,
    MAX_PAYLOAD_BYTES, DEFAULT_HEADER_BYTES, Packet, RadioState, accumulate, airtime, packet_bits,
)
from .rng import SplitMix64, derive_seed
from .scheduling import SchedulingTable, SlotAction, slot_action, validate_table
from .topology import Topology

TX, RX, LISTEN, SLEEP = (int(s) for s in (RadioState.TRANSMIT, RadioState.RECEIVE,
                                          RadioState.LISTEN, RadioState.SLEEP))
DEFAULT_QUEUE_CAPACITY = 32


@dataclass(frozen=True)
class TrafficConfig:
    report_interval_s: float = 10.0
    payload_bytes: int = 16
    extra_payload_bits: int = 0
    downstream_interval_s: float | None = None
    header_bytes: int = DEFAULT_HEADER_BYTES
    # None means every non-gateway node reports
    sources: frozenset[int] | None = None
    jitter: bool = True

    def validate(self):
        if not self.report_interval_s > 0:
            raise ConfigError("report interval must be positive", key="report_interval_s")
        if self.downstream_interval_s is not None and not self.downstream_interval_s > 0:
            raise ConfigError("downstream interval must be positive", key="downstream_interval_s")
        if not 0 <= self.payload_bytes <= MAX_PAYLOAD_BYTES:
            raise ConfigError(f"payload must be in [0, {MAX_PAYLOAD_BYTES}] bytes", key="payload_bytes")
        if not 0 <= self.extra_payload_bits <= MAX_EXTRA_PAYLOAD_BITS:
            raise ConfigError(f"extra payload must be in [0, {MAX_EXTRA_PAYLOAD_BITS}] bits",
                              key="extra_payload_bits")
        if self.header_bytes < 0:
            raise ConfigError("header must be non-negative", key="header_bytes")


@dataclass(frozen=True)
class CsmaConfig:
    contention_window: int = 16
    micro_slot_s: float = 0.001
    max_retries: int = 5

    def validate(self):
        if self.contention_window < 1:
            raise ConfigError("contention window must be >= 1", key="contention_window")
        if not self.micro_slot_s > 0:
            raise ConfigError("micro slot must be positive", key="micro_slot_s")
        if self.max_retries < 0:
            raise ConfigError("max retries must be >= 0", key="max_retries")


@dataclass(frozen=True)
class Scenario:
    topology: Topology
    table: SchedulingTable
    profile: ChipsetProfile
    traffic: TrafficConfig = TrafficConfig()
    duration_s: float = 1200.0
    seed: int = 0
    slot_s: float = 0.1
    csma: CsmaConfig = CsmaConfig()
    queue_capacity: int = DEFAULT_QUEUE_CAPACITY

    @property
    def frame_s(self) -> float:
        return self.table.slots_per_frame * self.slot_s

    @property
    def n_slots(self) -> int:
        return int(round(self.duration_s / self.slot_s))

    def packet_airtime(self) -> float:
        probe = Packet(0, 0, Direction.UPSTREAM, self.traffic.payload_bytes,
                       self.traffic.extra_payload_bits, self.traffic.header_bytes)
        return airtime(packet_bits(probe, self.profile), self.profile)

    def validate(self) -> None:
        if not self.duration_s > 0:
            raise ConfigError("duration must be positive", key="duration_s")
        if not self.slot_s > 0:
            raise ConfigError("slot length must be positive", key="slot_s")
        if abs(self.n_slots * self.slot_s - self.duration_s) > 1e-9 * self.duration_s:
            raise ConfigError("duration must be a whole number of slots", key="duration_s")
        if self.queue_capacity < 1:
            raise ConfigError("queue capacity must be >= 1", key="queue_capacity")
        self.traffic.validate()
        self.csma.validate()
        report = validate_table(self.table)
        if not report.ok:
            raise ConfigError(f"invalid scheduling table:\n{report}", key="tables")
        busy = (self.csma.contention_window - 1) * self.csma.micro_slot_s + self.packet_airtime()
        if busy > self.slot_s + 1e-12:
            raise ConfigError(f"longest backoff plus airtime ({busy:.6f} s) exceeds the slot ({self.slot_s} s)",
                              key="slot_s")
        missing = set(self.topology.zone) - set(self.topology.adjacency)
        if missing:
            raise ConfigError(f"topology has nodes without adjacency: {sorted(missing)}")


@dataclass
class RunResult:
    per_node: dict[int, EnergyAccount]
    total_energy_j: float
    packets_generated: int
    packets_delivered: int
    collisions: int
    retransmissions: int
    mean_upstream_latency_frames: float
    dropped: int
    in_flight: int = 0
    excluded_nodes: int = 0
    downstream_generated: int = 0
    downstream_receptions: int = 0
    duration_s: float = 0.0


@dataclass(frozen=True)
class ContentionOutcome:
    backoffs: dict
    transmitters: frozenset

    @property
    def idle(self) -> bool:
        return not self.transmitters

    @property
    def winner(self) -> int | None:
        return next(iter(self.transmitters)) if len(self.transmitters) == 1 else None

    @property
    def collision(self) -> frozenset:
        return self.transmitters if len(self.transmitters) > 1 else frozenset()


def contend(candidates: Iterable[int], csma: CsmaConfig, rng: SplitMix64,
            adjacency=None) -> ContentionOutcome:
    """CSMA backoff among ``candidates``.

    Each candidate draws a backoff in ``[0, contention_window)`` (draws in
    ascending id order).  A candidate transmits unless it heard a
    transmission that started strictly earlier; equal backoffs cannot hear
    each other and all go ahead.  Without ``adjacency`` every candidate
    hears every other one, so the unique minimum wins and tied minima
    collide.
    """
    cands = sorted(candidates)
    backoffs = {n: rng.below(csma.contention_window) for n in cands}
    sending: set[int] = set()
    for b in sorted(set(backoffs.values())):
        group = [n for n in cands if backoffs[n] == b]
        if adjacency is None:
            if not sending:
                sending.update(group)
            continue
        sending.update([n for n in group if not (adjacency[n] & sending)])
    return ContentionOutcome(backoffs, frozenset(sending))


def deliver(receiver: int, transmitters_in_range: Iterable[int], intended: bool = True) -> str:
    """Outcome at one receiver: 'received', 'collided', or 'overheard'."""
    n = len(set(transmitters_in_range))
    if n >= 2:
        return "collided"
    if n == 1:
        return "received" if intended else "overheard"
    return "idle"


@dataclass
class Timeline:
    """Airtime-symbolic result of one simulated run."""
    node_ids: list[int]
    const: np.ndarray       # (N, 4) seconds per radio state
    coef: np.ndarray        # (N, 4) multiples of the packet airtime
    duration_s: float
    packets_generated: int = 0
    packets_delivered: int = 0
    dropped: int = 0
    collisions: int = 0
    retransmissions: int = 0
    latencies: list[int] = field(default_factory=list)
    in_flight: int = 0
    excluded_nodes: int = 0
    downstream_generated: int = 0
    downstream_receptions: int = 0

    def durations(self, airtime_s: float) -> np.ndarray:
        d = self.const + self.coef * airtime_s
        d[np.abs(d) < 1e-12] = 0.0
        return d

    def evaluate(self, profile: ChipsetProfile, airtime_s: float) -> RunResult:
        d = self.durations(airtime_s)
        if (d < 0).any():
            raise ValueError("airtime too long for this timeline (negative state duration)")
        per_node = {}
        for i, nid in enumerate(self.node_ids):
            acc = EnergyAccount()
            for s in RadioState:
                acc = accumulate(acc, s, float(d[i, s]), profile)
            per_node[nid] = acc
        lat = float(np.mean(self.latencies)) if self.latencies else math.nan
        return RunResult(
            per_node=per_node,
            total_energy_j=math.fsum(a.energy_joules for a in per_node.values()),
            packets_generated=self.packets_generated,
            packets_delivered=self.packets_delivered,
            collisions=self.collisions,
            retransmissions=self.retransmissions,
            mean_upstream_latency_frames=lat,
            dropped=self.dropped,
            in_flight=self.in_flight,
            excluded_nodes=self.excluded_nodes,
            downstream_generated=self.downstream_generated,
            downstream_receptions=self.downstream_receptions,
            duration_s=self.duration_s,
        )


class Simulator:
    """One deterministic run of a :class:`Scenario`.

    ``record_events`` keeps a text event log (``t_s frame slot node event
    detail``); ``check_slots`` asserts after every slot that each node's
    state durations advanced by exactly one slot.
    """

    def __init__(self, scenario: Scenario, record_events: bool = False, check_slots: bool = False):
        scenario.validate()
        self.sc = scenario
        self.record_events = record_events
        self.check_slots = check_slots
        self.events: list[str] = []
        self.delivered_packets: list[Packet] = []

        topo = scenario.topology
        self.ids = topo.nodes
        self.index = {nid: i for i, nid in enumerate(self.ids)}
        self.N = len(self.ids)
        self.gateway = topo.gateway
        self.zone = [topo.zone[n] for n in self.ids]
        self.adj = {n: frozenset(topo.adjacency[n]) for n in self.ids}
        self.up_q: dict[int, deque] = {n: deque() for n in self.ids}
        self.down_q: dict[int, deque] = {n: deque() for n in self.ids}
        self.seen_down: dict[int, set] = {n: set() for n in self.ids}
        self.has_children = {n: any(topo.zone[m] == topo.zone[n] + 1 for m in self.adj[n]) for n in self.ids}

        self.const = np.zeros((self.N, 4))
        self.coef = np.zeros((self.N, 4))
        self.tl = Timeline(self.ids, self.const, self.coef, scenario.duration_s,
                           excluded_nodes=len(topo.excluded))
        self.mac_rng = SplitMix64(derive_seed(scenario.seed, "mac"))
        self._next_pid = 1
        self._build_slot_plan()
        self._build_traffic_plan()

    # -- setup -----------------------------------------------------------------

    def _build_slot_plan(self):
        sc, table = self.sc, self.sc.table
        S = table.slots_per_frame
        window = min(sc.csma.contention_window * sc.csma.micro_slot_s, sc.slot_s)
        self.plan = []
        self.base = np.zeros((S, self.N, 4))
        for j in range(S):
            by_action: dict[SlotAction, list[int]] = {a: [] for a in SlotAction}
            for i, n in enumerate(self.ids):
                a = slot_action(table, self.zone[i], j)
                by_action[a].append(n)
                if a.is_receive:
                    if table.sleep_after_activity:
                        self.base[j, i, RX] = window
                        self.base[j, i, SLEEP] = sc.slot_s - window
                    else:
                        self.base[j, i, RX] = sc.slot_s
                else:
                    self.base[j, i, SLEEP] = sc.slot_s
            self.plan.append(by_action)
        self.action_of = [{n: a for a, ns in self.plan[j].items() for n in ns} for j in range(S)]

    def _build_traffic_plan(self):
        sc, tr = self.sc, self.sc.traffic
        jit_rng = SplitMix64(derive_seed(sc.seed, "jitter"))
        sources = [n for n in self.ids if n != self.gateway]
        jitter = {n: (jit_rng.random() * sc.frame_s if tr.jitter else 0.0) for n in sources}
        if tr.sources is not None:
            sources = [n for n in sources if n in tr.sources]
        gen = []
        for n in sources:
            k = 0
            while True:
                t = k * tr.report_interval_s + jitter[n]
                if t >= sc.duration_s - 1e-12:
                    break
                gen.append((t, n, Direction.UPSTREAM))
                k += 1
        if tr.downstream_interval_s is not None:
            k = 0
            while k * tr.downstream_interval_s < sc.duration_s - 1e-12:
                gen.append((k * tr.downstream_interval_s, self.gateway, Direction.DOWNSTREAM))
                k += 1
        gen.sort(key=lambda e: (e[0], self.index[e[1]], e[2].value))
        self.gen_plan = deque(gen)

    # -- helpers ---------------------------------------------------------------

    def _log(self, k: int, node, event: str, detail=""):
        if self.record_events:
            S = self.sc.table.slots_per_frame
            self.events.append(f"{k * self.sc.slot_s:.6f} {k // S} {k % S} {node} {event} {detail}".rstrip())

    def _new_packet(self, src: int, direction: Direction, t: float) -> Packet:
        tr = self.sc.traffic
        p = Packet(src, self.zone[self.index[src]], direction, tr.payload_bytes, tr.extra_payload_bits,
                   tr.header_bytes, created_at=t, pid=self._next_pid)
        p.trace.append(p.origin_zone)
        self._next_pid += 1
        return p

    def _add(self, deltas, n: int, state: int, const: float, coef: float = 0.0):
        i = self.index[n]
        self.const[i, state] += const
        self.coef[i, state] += coef
        if deltas is not None:
            d = deltas.setdefault(n, [0.0, 0.0])
            d[0] += const
            d[1] += coef

    # -- simulation ------------------------------------------------------------

    def generate_traffic(self, k: int) -> None:
        """Release every packet created at or before the start of slot ``k``."""
        now = k * self.sc.slot_s
        cap = self.sc.queue_capacity
        while self.gen_plan and self.gen_plan[0][0] <= now + 1e-12:
            t, n, direction = self.gen_plan.popleft()
            p = self._new_packet(n, direction, t)
            if direction is Direction.UPSTREAM:
                self.tl.packets_generated += 1
                q = self.up_q[n]
            else:
                self.tl.downstream_generated += 1
                self.seen_down[n].add(p.pid)
                q = self.down_q[n]
            if len(q) >= cap:
                if direction is Direction.UPSTREAM:
                    self.tl.dropped += 1
                self._log(k, n, "drop", f"{p.pid} queue_full")
            else:
                q.append(p)
                self._log(k, n, "gen", f"{p.pid} {direction.value}")

    def slot_step(self, k: int) -> None:
        sc, table = self.sc, self.sc.table
        S = table.slots_per_frame
        j = k % S
        frame = k // S
        plan, action_of = self.plan[j], self.action_of[j]
        micro, slot_s = sc.csma.micro_slot_s, sc.slot_s
        deltas = {} if self.check_slots else None
        self.const += self.base[j]

        cands = [n for n in plan[SlotAction.TRANSMIT_UP] if self.up_q[n]]
        cands += [n for a in (SlotAction.TRANSMIT_DOWN, SlotAction.TRANSMIT_BROADCAST)
                  for n in plan[a] if self.down_q[n]]
        if not cands:
            if self.check_slots:
                self._check_slot(k, deltas)
            return

        outcome = contend(cands, sc.csma, self.mac_rng, self.adj)
        senders = outcome.transmitters
        start = {n: outcome.backoffs[n] * micro for n in senders}

        for n in cands:
            # the idle-transmit baseline assumed Sleep for the whole slot
            self._add(deltas, n, SLEEP, -slot_s)
            if n in senders:
                bt = start[n]
                self._add(deltas, n, LISTEN, bt)
                self._add(deltas, n, TX, 0.0, 1.0)
                self._add(deltas, n, SLEEP if table.sleep_after_activity else LISTEN, slot_s - bt, -1.0)
                pkt = (self.up_q[n] if action_of[n] is SlotAction.TRANSMIT_UP else self.down_q[n])[0]
                self._log(k, n, "tx", f"{pkt.pid} {action_of[n].value} backoff={outcome.backoffs[n]}")
            else:
                if table.sleep_after_activity:
                    heard = min(start[m] for m in self.adj[n] & senders)
                    self._add(deltas, n, LISTEN, heard)
                    self._add(deltas, n, SLEEP, slot_s - heard)
                else:
                    self._add(deltas, n, LISTEN, slot_s)
                self._log(k, n, "defer", f"backoff={outcome.backoffs[n]}")

        # every node in a receive cell hears whatever is in range, addressed or not
        hearing = {}
        for n, a in action_of.items():
            if a.is_receive:
                in_range = self.adj[n] & senders
                if in_range:
                    hearing[n] = in_range
        if table.sleep_after_activity:
            window = min(sc.csma.contention_window * micro, slot_s)
            for n, in_range in hearing.items():
                last = max(start[m] for m in in_range)
                self._add(deltas, n, RX, last - window, 1.0)
                self._add(deltas, n, SLEEP, window - last, -1.0)

        for n in sorted(senders):
            a = action_of[n]
            if a is SlotAction.TRANSMIT_UP:
                self._finish_unicast(k, frame, n, hearing)
            else:
                self._finish_multicast(k, n, a, hearing)

        if self.check_slots:
            self._check_slot(k, deltas)

    def _finish_unicast(self, k: int, frame: int, n: int, hearing) -> None:
        sc = self.sc
        pkt = self.up_q[n][0]
        parent = self.sc.topology.parent[n]
        result = deliver(parent, hearing.get(parent, ()), True)
        if result == "received":
            self.up_q[n].popleft()
            pkt.trace.append(self.zone[self.index[parent]])
            if parent == self.gateway:
                lat = frame - int(math.floor(pkt.created_at / sc.frame_s + 1e-9)) + 1
                self.tl.packets_delivered += 1
                self.tl.latencies.append(lat)
                self.delivered_packets.append(pkt)
                self._log(k, parent, "deliver", f"{pkt.pid} latency_frames={lat}")
            elif len(self.up_q[parent]) >= sc.queue_capacity:
                self.tl.dropped += 1
                self._log(k, parent, "drop", f"{pkt.pid} queue_full")
            else:
                pkt.retries = 0
                self.up_q[parent].append(pkt)
                self._log(k, parent, "rx", f"{pkt.pid} from={n}")
            return
        self.tl.collisions += 1
        pkt.retries += 1
        self._log(k, parent, "collision", f"{pkt.pid} from={n}")
        if pkt.retries > sc.csma.max_retries:
            self.up_q[n].popleft()
            self.tl.dropped += 1
            self._log(k, n, "drop", f"{pkt.pid} retries")
        else:
            self.tl.retransmissions += 1

    def _finish_multicast(self, k: int, n: int, action: SlotAction, hearing) -> None:
        sc = self.sc
        pkt = self.down_q[n].popleft()
        want = SlotAction.RECEIVE_DOWN if action is SlotAction.TRANSMIT_DOWN else SlotAction.RECEIVE_BROADCAST
        z = self.zone[self.index[n]]
        j = k % sc.table.slots_per_frame
        for m in sorted(self.adj[n]):
            if self.zone[self.index[m]] != z + 1 or self.action_of[j].get(m) is not want:
                continue
            if deliver(m, hearing.get(m, ()), True) != "received":
                self.tl.collisions += 1
                self._log(k, m, "collision", f"{pkt.pid} from={n}")
                continue
            if pkt.pid in self.seen_down[m]:
                continue
            self.seen_down[m].add(pkt.pid)
            self.tl.downstream_receptions += 1
            self._log(k, m, "rx", f"{pkt.pid} from={n}")
            if self.has_children[m] and len(self.down_q[m]) < sc.queue_capacity:
                self.down_q[m].append(replace(pkt, trace=pkt.trace + [z + 1]))

    def _check_slot(self, k: int, deltas) -> None:
        for n, (c, f) in deltas.items():
            if abs(c) > 1e-12 or abs(f) > 1e-12:
                raise AssertionError(f"slot {k}: node {n} durations changed by {c} + {f}*airtime")

    def simulate(self) -> Timeline:
        for k in range(self.sc.n_slots):
            self.generate_traffic(k)
            self.slot_step(k)
        tl = self.tl
        # created during the last slot, never reached a queue
        late = sum(1 for _, _, d in self.gen_plan if d is Direction.UPSTREAM)
        tl.packets_generated += late
        tl.in_flight = sum(len(q) for q in self.up_q.values()) + late
        return tl

    def run(self) -> RunResult:
        return self.simulate().evaluate(self.sc.profile, self.sc.packet_airtime())


def simulate(scenario: Scenario, **kw) -> Timeline:
    return Simulator(scenario, **kw).simulate()


def run(scenario: Scenario) -> RunResult:
    return Simulator(scenario).run()
