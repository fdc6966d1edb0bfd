"""Unit-disk connectivity, hop-count time zones and the multi-hop parent tree."""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .deployment import Deployment

log = logging.getLogger(__name__)

DEFAULT_RANGE_CM = 150.0

Adjacency = Mapping[int, frozenset]


class DisconnectedTopology(RuntimeError):
    """Some nodes have no path to the gateway; ``tuple`` names the sweep entry, if any."""

    def __init__(self, unreachable, tuple_=None):
        self.unreachable = sorted(unreachable)
        self.tuple = tuple_
        where = f"{tuple_}: " if tuple_ is not None else ""
        super().__init__(f"{where}{len(self.unreachable)} node(s) cannot reach the gateway: {self.unreachable}")

    def __reduce__(self):
        return type(self), (self.unreachable, self.tuple)


class RoutingError(RuntimeError):
    """Zone map is inconsistent with the adjacency (no lower-zone neighbour)."""


@dataclass(frozen=True)
class Topology:
    adjacency: Mapping[int, frozenset]
    zone: Mapping[int, int]
    parent: Mapping[int, int]
    comm_range_cm: float
    coords: Mapping[int, tuple[float, float]] = field(default_factory=dict)
    excluded: tuple[int, ...] = ()
    gateway: int = 0

    @property
    def nodes(self) -> list[int]:
        return sorted(self.zone)

    @property
    def depth(self) -> int:
        return max(self.zone.values())


def _coords_of(source) -> dict[int, tuple[float, float]]:
    if isinstance(source, Deployment):
        return source.coords()
    return {int(k): (float(v[0]), float(v[1])) for k, v in dict(source).items()}


def connectivity(source, range_cm: float) -> dict[int, frozenset]:
    """Edge (u, v) iff their Euclidean distance is at most ``range_cm`` (inclusive)."""
    if range_cm <= 0:
        raise ValueError("communication range must be positive")
    coords = _coords_of(source)
    ids = sorted(coords)
    xy = np.array([coords[i] for i in ids], dtype=float).reshape(-1, 2)
    diff = xy[:, None, :] - xy[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    close = d2 <= range_cm * range_cm
    np.fill_diagonal(close, False)
    return {u: frozenset(ids[j] for j in np.flatnonzero(close[i])) for i, u in enumerate(ids)}


def assign_zones(adjacency: Adjacency, gateway: int = 0) -> tuple[dict[int, int], set[int]]:
    """Breadth-first hop count from the gateway; returns (zones, unreachable)."""
    if gateway not in adjacency:
        raise KeyError(f"gateway {gateway} not in graph")
    zone = {gateway: 0}
    queue = deque([gateway])
    while queue:
        u = queue.popleft()
        for v in sorted(adjacency[u]):
            if v not in zone:
                zone[v] = zone[u] + 1
                queue.append(v)
    return zone, set(adjacency) - set(zone)


def build_routing(adjacency: Adjacency, zones: Mapping[int, int], gateway: int = 0) -> dict[int, int]:
    """Parent = lowest-id neighbour one zone closer to the gateway."""
    parent = {}
    for n, z in zones.items():
        if n == gateway:
            continue
        up = [m for m in adjacency[n] if zones.get(m) == z - 1]
        if not up:
            raise RoutingError(f"node {n} in zone {z} has no neighbour in zone {z - 1}")
        parent[n] = min(up)
    return parent


def build_topology(source, range_cm: float = DEFAULT_RANGE_CM, gateway: int = 0,
                   exclude_unreachable: bool = False) -> Topology:
    coords = _coords_of(source)
    adj = connectivity(coords, range_cm)
    zones, unreachable = assign_zones(adj, gateway)
    if unreachable:
        if not exclude_unreachable:
            raise DisconnectedTopology(unreachable)
        log.warning("excluding %d unreachable node(s): %s", len(unreachable), sorted(unreachable))
        adj = {u: frozenset(v for v in nb if v not in unreachable)
               for u, nb in adj.items() if u not in unreachable}
        coords = {u: c for u, c in coords.items() if u not in unreachable}
    parent = build_routing(adj, zones, gateway)
    return Topology(adj, zones, parent, range_cm, coords, tuple(sorted(unreachable)), gateway)


def line_topology(n_zones: int, spacing_cm: float = 100.0, range_cm: float = 150.0) -> Topology:
    """Gateway plus one node per zone on a straight line (zone i is node i)."""
    return build_topology({i: (i * spacing_cm, 0.0) for i in range(n_zones + 1)}, range_cm)


def format_topology(topo: Topology) -> str:
    lines = [f"# range_cm {topo.comm_range_cm!r} nodes {len(topo.zone)} depth {topo.depth}"
             f" excluded {len(topo.excluded)}", "# edges"]
    for u in topo.nodes:
        for v in sorted(topo.adjacency[u]):
            if u < v:
                lines.append(f"{u} {v}")
    lines.append("# id zone parent")
    for n in topo.nodes:
        lines.append(f"{n} {topo.zone[n]} {topo.parent.get(n, '-')}")
    return "\n".join(lines) + "\n"
