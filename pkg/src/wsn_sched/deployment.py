"""Random and square-grid node placement over a rectangular field."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .core import Area, ConfigError, Position
from .rng import SplitMix64

KINDS = ("random", "grid")
GATEWAY_PLACEMENTS = ("corner", "center")


@dataclass(frozen=True)
class Deployment:
    kind: str
    positions: tuple[tuple[int, Position], ...]
    area: Area
    seed: int | None = None

    @property
    def count(self) -> int:
        return len(self.positions)

    def coords(self) -> dict[int, tuple[float, float]]:
        return {nid: (p.x_cm, p.y_cm) for nid, p in self.positions}

    @classmethod
    def from_coords(cls, coords, area: Area | None = None, kind: str = "custom") -> Deployment:
        """Build a deployment from ``[(x, y), ...]``; index 0 is the gateway."""
        pos = tuple((i, Position(float(x), float(y))) for i, (x, y) in enumerate(coords))
        if area is None:
            area = Area(max(1.0, max(p.x_cm for _, p in pos)), max(1.0, max(p.y_cm for _, p in pos)))
        return cls(kind, pos, area)


def _check_count(count: int) -> None:
    if count < 2:
        raise ConfigError(f"node count must be at least 2, got {count}", key="node_count")


def deploy_random(count: int, area: Area = Area(), seed: int = 0,
                  gateway: str = "corner") -> Deployment:
    """Uniform i.i.d. placement; the gateway (id 0) sits at the origin corner or the centre."""
    _check_count(count)
    if gateway not in GATEWAY_PLACEMENTS:
        raise ConfigError(f"unknown gateway placement {gateway!r}", key="gateway")
    rng = SplitMix64(seed)
    gw = Position(0.0, 0.0) if gateway == "corner" else Position(area.width_cm / 2, area.height_cm / 2)
    positions = [(0, gw)]
    for nid in range(1, count):
        x = rng.random() * area.width_cm
        y = rng.random() * area.height_cm
        positions.append((nid, Position(x, y)))
    return Deployment("random", tuple(positions), area, seed)


def grid_shape(count: int, area: Area) -> tuple[int, int]:
    """(rows, cols) factor pair of ``count`` whose cells are closest to square."""
    best = None
    for rows in range(1, count + 1):
        if count % rows:
            continue
        cols = count // rows
        score = abs(area.width_cm / cols - area.height_cm / rows)
        if best is None or score < best[0]:
            best = (score, rows, cols)
    return best[1], best[2]


def deploy_grid(count: int, area: Area = Area(), gateway: str = "corner") -> Deployment:
    _check_count(count)
    if gateway not in GATEWAY_PLACEMENTS:
        raise ConfigError(f"unknown gateway placement {gateway!r}", key="gateway")
    rows, cols = grid_shape(count, area)
    dx = area.width_cm / cols
    dy = area.height_cm / rows
    pts = [((c + 0.5) * dx, (r + 0.5) * dy) for r in range(rows) for c in range(cols)]
    target = (0.0, 0.0) if gateway == "corner" else (area.width_cm / 2, area.height_cm / 2)
    gw = min(range(len(pts)), key=lambda i: (math.dist(pts[i], target), i))
    pts[0], pts[gw] = pts[gw], pts[0]
    return Deployment("grid", tuple((i, Position(x, y)) for i, (x, y) in enumerate(pts)), area)


def make_deployment(kind: str, count: int, area: Area, seed: int = 0,
                    gateway: str = "corner") -> Deployment:
    if kind == "random":
        return deploy_random(count, area, seed, gateway)
    if kind == "grid":
        return deploy_grid(count, area, gateway)
    raise ConfigError(f"unknown deployment kind {kind!r}", key="deployments")


def format_placement(dep: Deployment) -> str:
    seed = "-" if dep.seed is None else str(dep.seed)
    lines = [f"# area {dep.area.width_cm!r} {dep.area.height_cm!r} kind {dep.kind} seed {seed}"]
    lines += [f"{nid} {p.x_cm!r} {p.y_cm!r}" for nid, p in dep.positions]
    return "\n".join(lines) + "\n"


def parse_placement(text: str) -> Deployment:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("# area"):
        raise ConfigError("placement file must start with '# area W H kind K seed S'")
    head = lines[0][1:].split()
    try:
        area = Area(float(head[1]), float(head[2]))
        kind = head[4]
        seed = None if head[6] == "-" else int(head[6])
    except (IndexError, ValueError):
        raise ConfigError("malformed placement header", line=1) from None
    positions = []
    for lineno, ln in enumerate(lines[1:], start=2):
        parts = ln.split()
        if len(parts) != 3:
            raise ConfigError(f"expected 'id x_cm y_cm', got {ln!r}", line=lineno)
        positions.append((int(parts[0]), Position(float(parts[1]), float(parts[2]))))
    return Deployment(kind, tuple(positions), area, seed)


def write_placement(dep: Deployment, path: str | Path) -> None:
    Path(path).write_text(format_placement(dep), encoding="utf-8")
