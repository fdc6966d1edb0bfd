"""Experiment configuration, parameter sweeps, aggregation and output files."""
from __future__ import annotations

import csv
import logging
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable

from .core import MAX_EXTRA_PAYLOAD_BITS, Area, ConfigError, iter_key_values, load_profiles
from .deployment import GATEWAY_PLACEMENTS, KINDS, Deployment, make_deployment
from .rng import derive_seed
from .scheduling import ALL_KINDS, TableKind, TableError, build_table
from .simulator import CsmaConfig, Scenario, Simulator, TrafficConfig
from .topology import DisconnectedTopology, Topology, build_topology

log = logging.getLogger(__name__)

DEFAULT_PAYLOAD_GRID = (0, 128, 256, 384, 512, 640, 768, 896, 1023)
DEFAULT_CHIPSETS = ("TR1001", "CC1000", "CC1010")
MAX_REDRAWS = 1000

CSV_COLUMNS = ("table", "deployment", "chipset", "extra_payload_bits", "seed", "total_energy_j",
               "delivered", "generated", "collisions", "mean_latency_frames", "dropped")


@dataclass(frozen=True)
class ExperimentSpec:
    tables: tuple[str, ...] = tuple(k.value for k in ALL_KINDS)
    deployments: tuple[str, ...] = KINDS
    chipsets: tuple[str, ...] = DEFAULT_CHIPSETS
    extra_payload_bits: tuple[int, ...] = DEFAULT_PAYLOAD_GRID
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5, 6, 7)
    master_seed: int = 2010
    duration_s: float = 1200.0
    node_count: int = 50
    area_width_cm: float = 800.0
    area_height_cm: float = 500.0
    comm_range_cm: float = 150.0
    gateway: str = "corner"
    exclude_unreachable: bool = False
    redraw_disconnected: bool = True
    slot_s: float = 0.1
    report_interval_s: float = 10.0
    downstream_interval_s: float | None = None
    payload_bytes: int = 16
    header_bytes: int = 16
    contention_window: int = 16
    micro_slot_s: float = 0.001
    max_retries: int = 5
    queue_capacity: int = 32
    profiles: str | None = None

    @property
    def area(self) -> Area:
        return Area(self.area_width_cm, self.area_height_cm)

    @property
    def traffic(self) -> TrafficConfig:
        return TrafficConfig(self.report_interval_s, self.payload_bytes, 0,
                             self.downstream_interval_s, self.header_bytes)

    @property
    def csma(self) -> CsmaConfig:
        return CsmaConfig(self.contention_window, self.micro_slot_s, self.max_retries)

    @property
    def expected_rows(self) -> int:
        return (len(self.tables) * len(self.deployments) * len(self.chipsets)
                * len(self.extra_payload_bits) * len(self.seeds))


# key -> (parser, validator or None)
def _list(conv):
    def parse(v):
        items = [x.strip() for x in v.split(",") if x.strip()]
        if not items:
            raise ValueError("empty list")
        return tuple(conv(x) for x in items)
    return parse


def _bool(v: str) -> bool:
    low = v.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _opt_float(v: str) -> float | None:
    return None if v.strip().lower() in ("none", "off", "") else float(v)


def _opt_str(v: str) -> str | None:
    return None if v.strip().lower() in ("none", "") else v.strip()


def _table_name(v: str) -> str:
    try:
        return TableKind.parse(v).value
    except TableError as exc:
        raise ValueError(str(exc)) from None


def _positive(x):
    return x > 0


_KEYS = {
    "tables": (_list(_table_name), None),
    "deployments": (_list(str.lower), lambda xs: all(x in KINDS for x in xs)),
    "chipsets": (_list(str), None),
    "extra_payload_bits": (_list(int), lambda xs: all(0 <= x <= MAX_EXTRA_PAYLOAD_BITS for x in xs)),
    "seeds": (_list(int), None),
    "master_seed": (int, None),
    "duration_s": (float, _positive),
    "node_count": (int, lambda x: x >= 2),
    "area_width_cm": (float, _positive),
    "area_height_cm": (float, _positive),
    "comm_range_cm": (float, _positive),
    "gateway": (str.lower, lambda x: x in GATEWAY_PLACEMENTS),
    "exclude_unreachable": (_bool, None),
    "redraw_disconnected": (_bool, None),
    "slot_s": (float, _positive),
    "report_interval_s": (float, _positive),
    "downstream_interval_s": (_opt_float, lambda x: x is None or x > 0),
    "payload_bytes": (int, lambda x: 0 <= x <= 127),
    "header_bytes": (int, lambda x: x >= 0),
    "contention_window": (int, lambda x: x >= 1),
    "micro_slot_s": (float, _positive),
    "max_retries": (int, lambda x: x >= 0),
    "queue_capacity": (int, lambda x: x >= 1),
    "profiles": (_opt_str, None),
}


def parse_config(text: str) -> ExperimentSpec:
    """Parse ``key = value`` lines; absent keys keep their defaults."""
    values = {}
    seen = {}
    for lineno, key, raw in iter_key_values(text):
        if key not in _KEYS:
            raise ConfigError("unknown key", key=key, line=lineno)
        if key in seen:
            raise ConfigError(f"duplicate key (first on line {seen[key]})", key=key, line=lineno)
        seen[key] = lineno
        conv, ok = _KEYS[key]
        try:
            value = conv(raw)
        except ValueError as exc:
            raise ConfigError(f"cannot parse {raw!r}: {exc}", key=key, line=lineno) from None
        if ok is not None and not ok(value):
            raise ConfigError(f"value {raw!r} out of range", key=key, line=lineno)
        values[key] = value
    return ExperimentSpec(**values)


def format_config(spec: ExperimentSpec) -> str:
    out = []
    for f in fields(spec):
        v = getattr(spec, f.name)
        if isinstance(v, tuple):
            v = ", ".join(str(x) for x in v)
        elif isinstance(v, bool):
            v = str(v).lower()
        elif v is None:
            v = "none"
        out.append(f"{f.name} = {v}")
    return "\n".join(out) + "\n"


def load_config(path: str | Path) -> ExperimentSpec:
    return parse_config(Path(path).read_text(encoding="utf-8"))


# -- dataset -------------------------------------------------------------------

@dataclass(frozen=True)
class DatasetRow:
    table: str
    deployment: str
    chipset: str
    extra_payload_bits: int
    seed: int
    total_energy_j: float
    delivered: int
    generated: int
    collisions: int
    mean_latency_frames: float | None
    dropped: int


@dataclass
class Dataset:
    rows: list[DatasetRow] = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)


def _cell(v) -> str:
    if v is None:
        return ""
    return repr(v) if isinstance(v, float) else str(v)


def dataset_to_csv(ds: Dataset) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for r in ds.rows:
        lines.append(",".join(_cell(getattr(r, c)) for c in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def write_dataset(ds: Dataset, path: str | Path) -> None:
    Path(path).write_text(dataset_to_csv(ds), encoding="utf-8")


def read_dataset(path: str | Path) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ConfigError(f"{path}: unexpected CSV header {reader.fieldnames}")
        rows = []
        for rec in reader:
            lat = rec["mean_latency_frames"]
            rows.append(DatasetRow(
                rec["table"], rec["deployment"], rec["chipset"], int(rec["extra_payload_bits"]),
                int(rec["seed"]), float(rec["total_energy_j"]), int(rec["delivered"]),
                int(rec["generated"]), int(rec["collisions"]), float(lat) if lat else None,
                int(rec["dropped"]),
            ))
    return Dataset(rows)


# -- sweep -----------------------------------------------------------------------

def scenario_topology(spec: ExperimentSpec, deployment: str, seed: int) -> tuple[Deployment, Topology]:
    """Deployment and topology shared by every table and chipset of one replicate.

    With ``redraw_disconnected`` a random placement that leaves nodes cut
    off is redrawn from the next derived seed (attempt 0, 1, ...), i.e. the
    sweep samples random deployments conditioned on connectivity.
    """
    attempt = 0
    while True:
        dep_seed = derive_seed(spec.master_seed, "deploy", deployment, seed, attempt)
        dep = make_deployment(deployment, spec.node_count, spec.area, dep_seed, spec.gateway)
        try:
            return dep, build_topology(dep, spec.comm_range_cm, 0, spec.exclude_unreachable)
        except DisconnectedTopology:
            if deployment != "random" or not spec.redraw_disconnected or attempt + 1 >= MAX_REDRAWS:
                raise
            attempt += 1


def _sort_key(spec: ExperimentSpec):
    order = {name: {v: i for i, v in enumerate(getattr(spec, name))}
             for name in ("tables", "deployments", "chipsets")}

    def key(r: DatasetRow):
        return (order["tables"][r.table], order["deployments"][r.deployment],
                order["chipsets"][r.chipset], r.extra_payload_bits, r.seed)
    return key


def _run_group(spec: ExperimentSpec, table: str, deployment: str, seed: int) -> list[DatasetRow]:
    """Simulate one (table, deployment, seed) timeline and evaluate it for every chipset and payload.

    The MAC timeline depends neither on the chipset nor on the payload size,
    so it is simulated once and re-costed; each combination is still
    validated as a full scenario first.
    """
    try:
        profiles = load_profiles(spec.profiles)
        missing = [c for c in spec.chipsets if c not in profiles]
        if missing:
            raise ConfigError(f"unknown chipset(s) {missing}; known: {sorted(profiles)}", key="chipsets")
        _, topo = scenario_topology(spec, deployment, seed)
        tbl = build_table(table)
        base = Scenario(topo, tbl, profiles[spec.chipsets[0]], spec.traffic, spec.duration_s,
                        derive_seed(spec.master_seed, "mac", table, deployment, seed),
                        spec.slot_s, spec.csma, spec.queue_capacity)
        scenarios = {}
        for chip in spec.chipsets:
            for bits in spec.extra_payload_bits:
                sc = replace(base, profile=profiles[chip],
                             traffic=replace(spec.traffic, extra_payload_bits=bits))
                sc.validate()
                scenarios[chip, bits] = sc
        timeline = Simulator(base).simulate()
    except DisconnectedTopology as exc:
        raise DisconnectedTopology(exc.unreachable, (table, deployment, seed)) from None

    rows = []
    for (chip, bits), sc in scenarios.items():
        res = timeline.evaluate(sc.profile, sc.packet_airtime())
        lat = res.mean_upstream_latency_frames
        rows.append(DatasetRow(table, deployment, chip, bits, seed, res.total_energy_j,
                               res.packets_delivered, res.packets_generated, res.collisions,
                               None if math.isnan(lat) else lat, res.dropped))
    return rows


def _run_group_args(args):
    return _run_group(*args)


def run_sweep(spec: ExperimentSpec, jobs: int = 1) -> Dataset:
    groups = [(spec, t, d, s) for t in spec.tables for d in spec.deployments for s in spec.seeds]
    rows: list[DatasetRow] = []
    if jobs <= 1:
        for g in groups:
            rows.extend(_run_group(*g))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for part in pool.map(_run_group_args, groups):
                rows.extend(part)
    rows.sort(key=_sort_key(spec))
    return Dataset(rows)


# -- aggregation and plot series -------------------------------------------------

@dataclass(frozen=True)
class SummaryRow:
    table: str
    deployment: str
    chipset: str
    extra_payload_bits: int
    runs: int
    mean_energy_j: float
    std_energy_j: float


def summarize(ds: Dataset | Iterable[DatasetRow]) -> list[SummaryRow]:
    """Mean and sample standard deviation of total energy per configuration."""
    groups: dict[tuple, list[float]] = {}
    for r in ds:
        groups.setdefault((r.table, r.deployment, r.chipset, r.extra_payload_bits), []).append(r.total_energy_j)
    if not groups:
        raise ValueError("empty dataset")
    out = []
    for key, vals in groups.items():
        std = statistics.stdev(vals) if len(vals) > 1 else 0.0
        out.append(SummaryRow(*key, len(vals), statistics.fmean(vals), std))
    return out


SUMMARY_COLUMNS = ("table", "deployment", "chipset", "extra_payload_bits", "runs",
                   "mean_energy_j", "std_energy_j")


def write_summary(summary: list[SummaryRow], path: str | Path) -> None:
    lines = [",".join(SUMMARY_COLUMNS)]
    lines += [",".join(_cell(v) for v in asdict(r).values()) for r in summary]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def series_filename(table: str, deployment: str) -> str:
    return f"{table}_{deployment}.dat"


def emit_plot_series(summary: list[SummaryRow], out_dir: str | Path) -> list[Path]:
    """One whitespace-separated file per (table, deployment), one block per chipset.

    Blocks are separated by two blank lines so gnuplot's ``index`` selects
    a chipset series.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    charts: dict[tuple[str, str], dict[str, list[SummaryRow]]] = {}
    for r in summary:
        charts.setdefault((r.table, r.deployment), {}).setdefault(r.chipset, []).append(r)
    written = []
    for (table, dep), by_chip in charts.items():
        label = TableKind.parse(table).label
        lines = [f"# Total energy vs extra payload: {label} scheduling, {dep} deployment",
                 "# columns: extra_payload_bits mean_energy_j stddev_energy_j"]
        for chip, rows in by_chip.items():
            lines += ["", "", f"# chipset {chip}"] if len(lines) > 2 else [f"# chipset {chip}"]
            for r in sorted(rows, key=lambda r: r.extra_payload_bits):
                lines.append(f"{r.extra_payload_bits} {r.mean_energy_j!r} {r.std_energy_j!r}")
        path = out_dir / series_filename(table, dep)
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(path)
    return written


def read_plot_series(path: str | Path) -> dict[str, list[tuple[int, float, float]]]:
    series: dict[str, list[tuple[int, float, float]]] = {}
    current = None
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("# chipset "):
            current = line.split()[-1]
            series[current] = []
        elif line and not line.startswith("#"):
            b, m, s = line.split()
            series[current].append((int(b), float(m), float(s)))
    return series
