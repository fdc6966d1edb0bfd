"""Discrete-event simulator and experiment harness for time-zone scheduled sensor networks."""
from .core import (Area, ChipsetProfile, ConfigError, Direction, EnergyAccount, Packet, Position,
                   RadioState, accumulate, airtime, load_profiles, packet_bits, power_draw)
from .deployment import Deployment, deploy_grid, deploy_random, make_deployment
from .harness import (Dataset, DatasetRow, ExperimentSpec, emit_plot_series, parse_config,
                      read_dataset, run_sweep, summarize, write_dataset)
from .rng import SplitMix64, derive_seed
from .scheduling import (SchedulingTable, SlotAction, TableError, TableKind, build_table, slot_action,
                         uncontended_latency_frames, validate_table, zones_per_frame)
from .simulator import CsmaConfig, RunResult, Scenario, Simulator, TrafficConfig, run, simulate
from .topology import DisconnectedTopology, Topology, build_topology, line_topology

__version__ = "0.1.0"

__all__ = [
    "Area", "ChipsetProfile", "ConfigError", "Direction", "EnergyAccount", "Packet", "Position",
    "RadioState", "accumulate", "airtime", "load_profiles", "packet_bits", "power_draw",
    "Deployment", "deploy_grid", "deploy_random", "make_deployment",
    "Dataset", "DatasetRow", "ExperimentSpec", "emit_plot_series", "parse_config",
    "read_dataset", "run_sweep", "summarize", "write_dataset",
    "SplitMix64", "derive_seed",
    "SchedulingTable", "SlotAction", "TableError", "TableKind", "build_table", "slot_action",
    "uncontended_latency_frames", "validate_table", "zones_per_frame",
    "CsmaConfig", "RunResult", "Scenario", "Simulator", "TrafficConfig", "run", "simulate",
    "DisconnectedTopology", "Topology", "build_topology", "line_topology",
]
