"""Small scenario builders shared by the simulator-facing tests."""
from wsn_sched.scheduling import build_table
from wsn_sched.simulator import Scenario, Simulator, TrafficConfig
from wsn_sched.topology import line_topology


def single_packet_run(kind, origin, n_zones=None, frames=None, profile=None, record=True):
    """One packet, created at t=0 in zone ``origin`` of a line, nothing else on air."""
    from wsn_sched.core import load_profiles
    table = build_table(kind)
    n_zones = n_zones or origin
    frames = frames or (origin + 2) * 2
    traffic = TrafficConfig(report_interval_s=1e9, sources=frozenset({origin}), jitter=False)
    sc = Scenario(line_topology(n_zones), table, profile or load_profiles()["TR1001"], traffic,
                  duration_s=round(frames * table.slots_per_frame * 0.1, 9), seed=1)
    sim = Simulator(sc, record_events=record, check_slots=True)
    sim.simulate()
    return sim


ACCEPTANCE_LINES: list[str] = []


class criterion:
    """Context manager recording one PASS/FAIL line for an acceptance criterion."""

    def __init__(self, number: int, title: str):
        self.number, self.title = number, title
        self.detail = ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        note = self.detail if exc_type is None else f"{exc_type.__name__}: {exc}".splitlines()[0]
        line = f"criterion {self.number} [{status}] {self.title}" + (f" -- {note}" if note else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return False
