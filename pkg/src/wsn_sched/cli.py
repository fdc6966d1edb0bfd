"""``wsn-sched`` command line: deploy, run, sweep, report.

Exit codes: 0 success, 1 configuration error, 2 simulation error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .core import Area, ConfigError
from .deployment import GATEWAY_PLACEMENTS, KINDS, make_deployment, write_placement
from .harness import (emit_plot_series, format_config, load_config, read_dataset, run_sweep,
                      scenario_topology, summarize, write_dataset, write_summary)
from .scheduling import TableError
from .topology import DisconnectedTopology, RoutingError, format_topology

log = logging.getLogger("wsn_sched")

EXIT_OK, EXIT_CONFIG, EXIT_SIM, EXIT_IO = 0, 1, 2, 3

RESULTS_FILE = "results.csv"
CONFIG_COPY = "experiment.cfg"


def _cmd_deploy(args) -> int:
    area = Area(args.width, args.height)
    dep = make_deployment(args.kind, args.count, area, args.seed, args.gateway)
    write_placement(dep, args.out)
    log.info("wrote %d positions to %s", dep.count, args.out)
    return EXIT_OK


def _cmd_run(args) -> int:
    spec = load_config(args.config)
    ds = run_sweep(spec, jobs=1)
    write_dataset(ds, args.out)
    log.info("wrote %d rows to %s", len(ds), args.out)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    spec = load_config(args.config)
    if args.jobs < 1:
        raise ConfigError("--jobs must be at least 1", key="jobs")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ds = run_sweep(spec, jobs=args.jobs)
    write_dataset(ds, out / RESULTS_FILE)
    # the effective spec, every key spelled out, so `report` can rebuild topologies
    (out / CONFIG_COPY).write_text(format_config(spec), encoding="utf-8")
    log.info("wrote %d rows to %s", len(ds), out / RESULTS_FILE)
    return EXIT_OK


def _cmd_report(args) -> int:
    data = Path(args.data)
    ds = read_dataset(data / RESULTS_FILE)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = summarize(ds)
    write_summary(summary, out / "summary.csv")
    files = emit_plot_series(summary, out)
    cfg = data / CONFIG_COPY
    if cfg.exists():
        spec = load_config(cfg)
        topo_dir = out / "topologies"
        topo_dir.mkdir(exist_ok=True)
        for dep in spec.deployments:
            for seed in spec.seeds:
                _, topo = scenario_topology(spec, dep, seed)
                (topo_dir / f"{dep}_seed{seed}.txt").write_text(format_topology(topo), encoding="utf-8")
    log.info("wrote %d plot series to %s", len(files), out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wsn-sched", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("deploy", help="write a node placement file")
    d.add_argument("--kind", choices=KINDS, required=True)
    d.add_argument("--count", type=int, required=True)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--out", required=True)
    d.add_argument("--width", type=float, default=800.0, help="field width in cm")
    d.add_argument("--height", type=float, default=500.0, help="field height in cm")
    d.add_argument("--gateway", choices=GATEWAY_PLACEMENTS, default="corner")
    d.set_defaults(func=_cmd_deploy)

    r = sub.add_parser("run", help="run an experiment serially and write the CSV")
    r.add_argument("--config", required=True)
    r.add_argument("--out", required=True)
    r.set_defaults(func=_cmd_run)

    s = sub.add_parser("sweep", help="run an experiment into a directory")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=_cmd_sweep)

    rep = sub.add_parser("report", help="summaries and plot series from a sweep directory")
    rep.add_argument("--data", required=True)
    rep.add_argument("--out", required=True)
    rep.set_defaults(func=_cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, TableError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DisconnectedTopology, RoutingError, ArithmeticError) as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIM
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
