import pytest

from wsn_sched.core import ConfigError
from wsn_sched.harness import (CSV_COLUMNS, DEFAULT_PAYLOAD_GRID, Dataset, DatasetRow, ExperimentSpec,
                               dataset_to_csv, emit_plot_series, format_config, parse_config,
                               read_dataset, read_plot_series, run_sweep, scenario_topology, summarize,
                               write_dataset)
from wsn_sched.topology import DisconnectedTopology

SMALL = "tables = x, leon4x4_crossed_shifted\nseeds = 1, 2, 3\nextra_payload_bits = 0, 512, 1023\nduration_s = 30\n"


@pytest.fixture(scope="module")
def small_spec():
    return parse_config(SMALL)


@pytest.fixture(scope="module")
def small_ds(small_spec):
    return run_sweep(small_spec)


def test_empty_config_is_default():
    spec = parse_config("")
    assert spec == ExperimentSpec()
    assert (spec.node_count, spec.area_width_cm, spec.area_height_cm, spec.duration_s) == (50, 800, 500, 1200)
    assert len(spec.seeds) == 7 and len(spec.tables) == 6 and spec.deployments == ("random", "grid")
    assert spec.extra_payload_bits == DEFAULT_PAYLOAD_GRID and DEFAULT_PAYLOAD_GRID[-1] == 1023
    assert spec.expected_rows == 6 * 2 * 3 * 9 * 7 == 2268


def test_config_examples():
    assert parse_config("extra_payload_bits = 0,1023").extra_payload_bits == (0, 1023)
    assert parse_config("tables = V(9x9), X").tables == ("v9x9", "x")
    with pytest.raises(ConfigError) as e:
        parse_config("node_count = 1")
    assert e.value.key == "node_count" and e.value.line == 1


@pytest.mark.parametrize("text,key,line", [
    ("# comment\ncolour = blue", "colour", 2),
    ("seeds = 1\nextra_payload_bits = 0, 2000", "extra_payload_bits", 2),
    ("duration_s = soon", "duration_s", 1),
    ("seeds = 1\nseeds = 2", "seeds", 2),
    ("tables = y", "tables", 1),
])
def test_config_errors_name_key_and_line(text, key, line):
    with pytest.raises(ConfigError) as e:
        parse_config(text)
    assert (e.value.key, e.value.line) == (key, line)
    assert key in str(e.value)


def test_malformed_line():
    with pytest.raises(ConfigError):
        parse_config("just words")


def test_format_config_round_trip(small_spec):
    assert parse_config(format_config(small_spec)) == small_spec
    assert parse_config(format_config(ExperimentSpec())) == ExperimentSpec()


def test_cardinality_and_order(small_spec, small_ds):
    assert len(small_ds) == small_spec.expected_rows == 2 * 2 * 3 * 3 * 3
    keys = [(r.table, r.deployment, r.chipset, r.extra_payload_bits, r.seed) for r in small_ds]
    assert len(set(keys)) == len(keys)


def test_sweep_is_deterministic_and_parallel_invariant(small_spec, small_ds):
    assert dataset_to_csv(run_sweep(small_spec)) == dataset_to_csv(small_ds)
    assert dataset_to_csv(run_sweep(small_spec, jobs=3)) == dataset_to_csv(small_ds)


def test_timeline_shared_across_chipsets(small_ds):
    by = {}
    for r in small_ds:
        by.setdefault((r.table, r.deployment, r.extra_payload_bits, r.seed), {})[r.chipset] = r
    for rows in by.values():
        a, b = rows["TR1001"], rows["CC1010"]
        assert (a.delivered, a.collisions, a.generated, a.dropped) == (b.delivered, b.collisions, b.generated, b.dropped)
        assert a.total_energy_j < rows["CC1000"].total_energy_j < b.total_energy_j


def test_topology_shared_across_tables(small_spec):
    a = scenario_topology(small_spec, "random", 2)
    assert a == scenario_topology(small_spec, "random", 2)
    assert a[0] != scenario_topology(small_spec, "random", 3)[0]


def test_adding_seeds_keeps_existing_rows(small_spec, small_ds):
    from dataclasses import replace
    bigger = run_sweep(replace(small_spec, seeds=(1, 2, 3, 4), tables=("x",)))
    old = {r for r in small_ds if r.table == "x"}
    assert old <= set(bigger.rows)


def test_disconnected_topology_names_the_tuple():
    spec = parse_config("deployments = grid\ncomm_range_cm = 10\nseeds = 1\ntables = v\n"
                         "extra_payload_bits = 0\nduration_s = 10")
    with pytest.raises(DisconnectedTopology) as e:
        run_sweep(spec)
    assert e.value.tuple == ("v", "grid", 1)


def test_redraw_gives_connected_random_topologies():
    spec = ExperimentSpec()
    for seed in spec.seeds:
        _, topo = scenario_topology(spec, "random", seed)
        assert len(topo.nodes) == 50 and not topo.excluded


def test_unknown_chipset_is_config_error():
    with pytest.raises(ConfigError):
        run_sweep(parse_config("chipsets = TR1001, NOPE\ntables = v\nseeds = 1\nduration_s = 10"))


def test_csv_round_trip(tmp_path, small_ds):
    path = tmp_path / "r.csv"
    write_dataset(small_ds, path)
    assert path.read_text().splitlines()[0] == ",".join(CSV_COLUMNS)
    assert read_dataset(path) == small_ds


def test_csv_round_trip_empty_latency(tmp_path):
    ds = Dataset([DatasetRow("x", "grid", "TR1001", 0, 1, 0.1 + 0.2, 0, 3, 0, None, 3)])
    write_dataset(ds, tmp_path / "r.csv")
    assert read_dataset(tmp_path / "r.csv") == ds


def _row(seed, e, chip="TR1001", bits=0):
    return DatasetRow("x", "grid", chip, bits, seed, e, 1, 1, 0, 1.0, 0)


def test_summarize_textbook():
    (s,) = summarize(Dataset([_row(1, 1.0), _row(2, 2.0), _row(3, 3.0)]))
    assert (s.mean_energy_j, s.std_energy_j, s.runs) == (2.0, 1.0, 3)
    (s,) = summarize(Dataset([_row(i, 0.7) for i in range(7)]))
    assert s.mean_energy_j == pytest.approx(0.7, abs=1e-15) and s.std_energy_j == 0.0
    with pytest.raises(ValueError):
        summarize(Dataset())


def test_summary_group_count(small_spec, small_ds):
    assert len(summarize(small_ds)) == len(small_ds) // len(small_spec.seeds)


def test_plot_series_match_summary(tmp_path, small_spec, small_ds):
    summary = summarize(small_ds)
    files = emit_plot_series(summary, tmp_path)
    assert sorted(f.name for f in files) == sorted(
        f"{t}_{d}.dat" for t in small_spec.tables for d in small_spec.deployments)
    lookup = {(s.table, s.deployment, s.chipset, s.extra_payload_bits): s for s in summary}
    for f in files:
        table, dep = f.stem.rsplit("_", 1)
        series = read_plot_series(f)
        assert list(series) == list(small_spec.chipsets)
        for chip, points in series.items():
            assert [p[0] for p in points] == list(small_spec.extra_payload_bits)
            for bits, mean, std in points:
                s = lookup[table, dep, chip, bits]
                assert (mean, std) == (s.mean_energy_j, s.std_energy_j)


def test_plot_output_unwritable(tmp_path, small_ds):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError):
        emit_plot_series(summarize(small_ds), blocker / "sub")
