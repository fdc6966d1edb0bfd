import subprocess
import sys

from wsn_sched.cli import main
from wsn_sched.deployment import parse_placement
from wsn_sched.harness import read_dataset

CFG = "tables = v\nseeds = 1, 2\nextra_payload_bits = 0, 1023\nduration_s = 20\n"


def test_deploy(tmp_path):
    out = tmp_path / "p.txt"
    assert main(["deploy", "--kind", "random", "--count", "12", "--seed", "4", "--out", str(out)]) == 0
    dep = parse_placement(out.read_text())
    assert dep.count == 12 and dep.seed == 4
    assert main(["deploy", "--kind", "grid", "--count", "1", "--out", str(out)]) == 1


def test_run_sweep_report(tmp_path):
    cfg = tmp_path / "e.cfg"
    cfg.write_text(CFG)
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "one.csv")]) == 0
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "d"), "--jobs", "2"]) == 0
    assert (tmp_path / "one.csv").read_bytes() == (tmp_path / "d" / "results.csv").read_bytes()
    assert len(read_dataset(tmp_path / "one.csv")) == 1 * 2 * 3 * 2 * 2
    assert main(["report", "--data", str(tmp_path / "d"), "--out", str(tmp_path / "r")]) == 0
    names = sorted(p.name for p in (tmp_path / "r").glob("*.dat"))
    assert names == ["v_grid.dat", "v_random.dat"]
    assert (tmp_path / "r" / "summary.csv").exists()
    assert len(list((tmp_path / "r" / "topologies").iterdir())) == 4


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert main(["run", "--config", str(bad), "--out", str(tmp_path / "x.csv")]) == 1
    assert main(["run", "--config", str(tmp_path / "missing.cfg"), "--out", str(tmp_path / "x.csv")]) == 3
    cut = tmp_path / "cut.cfg"
    cut.write_text("deployments = grid\ncomm_range_cm = 10\ntables = v\nseeds = 1\nduration_s = 10\n")
    assert main(["run", "--config", str(cut), "--out", str(tmp_path / "x.csv")]) == 2
    assert main(["report", "--data", str(tmp_path / "nowhere"), "--out", str(tmp_path / "r")]) == 3
    good = tmp_path / "good.cfg"
    good.write_text(CFG)
    assert main(["sweep", "--config", str(good), "--out", str(tmp_path / "d"), "--jobs", "0"]) == 1


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "wsn_sched.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "sweep" in proc.stdout
