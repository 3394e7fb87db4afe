import csv
import subprocess
import sys

import pytest

from flcboot import ConfigError
from flcboot.cli import DIAGNOSTIC_HEADER, main
from flcboot.config import SCHEMA_TEXT, MethodSpec, load_config, parse_config
from flcboot.flctest import Method
from flcboot.harness import CSV_HEADER, read_csv

BASIC = """
schema = 1
replicates = 12
seed = 7
output = "out.csv"

[[scenario]]
setting = "S1"
n = 10
m = [3, 5]
D = [[0.0, 0.0], [0.0, 0.0]]
error = ["normal", "student"]

[[method]]
name = "FLC"

[[method]]
name = "BT"
B = 19
"""


def write(tmp_path, text, name="c.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_parse_expands_grid():
    cfg = parse_config(BASIC)
    assert len(cfg.scenarios) == 4
    assert {(s.cluster_size, s.error.tag.value) for s in cfg.scenarios} == {
        (3, "normal"), (3, "student"), (5, "normal"), (5, "student")}
    assert [m.method for m in cfg.methods] == [Method.FLC, Method.BT]
    assert cfg.replicates == 12 and cfg.seed == 7 and cfg.alpha == 0.05


def test_schema_text_parses():
    # the documented grammar is itself a valid config
    cfg = parse_config(SCHEMA_TEXT)
    assert cfg.scenarios[0].D_label() == "D2"
    assert cfg.methods[0].method is Method.FDB


@pytest.mark.parametrize("text", [
    BASIC.replace("schema = 1", "schema = 2"),
    BASIC.replace("schema = 1", ""),
    BASIC + "\nbogus = 3\n",
    BASIC.replace('name = "BT"', 'name = "LRT"'),
    BASIC.replace('setting = "S1"', 'setting = "S9"'),
    BASIC.replace("n = 10", "n = 10\ncolour = 1"),
    BASIC.replace("replicates = 12", "replicates = 0"),
    BASIC.replace("seed = 7", "seed = 7\nalpha = 1.5"),
    BASIC.replace("B = 19", "B = 0"),
    BASIC.replace("n = 10", "n = 10.5"),
    BASIC.replace('error = ["normal", "student"]', 'error = "cauchy"'),
    BASIC.replace("D = [[0.0, 0.0], [0.0, 0.0]]", "D = [[1.0, 2.0], [2.0, 1.0]]"),
    "schema = 1\n[[scenario\n",
])
def test_bad_configs(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_mn_validation():
    assert MethodSpec("BT_MN", mn="auto").mn == "auto"
    with pytest.raises(ConfigError):
        MethodSpec("BT_MN")
    with pytest.raises(ConfigError):
        MethodSpec("BT_MN", mn=0)
    with pytest.raises(ConfigError):
        parse_config(BASIC.replace('name = "BT"', 'name = "BT_MN"\nmn = 500'))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.toml")


def test_cli_run(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("FLCBOOT_WORKERS", raising=False)
    path = write(tmp_path, BASIC)
    assert main(["run", "--config", str(path), "--replicates", "6", "--out", "r.csv", "--B", "9"]) == 0
    rows = read_csv(tmp_path / "r.csv")
    assert len(rows) == 8 and all(r.replicates == 6 for r in rows)
    assert "wrote 8 rows" in capsys.readouterr().out


def test_cli_run_reproducible_over_workers(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    path = write(tmp_path, BASIC)
    main(["run", "--config", str(path), "--out", "a.csv", "--workers", "1"])
    monkeypatch.setenv("FLCBOOT_WORKERS", "3")
    main(["run", "--config", str(path), "--out", "b.csv"])
    drop_time = lambda p: [(r.key, r.reject_pct, r.replicates, r.failures) for r in read_csv(p)]
    assert drop_time(tmp_path / "a.csv") == drop_time(tmp_path / "b.csv")


def test_cli_config_error(tmp_path, capsys):
    path = write(tmp_path, BASIC + "\nbogus = 1\n")
    assert main(["run", "--config", str(path)]) == 2
    err = capsys.readouterr().err.strip()
    assert err.startswith("flcboot: config error:") and "\n" not in err
    assert main(["run", "--config", str(tmp_path / "missing.toml")]) == 2


def test_cli_io_error(tmp_path, capsys):
    path = write(tmp_path, BASIC)
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "no" / "dir.csv")]) == 3
    assert capsys.readouterr().err.startswith("flcboot: io error:")


def test_cli_print_schema(capsys):
    assert main(["print-schema"]) == 0
    assert capsys.readouterr().out == SCHEMA_TEXT


def test_cli_diagnose(tmp_path):
    text = """
schema = 1
seed = 3
[[scenario]]
setting = "S2"
n = 7
m = 10
D = [[0.0, 0.0], [0.0, 0.0]]
error = "student"
[[method]]
name = "FDB"
B = 29
[[method]]
name = "DB"
B = 9
B2 = 5
"""
    path = write(tmp_path, text)
    out = tmp_path / "d.csv"
    assert main(["diagnose-fdb", "--config", str(path), "--mc-reps", "4", "--datasets", "2", "--out", str(out)]) == 0
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == DIAGNOSTIC_HEADER
    assert len(rows) == 8
    assert all(row["p_db"] != "" for row in rows)
    assert main(["diagnose-fdb", "--config", str(path), "--mc-reps", "0"]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "flcboot", "print-schema"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == SCHEMA_TEXT
    proc = subprocess.run([sys.executable, "-m", "flcboot", "run"], capture_output=True, text=True)
    assert proc.returncode != 0


def test_header_matches_documented_columns():
    assert ",".join(CSV_HEADER) == (
        "setting,D_label,n,m,error,method,reject_pct,mc_halfwidth_pct,mean_time_s,replicates,failures")
