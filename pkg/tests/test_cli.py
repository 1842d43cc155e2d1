import argparse
import csv
import subprocess
import sys
from pathlib import Path

import pytest

from clbf.cli import SUBCOMMANDS, build_parser, clbf_sizing, main, parse_sweep

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def fixed_width(monkeypatch):
    monkeypatch.setenv("COLUMNS", "100")


def _subparsers(parser):
    return next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction)).choices


def test_top_level_help_golden(fixed_width):
    assert build_parser().format_help() == (GOLDEN / "help.txt").read_text()


@pytest.mark.parametrize("name", SUBCOMMANDS)
def test_subcommand_help_golden(fixed_width, name):
    sub = _subparsers(build_parser())[name]
    assert sub.format_help() == (GOLDEN / f"help-{name}.txt").read_text()


def test_parse_sweep_forms():
    assert parse_sweep("1:5:2") == [1, 3, 5]
    assert parse_sweep("0.1:0.3:0.1") == [0.1, 0.2, 0.3]
    assert parse_sweep("100,125,150") == [100, 125, 150]
    assert parse_sweep("1/5") == [0.2]
    assert parse_sweep("7") == [7]
    for bad in ("5:1:1", "1:2", "1:5:0", "x"):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_sweep(bad)


def _read(path):
    raw = Path(path).read_bytes()
    first, rest = raw.split(b"\r\n", 1)
    return first.decode(), list(csv.reader(rest.decode().splitlines()))


def test_optimize_k2_csv(tmp_path, capsys):
    out = tmp_path / "k.csv"
    assert main(["optimize-k2", "--m2", "100", "--h", "5", "--out", str(out)]) == 0
    assert "k2*=13" in capsys.readouterr().out
    config, rows = _read(out)
    assert config.startswith("# config: subcommand=optimize-k2 m2=100 h=5")
    assert rows[0] == ["k2", "expected_fp"] and len(rows) == 101


def test_fp_curve_is_reproducible(tmp_path):
    args = ["fp-curve", "--m2", "40", "--h", "3", "--r", "5", "--k2", "2:6:2", "--trials", "2000"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    config, rows = _read(a)
    assert "k2=2,4,6" in config and "seed=20240601" in config
    assert [r[0] for r in rows[1:]] == ["2", "4", "6"]


def test_other_subcommands_run(tmp_path, capsys):
    runs = [
        ["sweep-m2", "--m2", "60,80", "--h", "3", "--r", "5", "--trials", "500"],
        ["sweep-delta", "--r", "4,6", "--h", "3", "--m2", "60", "--trials", "500", "--target", "1e-3"],
        ["baseline", "--h", "1:3:1"],
        ["compress-bench", "--m2", "100", "--trials", "200"],
        ["pfail", "--tau-b", "10,100", "--lambda", "1/5", "--trials", "20000"],
        ["privacy", "--M", "1000,10000"],
    ]
    for i, argv in enumerate(runs):
        out = tmp_path / f"{i}.csv"
        assert main(argv + ["--out", str(out)]) == 0, argv
        config, rows = _read(out)
        assert config.startswith(f"# config: subcommand={argv[0]} ")
        assert len(rows) >= 2


def test_jammer_prints_verdict(tmp_path, capsys):
    out = tmp_path / "j.csv"
    assert main(["jammer", "--r", "10", "--jam", "8", "--dual", "--nodes", "24", "--seed", "1", "--out", str(out)]) == 0
    assert capsys.readouterr().out.strip() == "A8"
    assert _read(out)[1][1] == ["8", "dual", "A8"]


def test_domain_error_exits_1(tmp_path, capsys):
    out = tmp_path / "x.csv"
    assert main(["jammer", "--jam", "1", "--out", str(out)]) == 1
    assert "error" in capsys.readouterr().err
    assert main(["pfail", "--tau-b", "10", "--lambda", "1,2", "--out", str(out)]) == 1
    assert main(["fp-curve", "--m2", "10", "--h", "3", "--k2", "11", "--out", str(out)]) == 1


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["optimize-k2", "--m2", "-3", "--h", "5"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 2


def test_module_entry_point(tmp_path):
    out = tmp_path / "b.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "clbf", "baseline", "--h", "4", "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and "h=4" in proc.stdout


def test_clbf_sizing_beats_baseline_slope():
    s4, s5 = clbf_sizing(4, 10, 1, 1e-4), clbf_sizing(5, 10, 1, 1e-4)
    assert s5["bits"] >= s4["bits"]
    assert s5["delay_units"] == 5 * (s5["k1"] + s5["k2"] + 1)
