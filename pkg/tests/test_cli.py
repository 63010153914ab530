import csv
import json
import subprocess
import sys

import pytest

from ssrsim.bundled import bundled_protocol
from ssrsim.cli import main
from ssrsim.compiler import compile_to_uworld, random_uworld_cheat
from ssrsim.io import dumps, protocol_to_data, strategy_to_data
from ssrsim.linalg import rng_for


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_props(capsys):
    code, out, err = run(["verify-props", "--group", "s3", "--trials", "50", "--seed", "7"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["passed"] and rep["max_residual"] <= 1e-10
    assert rep["schema_version"] == 1 and rep["command"] == "verify-props"
    assert "max residual" in err


def test_unknown_group_is_usage_error(capsys):
    code, _, err = run(["verify-props", "--group", "nosuch"], capsys)
    assert code == 2 and "nosuch" in err


def test_bad_flag_is_usage_error(capsys):
    assert run(["p1-sweep", "--frobnicate"], capsys)[0] == 2
    assert run([], capsys)[0] == 2


def test_p1_sweep_csv(tmp_path, capsys):
    path = tmp_path / "p1.csv"
    code, _, _ = run(["p1-sweep", "--n-min", "1", "--n-max", "64", "--out", str(path), "--no-timestamp"], capsys)
    assert code == 0
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == 64
    assert list(rows[0]) == ["N", "p1_simulated", "p1_formula", "abs_error", "oracle_abs_error"]
    assert max(float(r["abs_error"]) for r in rows) <= 1e-12


def test_timestamp_line_is_optional(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(["p1-sweep", "--n-max", "4", "--out", str(a)], capsys)
    run(["p1-sweep", "--n-max", "4", "--out", str(b), "--no-timestamp"], capsys)
    lines = a.read_text().splitlines()
    assert lines[0].startswith("# ")
    assert lines[1:] == b.read_text().splitlines()


@pytest.mark.parametrize(
    "argv",
    [
        ["verify-props", "--group", "q8", "--trials", "3"],
        ["bitcommit", "--system", "z3", "--trials", "5"],
        ["datahide", "--samples", "20", "--n-max", "6"],
        ["simulate", "--protocol", "u1-coherence", "--cheat", "random", "--party", "B"],
        ["fusion-table", "--system", "octet"],
    ],
)
def test_reruns_are_byte_identical(argv, capsys):
    argv = argv + ["--seed", "11", "--no-timestamp"]
    code1, out1, _ = run(argv, capsys)
    code2, out2, _ = run(argv, capsys)
    assert code1 == code2 == 0
    assert out1 == out2


def test_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("SSRSIM_SEED", "5")
    _, out, _ = run(["verify-props", "--group", "z2", "--trials", "2", "--no-timestamp"], capsys)
    assert json.loads(out)["seed"] == 5
    monkeypatch.setenv("SSRSIM_SEED", "five")
    assert run(["verify-props", "--group", "z2", "--trials", "2"], capsys)[0] == 2


def test_bitcommit_report(capsys):
    code, out, _ = run(["bitcommit", "--system", "su2:1", "--trials", "10"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["su2_plain_overlap"] <= 1e-10
    assert rep["su2_compensated_overlap"] >= 1 - 1e-10


def test_datahide_csv(capsys):
    code, out, _ = run(["datahide", "--instance", "u1", "--samples", "200", "--n-max", "5", "--format", "csv",
                        "--no-timestamp"], capsys)
    assert code == 0
    rows = list(csv.reader(out.splitlines()))
    assert rows[0] == ["N", "success", "oracle", "abs_error"]
    assert float(rows[1][1]) == pytest.approx(0.5, abs=1e-12)


def test_simulate_from_files(tmp_path, capsys):
    p = bundled_protocol("bitcommit-su2")
    c = compile_to_uworld(p)
    proto = tmp_path / "p.json"
    proto.write_text(dumps(protocol_to_data(p)))
    cheat = tmp_path / "cheat.json"
    cheat.write_text(dumps(strategy_to_data(random_uworld_cheat(c, "A", rng_for(2), private_dim=2), c.target)))
    code, out, _ = run(["simulate", "--protocol", str(proto), "--cheat", str(cheat), "--no-timestamp"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["honest_deviation"] <= 1e-12 and rep["deviation"] <= 1e-10
    assert rep["honest_party"] == "B"
    assert abs(rep["abort_uworld"] - rep["abort_iworld"]) <= 1e-10
    assert len(rep["outcomes"]) == 2


def test_simulate_malformed_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema_version": 1,\n "charge_system": "z2",\n "rounds": "one"}')
    code, _, err = run(["simulate", "--protocol", str(bad)], capsys)
    assert code == 2 and "rounds" in err
    bad.write_text("{\n  oops\n}")
    code, _, err = run(["simulate", "--protocol", str(bad)], capsys)
    assert code == 2 and "line 2" in err


def test_simulate_missing_file(capsys):
    assert run(["simulate", "--protocol", "no-such-file.json"], capsys)[0] == 2


def test_fusion_table(capsys):
    code, out, _ = run(["fusion-table", "--system", "su2:1/2", "--no-timestamp"], capsys)
    assert code == 0
    rows = list(csv.reader(out.splitlines()))
    assert ["1/2", "1/2", "0", "1"] in rows and ["1/2", "1/2", "1", "0"] not in rows


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "ssrsim.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "0.1.0" in res.stdout
