import csv
import io
import json

import pytest

from polyakov.cli import run


def _run(tmp_path, *argv):
    out = tmp_path / "out.txt"
    code = run([*argv, "--out", str(out)])
    return code, out.read_text() if out.exists() else None


def test_spectrum_artifact(tmp_path):
    code, text = _run(tmp_path, "spectrum", "--cutoff", "4", "--seed", "7")
    assert code == 0
    doc = json.loads(text)
    assert doc["command"] == "spectrum" and doc["config"]["seed"] == 7
    assert doc["flags"]["certified"] is True
    classes = doc["result"]["spectrum"]["classes"]
    assert classes[0]["multiplicity"] == 24


def test_spectrum_csv(tmp_path):
    code, text = _run(tmp_path, "spectrum", "--cutoff", "4", "--format", "csv")
    rows = list(csv.reader(io.StringIO(text)))
    assert code == 0 and len(rows) >= 2


def test_uncertified_spectrum_flags(tmp_path):
    code, text = _run(tmp_path, "spectrum", "--cutoff", "6", "--word-limit", "2")
    assert code == 3
    assert json.loads(text)["flags"]["certified"] is False


def test_invalid_inputs(tmp_path, capsys):
    assert run(["zeta", "--s", "0.5"]) == 2
    assert run(["spectrum", "--no-such-flag"]) == 2
    assert run(["spectrum", "--config", str(tmp_path / "missing.toml")]) == 2
    assert run(["frobnicate"]) == 2


def test_config_file(tmp_path):
    cfg = tmp_path / "g.toml"
    cfg.write_text('model = "bolza"\n')
    code, text = _run(tmp_path, "zeta", "--config", str(cfg), "--cutoff", "4", "--s", "2,3")
    doc = json.loads(text)
    assert code == 0 and doc["config"]["group"]["model"] == "bolza"
    vals = [r["Z_trunc"] for r in doc["result"]["values"]]
    assert vals[0] < vals[1] < 1


def test_bundles_negative_range(tmp_path):
    code, text = _run(tmp_path, "bundles", "--mumford-table", "-3..4")
    table = json.loads(text)["result"]["mumford_table"]
    assert code == 0 and [r["n"] for r in table] == list(range(-3, 5))
    assert {r["n"]: r["exponent"] for r in table}[2] == 13


def test_covers_and_vaut(tmp_path):
    code, text = _run(tmp_path, "covers", "--index", "2")
    assert code == 0 and json.loads(text)["result"]["based_count"] == 15
    code, text = _run(tmp_path, "vaut", "--index", "2")
    assert code == 0 and json.loads(text)["result"]["all_passed"]


def test_torus_commands(tmp_path):
    code, text = _run(tmp_path, "mesh-det", "--tau", "0,2", "--grid", "16")
    assert code == 0 and json.loads(text)["result"]["zero_modes"] == 1
    code, text = _run(tmp_path, "gaussian-check", "--dim", "2", "--samples", "2000", "--seed", "3")
    assert code == 0 and len(json.loads(text)["result"]["eigenvalues"]) == 2


def test_reruns_identical(tmp_path):
    a = _run(tmp_path, "bundles", "--format", "csv")[1]
    b = _run(tmp_path, "bundles", "--format", "csv", "--threads", "4")[1]
    assert a == b
