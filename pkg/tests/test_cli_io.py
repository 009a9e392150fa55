import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sqzsync import SystemParams, arnold_tongue
from sqzsync.cli import EXIT_NUMERIC, EXIT_OK, EXIT_PARAM, run
from sqzsync.io import ResultEnvelope, grid_envelope, read_csv, read_json, render_csv, write_csv, write_json


def test_grid_csv_layout(tmp_path):
    grid = arnold_tongue(SystemParams(r=0.5), (0.0, 1.0), (-1.0, 1.0), n_eps=2, n_delta=2)
    path = tmp_path / "g.csv"
    write_csv(grid_envelope(grid, {"note": "x"}), path)
    text = path.read_bytes().decode("utf-8")
    assert "\r" not in text
    lines = text.rstrip("\n").split("\n")
    comments = [ln for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if not ln.startswith("#")]
    assert body[0] == "x,y,value"
    assert len(body) == 5
    assert comments and all(": " in c for c in comments)
    env = read_csv(path)
    assert env.meta["x_name"] == "drive" and env.meta["y_name"] == "detuning"
    assert env.data["value"] == grid.values.ravel().tolist()


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=20))
def test_csv_round_trip_bit_exact(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("rt") / "v.csv"
    write_csv(ResultEnvelope({"k": 1.0 / 3}, {"value": values}), path)
    back = read_csv(path)
    assert [float(v) for v in back.data["value"]] == values
    assert back.meta["k"] == 1.0 / 3


def test_json_round_trip(tmp_path):
    env = ResultEnvelope({"M": complex(-5.0089, 0.25), "a": np.float64(0.1)}, {"x": np.array([0.1, 1e-300, 2 / 3])})
    write_json(env, tmp_path / "a.json")
    back = read_json(tmp_path / "a.json")
    assert back.data["x"] == [0.1, 1e-300, 2 / 3]
    assert back.meta["M"] == {"re": -5.0089, "im": 0.25}


def test_write_error_names_path(tmp_path):
    with pytest.raises(OSError, match="nope"):
        write_csv(ResultEnvelope({}, {"a": [1.0]}), tmp_path / "nope" / "f.csv")


# --- CLI --------------------------------------------------------------------

def test_cli_steady(tmp_path):
    out = tmp_path / "s.json"
    assert run(["steady", "--n", "0", "--r", "1.5", "--phi", "0", "--delta", "0", "--eps", "0.5", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    d = doc["data"]
    assert d["rx"][0] == pytest.approx(-0.99878, abs=1e-4)
    assert d["ry"][0] == 0
    assert d["s_max"][0] == pytest.approx(0.12485, abs=1e-5)
    assert d["phi_star"][0] == pytest.approx(math.pi, abs=1e-15)
    derived = doc["meta"]["derived"]
    assert derived["N"] == pytest.approx(4.533830, abs=1e-6)
    assert derived["M_re"] == pytest.approx(-5.008937, abs=1e-6)
    assert derived["gamma"] == pytest.approx(10.06766, abs=1e-5)
    assert derived["eps_opt"] == pytest.approx(0.5006, abs=1e-4)


def test_cli_cycle(tmp_path):
    out = tmp_path / "c.csv"
    rc = run(["cycle", "--n", "0", "--r", "1.5", "--count", "200", "--seed", "42", "--tmax", "20",
              "--dt", "0.01", "--out", str(out)])
    assert rc == 0
    env = read_csv(out)
    assert env.columns == ["path_id", "t", "theta", "phi", "x", "y"]
    t = np.array(env.data["t"])
    last = t == 20.0
    assert last.sum() == 200
    radius = np.hypot(np.array(env.data["x"])[last], np.array(env.data["y"])[last])
    assert np.max(np.abs(radius - 0.45034)) <= 1e-3
    assert env.meta["derived"]["r_s"] == pytest.approx(0.45034, abs=1e-5)


def test_cli_selftest(capsys):
    assert run(["selftest"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "FAIL" not in out and "FINDING" in out


def test_cli_parameter_error_names_flag(capsys):
    assert run(["steady", "--n", "-0.1"]) == EXIT_PARAM
    assert "--n" in capsys.readouterr().err


def test_cli_usage_error_prints_flags(capsys):
    assert run(["tongue", "--bogus"]) == EXIT_PARAM
    assert "--n-delta" in capsys.readouterr().err
    assert run([]) == EXIT_PARAM


def test_cli_numerical_failure_exit_code(tmp_path):
    # vacuum paths creep into the theta = pi guard after t ~ 30 and get flagged
    rc = run(["cycle", "--count", "5", "--tmax", "60", "--dt", "0.05", "--out", str(tmp_path / "c.csv")])
    assert rc == EXIT_NUMERIC


def test_cli_config_with_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 1.0, "r": 1.5, "eps": 0.5}))
    out = tmp_path / "o.json"
    assert run(["eopt", "--config", str(cfg), "--r", "0", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["meta"]["params"]["n"] == 1.0
    assert doc["meta"]["params"]["r"] == 0.0
    assert doc["data"]["eps_opt"][0] == pytest.approx(3 / math.sqrt(2), rel=1e-14)


def test_cli_config_unknown_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n-eps": 7}))
    assert run(["steady", "--config", str(cfg)]) == EXIT_PARAM


@pytest.mark.parametrize("cmd", [
    ["tongue", "--n", "1", "--r", "1.5", "--n-eps", "12", "--n-delta", "13"],
    ["sweep-eps", "--r", "1.5", "--n-eps", "20", "--n-phi", "16"],
    ["sweep-delta", "--eps", "0.5", "--n-delta", "21", "--n-phi", "16"],
])
def test_cli_byte_identical_across_workers(tmp_path, monkeypatch, cmd):
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    assert run(cmd + ["--workers", "1", "--out", str(a)]) == 0
    assert run(cmd + ["--workers", "3", "--out", str(b)]) == 0
    monkeypatch.setenv("SQZSYNC_WORKERS", "2")
    assert run(cmd + ["--out", str(c)]) == 0
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()


def test_cli_qfunc(tmp_path):
    out = tmp_path / "q.csv"
    assert run(["qfunc", "--eps", "0.5", "--n-theta", "19", "--n-phi", "36", "--out", str(out)]) == 0
    env = read_csv(out)
    assert len(env.data["value"]) == 19 * 36
    i = int(np.argmax(env.data["value"]))
    assert env.data["y"][i] == pytest.approx(math.pi)


def test_cli_stdout_csv(capsys):
    assert run(["eopt", "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert "eps_opt,s_max,phi_star" in out
    assert render_csv(ResultEnvelope({}, {"a": [0.1]})) == "a\n0.1\n"
