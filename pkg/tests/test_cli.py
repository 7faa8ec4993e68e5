import json
import subprocess
import sys

import numpy as np
import pytest

from orliczode.cli import dumps, main
from orliczode.realline import Decay, Grid, GridFunction, save_csv


def _run(tmp_path, command, cfg=None, *extra):
    argv = [command, "--out", str(tmp_path / "out")]
    if cfg is not None:
        path = tmp_path / f"{command}.cfg.json"
        path.write_text(json.dumps(cfg))
        argv += ["--config", str(path)]
    return main(argv + list(extra))


def _report(tmp_path, command):
    return json.loads((tmp_path / "out" / f"{command}.json").read_text())


def _last_stderr(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_norm_of_csv(tmp_path):
    g = Grid.uniform(40.0, 8001)
    save_csv(GridFunction.from_callable(g, lambda t: np.exp(-np.abs(t)), Decay.exponential(1.0)), tmp_path / "f.csv")
    cfg = {"function": {"csv": "f.csv"}, "n_function": {"family": "power", "p": 1}, "grid": {"radius": 40, "nodes": 8001}}
    assert _run(tmp_path, "norm", cfg) == 0
    rep = _report(tmp_path, "norm")
    assert rep["result"]["value"] == pytest.approx(2.0, abs=1e-6)
    assert rep["grid"] == {"nodes": 8001, "radius": 40.0}
    assert len(rep["config_sha256"]) == 64


def test_reports_are_byte_identical(tmp_path):
    cfg = {"q0": "1+x^2", "g": "exp(-x^2)", "grid": {"radius": 10, "nodes": 501}}
    outs = []
    for k in range(2):
        d = tmp_path / str(k)
        d.mkdir()
        assert _run(d, "green", cfg) == 0
        outs.append((d / "out" / "green.json").read_bytes())
    assert outs[0] == outs[1]


def test_contraction_rejection_exits_1(tmp_path, capsys):
    cfg = {"q0": "1", "v": "0.2*sin(y)", "g": "exp(-x^2)", "grid": {"radius": 20, "nodes": 1001}}
    assert _run(tmp_path, "solve2", cfg) == 1
    err = _last_stderr(capsys)
    assert err["exit"] == 1 and err["reason"].startswith("contraction certificate failed")


def test_solve2_success_writes_csv(tmp_path):
    cfg = {"q0": "1", "v": "0.05*sin(y)", "g": "exp(-x^2)", "grid": {"radius": 20, "nodes": 1001}}
    assert _run(tmp_path, "solve2", cfg) == 0
    res = _report(tmp_path, "solve2")["result"]
    assert res["contraction_bound"] < 1 and res["iterations"] >= 2
    assert (tmp_path / "out" / "solve2_y.csv").exists()


@pytest.mark.parametrize(
    "cfg_text, argv",
    [
        ("{not json", []),
        ("[1, 2]", []),
        ('{"grid": {"radius": 10, "nodes": 10}}', []),
        ('{"function": "foo(x)"}', []),
        ("{}", ["--grid-radius", "-1"]),
    ],
)
def test_config_errors_exit_2(tmp_path, capsys, cfg_text, argv):
    path = tmp_path / "c.json"
    path.write_text(cfg_text)
    assert main(["norm", "--config", str(path), "--out", str(tmp_path)] + argv) == 2
    assert _last_stderr(capsys)["exit"] == 2


def test_usage_error_exits_2(capsys):
    assert main(["no-such-command"]) == 2
    assert _last_stderr(capsys) == {"exit": 2, "reason": "usage error"}


def test_missing_config_file_exits_2(tmp_path):
    assert main(["norm", "--config", str(tmp_path / "absent.json")]) == 2


def test_numeric_failure_exits_3(tmp_path, capsys):
    # q0 vanishing at the window edge leaves no recessive direction
    cfg = {"q0": "max(0, 1 - x^2)", "grid": {"radius": 5, "nodes": 201}}
    assert _run(tmp_path, "green", cfg) == 3
    assert "recessive" in _last_stderr(capsys)["reason"]


def test_hypothesis_violation_exits_1(tmp_path):
    assert _run(tmp_path, "solve1", {"q": "y^3", "g": "exp(-x^2)", "grid": {"radius": 10, "nodes": 401}}) == 1


def test_geometry_and_overrides(tmp_path):
    assert _run(tmp_path, "geometry", {"q0": "4"}, "--grid-radius", "10", "--grid-nodes", "201") == 0
    rep = _report(tmp_path, "geometry")
    assert rep["grid"]["nodes"] == 201
    assert rep["result"]["A"] == pytest.approx(0.5, rel=1e-10)
    assert (tmp_path / "out" / "geometry_d.csv").exists()


def test_illposed_csv(tmp_path):
    cfg = {"radii": [20, 40], "cell": 0.1}
    assert _run(tmp_path, "illposed", cfg) == 0
    lines = (tmp_path / "out" / "illposed.csv").read_text().splitlines()
    assert lines[0] == "radius,norm_L2,norm_L1.5" and len(lines) == 3
    assert "-1/beta" in _report(tmp_path, "illposed")["result"]["header"]


@pytest.mark.slow
def test_verify_all(tmp_path):
    assert _run(tmp_path, "verify-all") == 0
    res = _report(tmp_path, "verify-all")["result"]
    assert res["all_pass"] is True
    assert set(res["suites"]) == {"luxemburg_lp", "first_order", "second_order", "illposed", "moment_equivalence"}


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "orliczode", "geometry", "--out", str(tmp_path), "--grid-radius", "5", "--grid-nodes", "101"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "geometry.json").exists()


@pytest.mark.parametrize(
    "obj, text",
    [
        (0.1, "0.10000000000000001"),
        (float("inf"), '"inf"'),
        ({"b": 1, "a": [True, None]}, '{"a": [true, null], "b": 1}'),
        (np.float64(2.0), "2"),
    ],
)
def test_dumps_formatting(obj, text):
    assert dumps(obj) == text + "\n"
