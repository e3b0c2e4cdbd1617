import io
import json
import os
import subprocess
import sys

import pytest

from anisocap.cli import main


def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


@pytest.fixture(scope="module")
def square_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("sets") / "square.json"
    code, _ = run(["generate", "box", "--lo", "-1", "--hi", "1", "--extent", "32", "--output", str(path)])
    assert code == 0
    return path


@pytest.fixture(scope="module")
def small_condenser(tmp_path_factory):
    path = tmp_path_factory.mktemp("sets") / "diamond16.json"
    run(["generate", "ball", "--body", "diamond", "--radius", "0.5", "--extent", "16", "--output", str(path)])
    return path


def _table_numbers(text):
    vals = {}
    for line in text.splitlines():
        parts = line.split()
        if len(parts) == 2:
            try:
                vals[parts[0]] = float(parts[1])
            except ValueError:
                pass
    return vals


def test_bodies_info():
    code, out = run(["bodies", "--name", "square", "--info"])
    assert code == 0
    assert _table_numbers(out)["volume"] == 4.0
    assert "vertices" in out and "-1  -1" in out
    code, out = run(["bodies", "--name", "square", "--info", "--json"])
    d = json.loads(out)
    assert d["volume"] == 4 and len(d["vertices"]) == 4


def test_bodies_list():
    code, out = run(["bodies"])
    assert code == 0 and "hexagon" in out.split()


def test_perimeter_json_fields(square_file):
    code, out = run(["perimeter", "--set", str(square_file), "--body", "square", "--alpha", "0.5", "--json"])
    assert code == 0
    d = json.loads(out)
    assert {"value", "truncation_bound"} <= set(d)
    assert d["value"] > 0 and d["truncation_bound"] == 0


def test_table_and_json_agree(square_file):
    argv = ["perimeter", "--set", str(square_file), "--body", "hexagon", "--alpha", "0.3"]
    _, table = run(argv)
    _, js = run(argv + ["--json"])
    d = json.loads(js)
    nums = _table_numbers(table)
    for key in ("value", "truncation_bound", "alpha", "isoperimetric_deficit"):
        assert nums[key] == d[key]


def test_inputs_not_mutated(square_file, tmp_path):
    before = square_file.read_bytes()
    stamp = os.stat(square_file).st_mtime_ns
    run(["perimeter", "--set", str(square_file), "--alpha", "0.5", "--output", str(tmp_path / "o.json")])
    assert square_file.read_bytes() == before and os.stat(square_file).st_mtime_ns == stamp
    assert json.loads((tmp_path / "o.json").read_text())["alpha"] == 0.5


def test_unknown_flag_exits_2(square_file):
    assert run(["perimeter", "--set", str(square_file), "--bogus"])[0] == 2
    assert run(["frobnicate"])[0] == 2
    assert run([])[0] == 2


def test_bad_values_exit_2(square_file, capsys):
    assert run(["perimeter", "--set", str(square_file), "--alpha", "1.5"])[0] == 2
    assert "alphas" in capsys.readouterr().err
    assert run(["perimeter", "--set", "no_such_file.json"])[0] == 2
    assert run(["perimeter", "--set", str(square_file), "--body", "dodecahedron"])[0] == 2


def test_malformed_config_names_key(square_file, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"alphas": [0.5], "near_radius": 0}))
    assert run(["perimeter", "--set", str(square_file), "--config", str(cfg)])[0] == 2
    assert "near_radius" in capsys.readouterr().err
    cfg.write_text(json.dumps({"wibble": 3}))
    assert run(["verify", "--config", str(cfg)])[0] == 2
    assert "wibble" in capsys.readouterr().err


def test_config_values_used(square_file, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"alphas": [0.25], "body": "diamond"}))
    d = json.loads(run(["perimeter", "--set", str(square_file), "--config", str(cfg), "--json"])[1])
    assert d["alpha"] == 0.25 and d["body"] == "diamond"
    # explicit flags win
    d = json.loads(run(["perimeter", "--set", str(square_file), "--config", str(cfg), "--alpha", "0.6",
                        "--json"])[1])
    assert d["alpha"] == 0.6


def test_capacity_with_oracle(small_condenser):
    code, out = run(["capacity", "--set", str(small_condenser), "--body", "square", "--alpha", "0.5",
                     "--oracle", "--json"])
    assert code == 0
    d = json.loads(out)
    assert d["oracle_rel_diff"] < 1e-6
    assert {"iso_deficit", "gamma_lower"} <= set(d["bounds"]) and d["bounds"]["iso_deficit"] >= -1e-3
    assert d["optimal_set_rle"]


def test_capacity_first_order(small_condenser):
    d = json.loads(run(["capacity", "--set", str(small_condenser), "--mode", "first-order", "--json"])[1])
    assert d["value"] == pytest.approx(2 * 0.5 * 16)  # 2 P(0.5 diamond, Z1 square)


def test_function_file_seminorm(tmp_path):
    f = tmp_path / "tent.json"
    run(["generate", "tent", "--radius", "1", "--levels", "3", "--extent", "24", "--output", str(f)])
    d = json.loads(run(["perimeter", "--set", str(f), "--alpha", "0.4", "--json"])[1])
    assert d["value"] > 0 and "function_label" in d
    assert run(["capacity", "--set", str(f)])[0] == 2


def test_limits_subcommand(square_file):
    code, out = run(["limits", "--set", str(square_file), "--body", "square", "--limit", "0", "--json"])
    assert code == 0
    d = json.loads(out)
    assert d["alpha_to_0"]["target"] == 32
    assert d["alpha_to_0"]["rel_error"] < 0.15


def test_perimeter_limit_flag(square_file):
    d = json.loads(run(["perimeter", "--set", str(square_file), "--limit", "1", "--json"])[1])
    assert d["target"] == pytest.approx(24.0) and d["alphas"] == [0.8, 0.9, 0.95]


def test_verify_outputs(tmp_path):
    js, cs = tmp_path / "r.json", tmp_path / "r.csv"
    code, out = run(["verify", "--suite", "geometry", "--output", str(js), "--csv", str(cs)])
    assert code == 0 and "geometry" in out and "overall: pass" in out
    doc = json.loads(js.read_text())
    assert list(doc["suites"]) == ["geometry"]
    assert len(cs.read_text().splitlines()) == 1 + doc["suites"]["geometry"]["n_instances"]


def test_verify_failure_exit_1():
    code, out = run(["verify", "--suite", "coarea", "--tolerance", "0", "--json"])
    assert code == 1
    assert json.loads(out)["passed"] is False


def test_seed_controls_randomness():
    a = json.loads(run(["verify", "--suite", "geometry", "--seed", "1", "--json"])[1])
    b = json.loads(run(["verify", "--suite", "geometry", "--seed", "1", "--json"])[1])
    c = json.loads(run(["verify", "--suite", "geometry", "--seed", "2", "--json"])[1])
    assert a == b and a != c


def test_help_exits_zero():
    assert run(["--help"])[0] == 0


def test_module_entry_point(square_file):
    proc = subprocess.run([sys.executable, "-m", "anisocap.cli", "bodies", "--name", "diamond", "--info", "--json"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["volume"] == 2
