import csv
import json

import jsonschema
import pytest

from anisocap import lab
from anisocap.config import ConfigError, RunConfig
from anisocap.report import REPORT_SCHEMA, SUITE_SCHEMA, ReportError, emit_report, to_csv, to_json


def test_config_round_trip(tmp_path):
    cfg = RunConfig(body="hexagon", alphas=[0.1, 0.35], betas=[1.0], trunc_radius=1.5, seed=9,
                    tolerance=1e-6, suites=["geometry"])
    assert RunConfig.from_dict(json.loads(cfg.to_json())) == cfg
    path = tmp_path / "cfg.json"
    path.write_text(cfg.to_json())
    assert RunConfig.load(path) == cfg


@pytest.mark.parametrize("bad, key", [
    ({"alphas": [1.2]}, "alphas"), ({"betas": [0]}, "betas"), ({"extent": 1}, "extent"),
    ({"half_width": -1}, "half_width"), ({"pad": 0}, "pad"), ({"near_radius": 0}, "near_radius"),
    ({"subdiv": 0}, "subdiv"), ({"trunc_radius": 0}, "trunc_radius"), ({"tolerance": -1}, "tolerance"),
    ({"suites": "geometry"}, "suites"), ({"colour": 1}, "colour"),
])
def test_config_errors_name_the_key(bad, key):
    with pytest.raises(ConfigError, match=key):
        RunConfig.from_dict(bad)


def test_config_not_json(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{oops")
    with pytest.raises(ConfigError, match="not valid JSON"):
        RunConfig.load(p)


@pytest.fixture(scope="module")
def report():
    return lab.run_all(RunConfig(suites=["geometry", "coarea"]))


def test_json_is_byte_identical(tmp_path, report):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    emit_report(report, a)
    emit_report(report, b)
    emit_report(report, b)
    assert a.read_bytes() == b.read_bytes()


def test_json_validates_against_schema(tmp_path, report):
    path = tmp_path / "r.json"
    emit_report(report, path, timing=True)
    doc = json.loads(path.read_text())
    jsonschema.validate(doc, REPORT_SCHEMA)
    assert set(doc["suites"]) == {"geometry", "coarea"}
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate({"passed": True, "config": {}, "suites": {"x": {"name": "x"}}}, REPORT_SCHEMA)


def test_single_suite_schema():
    rep = lab.run_suite("geometry")
    jsonschema.validate(json.loads(to_json(rep)), SUITE_SCHEMA)


def test_floats_round_trip_exactly(report):
    doc = json.loads(to_json(report))
    for name, suite in report.suites.items():
        for inst, d in zip(suite.instances, doc["suites"][name]["instances"]):
            assert d["lhs"] == inst.lhs and d["margin"] == inst.margin


def test_csv_one_row_per_instance(tmp_path, report):
    path = tmp_path / "r.csv"
    emit_report(report, path, "csv")
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == sum(len(s.instances) for s in report.suites.values())
    assert to_csv(report) == path.read_text()
    first = report.suites["coarea"].instances[0]
    row = next(r for r in rows if r["case"] == first.case)
    assert float(row["margin"]) == first.margin


def test_unwritable_path_named(tmp_path, report):
    bad = tmp_path / "missing" / "r.json"
    with pytest.raises(ReportError, match="missing"):
        emit_report(report, bad)
    with pytest.raises(ValueError, match="format"):
        emit_report(report, tmp_path / "r.xml", "xml")


def test_non_finite_values_are_strings():
    doc = json.loads(to_json({"a": float("inf"), "b": [1.0, float("nan")]}))
    assert doc == {"a": "inf", "b": [1.0, "nan"]}
