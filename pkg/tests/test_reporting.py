import json
import math

import numpy as np
import pytest

from ctxlab import cli
from ctxlab.error_handling import ArgumentError, InvariantError
from ctxlab.pm_square import Line
from ctxlab.reporting import CSV_COLUMNS, RunReport, to_jsonable, validate_document


SCAN_RESULTS = {"ensembles": {}, "rng": "numpy.PCG64", "seed_derivation": "spawn_key"}


def _report(**results):
    report = RunReport(command="scan", config={"seed": 42})
    report.add_check("first", 1, 1, True)
    report.check_close("second", 3.0, 2.9999999, 1e-6, detail="close enough")
    report.results = dict(SCAN_RESULTS, **results)
    return report


def test_to_jsonable():
    assert to_jsonable(math.inf) == "inf"
    assert to_jsonable(-math.inf) == "-inf"
    assert to_jsonable(float("nan")) == "nan"
    assert to_jsonable(np.bool_(True)) is True
    assert to_jsonable(np.int64(3)) == 3 and isinstance(to_jsonable(np.int64(3)), int)
    assert to_jsonable(Line.C3) == "C3"
    assert to_jsonable((1, 2)) == [1, 2]
    assert to_jsonable(1 + 2j) == {"re": 1.0, "im": 2.0}


def test_passed_and_failed_checks():
    report = _report()
    assert report.passed
    report.add_check("third", 0, 1, False, deviation=1.0)
    assert not report.passed
    assert [c.name for c in report.failed_checks()] == ["third"]


def test_json_document_validates():
    report = _report(gamma=2.81, significance=math.inf)
    document = json.loads(report.to_json())
    assert document["schema_version"] == "1.0"
    assert document["passed"] is True
    assert document["results"]["significance"] == "inf"
    assert len(document["fingerprint"]) == 64
    assert [c["name"] for c in document["checks"]] == ["first", "second"]


def test_fingerprint_ignores_timestamps():
    a, b = _report(x=1), _report(x=1)
    a.mark_started()
    a.mark_finished()
    assert a.started_at is not None
    assert a.fingerprint == b.fingerprint
    b.results["x"] = 2
    assert a.fingerprint != b.fingerprint


def test_no_timestamps_gives_identical_bytes():
    a, b = _report(x=1), _report(x=1)
    for r in (a, b):
        r.mark_started(record=False)
        r.mark_finished(record=False)
    assert a.to_json() == b.to_json()
    assert json.loads(a.to_json())["timestamps"] == {"started_at": None, "finished_at": None}


def test_csv_layout():
    lines = _report().to_csv().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[1] == "first,1,1,,true,"
    assert lines[2].startswith("second,3.0,2.9999999,")
    assert lines[2].endswith(",true,close enough")


def test_invalid_document_rejected():
    document = _report().to_dict()
    del document["fingerprint"]
    with pytest.raises(InvariantError):
        validate_document(document)


def test_render_unknown_format():
    with pytest.raises(ArgumentError):
        _report().render("xml")


def test_write_to_file(tmp_path):
    target = tmp_path / "out" / "report.json"
    text = _report().write("json", str(target))
    assert target.read_text(encoding="utf-8") == text


def _data_document(**overrides):
    document = cli.cmd_report_from_data(0.90, 0.01, -0.91, 0.01).to_dict()
    document["results"].update(overrides)
    return document


def test_report_from_data_document_validates():
    validate_document(_data_document())
    validate_document(_data_document(significance="exact"))
    validate_document(_data_document(significance="-inf"))


@pytest.mark.parametrize("overrides", [
    {"significance": "inf"},
    {"violation": "yes"},
    {"sigma": -0.1},
    {"ncr_value": 2},
])
def test_report_from_data_payload_constraints(overrides):
    with pytest.raises(InvariantError):
        validate_document(_data_document(**overrides))


@pytest.mark.parametrize("key", ["gamma", "sigma", "significance", "violation"])
def test_simulate_payload_requires_witness_fields(key):
    document = RunReport(command="simulate", config={}).to_dict()
    document["results"] = {
        "gamma": 2.8, "sigma": 0.01, "significance": 180.0, "violation": True,
        "violation_threshold_sigmas": 5.0, "flip_probability": 0.0, "attenuation": 1.0,
        "estimates": {"R3": {}, "C3": {}}, "rng": "numpy.PCG64", "seed_derivation": "spawn_key",
    }
    validate_document(document)
    del document["results"][key]
    with pytest.raises(InvariantError):
        validate_document(document)


def test_scan_payload_requires_ensembles():
    document = _report().to_dict()
    del document["results"]["ensembles"]
    with pytest.raises(InvariantError):
        validate_document(document)
