import csv
import io
import json
import math

import pytest

from src.app.models.domain.limit_models import RadiusSchedule

SCHEDULE = RadiusSchedule(4.0, 0.5, 2)


@pytest.fixture
def payload(helper, chain_function):
    body = {
        "er_modulus": helper.slope_service.er_modulus(chain_function, SCHEDULE).to_dict(),
        "checks": [{"name": "truth:er", "passed": True, "detail": "ok"}],
    }
    return helper.report_service.finalize(body)


def test_digest_is_stable(helper, payload):
    again = helper.report_service.finalize(json.loads(json.dumps(payload["report"])))
    assert again["digest"] == payload["digest"]
    changed = dict(payload["report"], extra=1)
    assert helper.report_service.finalize(changed)["digest"] != payload["digest"]


def test_json_rendering_has_no_bare_infinity(helper, payload):
    text = helper.report_service.render(payload, "json")
    assert "Infinity" not in text
    assert json.loads(text)["digest"] == payload["digest"]


def test_csv_rows(helper, payload):
    text = helper.report_service.render(payload, "csv")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert [row["quantity"] for row in rows] == ["truth:er", "er_modulus"]
    assert "empty_band" in rows[1]["flags"].split(";")


def test_table_ends_with_digest(helper, payload):
    text = helper.report_service.render(payload, "table")
    assert text.splitlines()[-1] == f"digest: {payload['digest']}"


def test_unknown_format(helper, payload):
    with pytest.raises(ValueError):
        helper.report_service.render(payload, "xml")


def test_write_files(helper, payload, tmp_path):
    paths = helper.report_service.write(
        "chain", payload, "csv", str(tmp_path), section="analyze"
    )
    assert [p.rsplit(".", 1)[-1] for p in paths] == ["json", "csv"]
    assert json.loads(open(paths[0], encoding="utf-8").read()) == payload


def test_infinite_values_are_strings(helper, payload):
    per_radius = payload["report"]["er_modulus"]["per_radius"]
    assert per_radius[-1]["value"] == "inf"
    assert not any(
        isinstance(r["value"], float) and math.isinf(r["value"]) for r in per_radius
    )
