import asyncio
import json

import pytest

from src.app.usecases.analyze_usecases.analyze_usecase import AnalyzeUseCase
from src.app.utils.error_handler import SpecSchemaError


def analyze(helper, request):
    return asyncio.run(AnalyzeUseCase(helper).execute(request))


def test_catalog_abs(helper):
    payload = analyze(helper, {"spec_path": "catalog:abs"})
    report = payload["report"]
    assert report["spec"] == {
        "name": "abs",
        "kind": "function",
        "source": "catalog:abs",
    }
    assert report["verdict"]["certified"] is True
    assert all(check["passed"] for check in report["truth_checks"])
    assert report["brute_force"] is None
    json.dumps(payload, allow_nan=False)


def test_inline_finite_spec_gets_brute_force(helper, chain_spec):
    report = analyze(helper, {"spec": chain_spec})["report"]
    assert report["spec"]["source"] == "<request>"
    assert report["brute_force"]["er_exact"] == 1.0
    assert report["schedule"] == {"rho0": 4.0, "gamma": 0.5, "steps": 2}


def test_report_digest_is_deterministic(helper, chain_spec):
    first = analyze(helper, {"spec": chain_spec})
    second = analyze(helper, {"spec": dict(chain_spec)})
    assert first["digest"] == second["digest"]


def test_overrides_reach_the_report(helper):
    report = analyze(
        helper,
        {
            "spec_path": "catalog:abs",
            "schedule": {"rho0": 0.5, "gamma": 0.5, "steps": 4},
            "gamma": 0.25,
        },
    )["report"]
    assert report["gamma"] == 0.25
    assert report["schedule"]["rho0"] == 0.5


def test_writes_report_files(helper, tmp_path):
    payload = analyze(
        helper,
        {
            "spec_path": "catalog:finite-chain",
            "output_dir": str(tmp_path),
            "format": "table",
        },
    )
    assert [p.rsplit(".", 1)[-1] for p in payload["files"]] == ["json", "txt"]
    assert all(str(tmp_path) in p for p in payload["files"])


def test_malformed_spec(helper, chain_spec):
    chain_spec["definition"] = {"type": "table", "values": []}
    with pytest.raises(SpecSchemaError):
        analyze(helper, {"spec": chain_spec})
