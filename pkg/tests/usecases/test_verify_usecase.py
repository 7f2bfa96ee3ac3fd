import asyncio

import pytest

from src.app.usecases.verify_usecases.verify_helper import VerifyHelper
from src.app.usecases.verify_usecases.verify_usecase import VerifyUseCase


@pytest.fixture(scope="module")
def verify_helper(helper):
    return VerifyHelper(helper)


def verify(verify_helper, request):
    return asyncio.run(VerifyUseCase(verify_helper).execute(request))


def test_filter_selects_checks(verify_helper):
    assert verify_helper.names("limits") == [
        "limits.monotone_bands",
        "limits.extreal_division",
    ]
    assert len(verify_helper.names(None)) == len(verify_helper.names(""))


def test_limits_group_passes(verify_helper):
    report = verify(verify_helper, {"filter": "limits", "seed": 1})["report"]
    assert report["passed"]
    assert report["summary"]["failed"] == 0
    assert all(c["name"].startswith("limits.") for c in report["checks"])


def test_runs_are_deterministic(verify_helper):
    first = verify(verify_helper, {"filter": "ekeland.chain", "seed": 5})
    second = verify(verify_helper, {"filter": "ekeland.chain", "seed": 5})
    assert first["digest"] == second["digest"]
    assert first["report"]["passed"]


def test_unknown_filter(verify_helper):
    with pytest.raises(ValueError, match="no property check"):
        verify(verify_helper, {"filter": "no-such-group"})


def test_crashing_check_is_reported(verify_helper, monkeypatch):
    def boom(rng):
        raise RuntimeError("boom")

    monkeypatch.setitem(verify_helper.registry, "limits.monotone_bands", boom)
    [result] = verify_helper.run("limits.monotone_bands", 0)
    assert not result.passed
    assert "boom" in result.detail
