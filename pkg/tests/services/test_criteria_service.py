import pytest

from tests.conftest import catalog_target


def _verdict(helper, name):
    loaded = catalog_target(helper, name)
    return helper.criteria(loaded, helper.analysis_schedule(loaded))


def test_abs_is_certified(helper):
    verdict = _verdict(helper, "abs")
    assert verdict["certified"] is True
    assert verdict["conditions"]["a"]["holds"] is True


def test_parabola_mapping_is_not_subregular(helper):
    verdict = _verdict(helper, "parabola-mapping")
    assert verdict["certified"] is False


def test_identity_mapping_is_subregular(helper):
    assert _verdict(helper, "identity-mapping")["certified"] is True


def test_audit_records_each_implication_once(helper):
    verdict = _verdict(helper, "abs")
    assert verdict["audited"]
    assert not set(verdict["audited"]) & set(verdict["skipped"])


def test_threshold_must_be_positive(helper):
    loaded = catalog_target(helper, "abs")
    with pytest.raises(ValueError):
        helper.criteria_service.criteria_verdict(
            loaded.target, 0.0, helper.analysis_schedule(loaded)
        )
