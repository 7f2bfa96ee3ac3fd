import pytest

from src.app.config.fixture_catalog import FIXTURES
from src.app.models.domain.function_models import ProbeFunction, TwoVarFunction
from src.app.models.domain.mapping_models import SetValuedMapping
from tests.conftest import catalog_target

KINDS = {
    "function": ProbeFunction,
    "two_var_function": TwoVarFunction,
    "mapping": SetValuedMapping,
}


def test_listing_filters_by_name(helper):
    names = [entry["name"] for entry in helper.catalog_service.listing("mapping")]
    assert "identity-mapping" in names
    assert all("mapping" in name for name in names)
    assert helper.catalog_service.listing("no-such-fixture") == []


def test_unknown_fixture(helper):
    with pytest.raises(ValueError, match="unknown catalog fixture"):
        helper.catalog_service.get("no-such-fixture")


def test_listing_is_a_copy(helper):
    entry = helper.catalog_service.listing("abs")[0]
    entry["truths"]["er_modulus"] = -1
    assert helper.catalog_service.get("abs")["truths"]["er_modulus"] == 1.0


@pytest.mark.parametrize("name", [entry["name"] for entry in FIXTURES])
def test_every_fixture_builds(helper, name):
    entry = helper.catalog_service.get(name)
    loaded = catalog_target(helper, name)
    assert isinstance(loaded.target, KINDS[entry["spec"]["kind"]])
    assert entry["provenance"]


def test_unknown_formula(helper):
    with pytest.raises(ValueError):
        helper.catalog_service.function_formula("cosh", "bad", 1, "L2", 0.1, 1.0)
