import json

import pytest

from src.app.models.domain.limit_models import RadiusSchedule
from src.app.utils.error_handler import SpecSchemaError


def test_load_catalog_reference(helper):
    loaded = helper.spec_loader_service.load("catalog:abs")
    assert loaded.kind == "function"
    assert loaded.truths["er_modulus"] == 1.0
    assert loaded.source == "catalog:abs"


def test_load_file_with_overrides(helper, chain_spec, tmp_path):
    path = tmp_path / "chain.json"
    path.write_text(json.dumps(chain_spec), encoding="utf-8")
    loaded = helper.spec_loader_service.load(
        str(path), at=[1], schedule=RadiusSchedule(2.0, 0.5, 3), gamma=0.25
    )
    assert loaded.spec.at == [1.0]
    assert loaded.schedule.radii().tolist() == [2.0, 1.0, 0.5, 0.25]
    assert loaded.gamma == 0.25
    assert loaded.target.base_index == 2


def test_spec_schedule_is_used_by_default(helper, chain_spec):
    spec = helper.spec_loader_service.parse(chain_spec)
    loaded = helper.spec_loader_service.build(spec)
    assert loaded.schedule == RadiusSchedule(4.0, 0.5, 2)


def test_catalog_entry_file_is_accepted(helper, tmp_path):
    entry = helper.catalog_service.get("finite-chain")
    path = tmp_path / "entry.json"
    path.write_text(json.dumps(entry), encoding="utf-8")
    loaded = helper.spec_loader_service.load(str(path))
    assert loaded.truths == entry["truths"]


def test_diagnostics_carry_line_numbers(helper, chain_spec, tmp_path):
    chain_spec["schedule"]["gamma"] = 1.5
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(chain_spec, indent=2), encoding="utf-8")
    with pytest.raises(SpecSchemaError) as info:
        helper.spec_loader_service.load(str(path))
    [diagnostic] = info.value.diagnostics
    assert diagnostic.startswith("line ")
    assert "schedule.gamma" in diagnostic


@pytest.mark.parametrize(
    "patch",
    [
        {"kind": "surface"},
        {"definition": {"type": "formula", "formula": "identity"}},
        {"definition": {"type": "table", "values": [1, 0]}},
        {"space": {"type": "euclidean"}},
        {"extra": True},
    ],
)
def test_malformed_specs(helper, chain_spec, patch):
    chain_spec.update(patch)
    with pytest.raises(SpecSchemaError):
        data = helper.spec_loader_service.parse(chain_spec)
        helper.spec_loader_service.build(data)


def test_missing_and_invalid_files(helper, tmp_path):
    with pytest.raises(SpecSchemaError, match="not found"):
        helper.spec_loader_service.load(str(tmp_path / "missing.json"))
    path = tmp_path / "broken.json"
    path.write_text('{"kind": "function",\n  "name": }', encoding="utf-8")
    with pytest.raises(SpecSchemaError) as info:
        helper.spec_loader_service.load(str(path))
    assert info.value.diagnostics[0].startswith("line 2")
