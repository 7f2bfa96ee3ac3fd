import json

import pytest

from src.cli import build_parser, main


def test_catalog_listing(capsys):
    assert main(["catalog", "--filter", "finite"]) == 0
    listed = json.loads(capsys.readouterr().out)
    names = [entry["name"] for entry in listed["report"]["fixtures"]]
    assert names == ["finite-two-point", "finite-chain", "finite-relation"]


def test_catalog_table(capsys):
    assert main(["catalog", "--filter", "abs", "--format", "table"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("abs ")


def test_analyze_catalog_fixture(capsys):
    assert main(["analyze", "catalog:abs", "--expect", "certified"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["report"]["verdict"]["certified"] is True


def test_expectation_mismatch():
    assert main(["analyze", "catalog:abs", "--expect", "not_certified"]) == 1


def test_malformed_spec_file(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"kind": "surface", "name": "x"}', encoding="utf-8")
    assert main(["analyze", str(path)]) == 2
    assert "failed validation" in capsys.readouterr().err


def test_bad_arguments():
    assert main(["analyze", "catalog:abs", "--schedule", "1,2"]) == 2
    assert main(["nonsense"]) == 2


def test_analyze_writes_files_only_when_asked(chain_spec, tmp_path):
    path = tmp_path / "chain.json"
    path.write_text(json.dumps(chain_spec), encoding="utf-8")
    out = tmp_path / "reports"
    assert main(["analyze", str(path), "--format", "csv"]) == 0
    assert not out.exists()
    argv = ["analyze", str(path), "--format", "csv", "--output-dir", str(out)]
    assert main(argv) == 0
    assert sorted(p.name for p in (out / "analyze").iterdir()) == [
        "chain.csv",
        "chain.json",
    ]


def test_verify_group(capsys):
    assert main(["verify", "--filter", "limits", "--seed", "3"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["report"]["seed"] == 3


def test_schedule_argument_is_parsed():
    args = build_parser().parse_args(
        ["analyze", "catalog:abs", "--schedule", "1,0.5,8"]
    )
    assert args.schedule.steps == 8


@pytest.mark.parametrize("at", ["0.5", "1,0"])
def test_query_point_argument(at):
    args = build_parser().parse_args(["analyze", "catalog:abs", "--at", at])
    assert args.at == [float(v) for v in at.split(",")]
