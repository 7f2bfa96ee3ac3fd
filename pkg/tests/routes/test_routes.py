import pytest
from fastapi.testclient import TestClient

from src.main import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def test_root(client):
    assert client.get("/").status_code == 200


def test_catalog(client):
    response = client.get("/api/v1/catalog", params={"pattern": "mapping"})
    assert response.status_code == 200
    body = response.json()
    assert body["statuscode"] == 200
    assert body["error"] == ""
    names = [f["name"] for f in body["data"]["report"]["fixtures"]]
    assert "identity-mapping" in names


def test_analyze_file_with_catalog_reference(client):
    response = client.post("/api/v1/analyze-file", json={"spec_path": "catalog:abs"})
    assert response.status_code == 200
    report = response.json()["data"]["report"]
    assert report["verdict"]["certified"] is True


def test_analyze_inline_spec(client, chain_spec):
    response = client.post("/api/v1/analyze", json=chain_spec)
    assert response.status_code == 200
    assert response.json()["data"]["report"]["brute_force"]["er_exact"] == 1.0


@pytest.mark.parametrize("path", ["../secrets.json", "~/spec.json", "/etc/passwd"])
def test_path_traversal_is_rejected(client, path):
    response = client.post("/api/v1/analyze-file", json={"spec_path": path})
    assert response.status_code == 400
    assert response.json()["detail"] == "Invalid spec path."


def test_missing_spec_file(client):
    response = client.post(
        "/api/v1/analyze-file", json={"spec_path": "no-such-spec.json"}
    )
    assert response.status_code == 422
    assert "not found" in response.json()["error"]


def test_invalid_inline_spec(client, chain_spec):
    chain_spec["kind"] = "surface"
    assert client.post("/api/v1/analyze", json=chain_spec).status_code == 422


def test_verify(client):
    response = client.post("/api/v1/verify", json={"filter": "limits", "seed": 2})
    assert response.status_code == 200
    body = response.json()
    assert body["data"]["report"]["passed"] is True
    assert body["detail"].startswith("Property suite finished")


def test_verify_unknown_filter(client):
    response = client.post("/api/v1/verify", json={"filter": "no-such-group"})
    assert response.status_code == 500
    assert "no property check" in response.json()["error"]
