import json

import pytest
from fastapi.testclient import TestClient

from api.main import app


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as test_client:
        yield test_client


@pytest.fixture(scope="module")
def g3_payload(models_dir):
    return json.loads((models_dir / "g3-lattice.json").read_text(encoding="utf-8"))


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "ok"


def test_version_reports_oracle_settings(client):
    body = client.get("/api/version").json()
    assert {"version", "threads", "degreePrimes", "degreeSamples", "maxFreeCells"} <= set(body)


def test_decide(client, g3_payload):
    response = client.post("/api/decide", json={"model": g3_payload, "mode": "exhaustive", "trace": "none"})
    assert response.status_code == 200
    body = response.json()
    assert body["results"]["status"] == "INDECOMPOSABLE"
    assert body["results"]["steps"] == []
    assert body["exit_code"] == 0


def test_decide_undecided_is_still_a_report(client):
    payload = {"d": 1, "g": 2, "mode": "axiomatic", "exponents": [5, 5]}
    body = client.post("/api/decide", json={"model": payload}).json()
    assert body["results"]["status"] == "UNDECIDED"
    assert body["exit_code"] == 2


def test_decide_hypothesis_failure_is_a_conflict(client):
    model = {"d": 3, "g": 3, "mode": "axiomatic", "exponents": [3, 3, 3]}
    response = client.post("/api/decide", json={"model": model})
    assert response.status_code == 409
    assert response.json()["error"] == "HypothesisError"


def test_bad_glue_is_unprocessable(client):
    response = client.post("/api/decide", json={"model": {"d": 1, "g": 2, "glue": [[[1, 0], 0]]}})
    assert response.status_code == 422
    assert response.json()["error"] == "LatticeError"


def test_unknown_mode_is_rejected_by_validation(client, g3_payload):
    assert client.post("/api/decide", json={"model": g3_payload, "mode": "guess"}).status_code == 422


def test_conv_table(client, g3_payload):
    body = client.post("/api/conv-table", json={"model": g3_payload}).json()
    assert len(body["results"]["rows"]) == 4 * 3 * 9
    assert [p["id"] for p in body["results"]["probes"]] == ["id", "(1 2)", "(1 3)", "(2 3)"]


def test_motive_product(client):
    body = client.post("/api/motive/product", json={"params": {"g": 10}}).json()
    assert body["results"]["M2tr"] == 200


def test_motive_elliptic_curve(client):
    body = client.post("/api/motive/elliptic-curve", json={"params": {"g": 4}}).json()
    assert body["results"]["M2tr"] == 8
    assert body["inputs"] == {"kind": "elliptic-curve", "g": 4}


def test_motive_hypersurface(client):
    body = client.post("/api/motive/hypersurface", json={"params": {"n": 4, "d": 3}}).json()
    assert body["results"]["motive"]["dims"] == [1, 0, 1, 0, 23, 0, 1, 0, 1]


def test_motive_bad_parameters(client):
    response = client.post("/api/motive/curve", json={"params": {"genus": 2}})
    assert response.status_code == 422
    assert client.post("/api/motive/threefold", json={}).status_code == 422


def test_av_liverpool(client, g3_payload):
    body = client.post("/api/av/liverpool", json={"model": g3_payload, "A": [1], "B": [2, 3]}).json()
    assert body["results"] == {"outcome": "CONSISTENT"}


def test_av_exponents(client, g3_payload):
    body = client.post("/api/av/exponents", json={"model": g3_payload, "scan": True}).json()
    assert body["results"]["floor"] == 5


def test_fermat_pullback(client):
    body = client.get("/api/fermat/pullback/1").json()
    assert body["results"]["rep"] == "V210"
    assert body["inputs"] == {"phi": 1}


def test_fermat_pullback_range(client):
    assert client.get("/api/fermat/pullback/4").status_code == 422
