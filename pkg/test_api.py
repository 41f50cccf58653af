"""Readout service endpoints against a small random-weight engine"""

import pytest
from fastapi.testclient import TestClient

from src.api.main import app


@pytest.fixture
def client(monkeypatch, small_config_file):
    monkeypatch.setenv("ALERT_CONFIG", str(small_config_file))
    monkeypatch.delenv("ALERT_WEIGHTS", raising=False)
    with TestClient(app) as test_client:
        yield test_client


def post(client, rows):
    return client.post("/events", json={"events": [dict(zip("txyp", row)) for row in rows]})


def test_root(client):
    body = client.get("/").json()
    assert body["service"] == "ALERT Readout API"
    assert body["health"] == "/health"


def test_health_degraded_without_trained_weights(client):
    body = client.get("/health").json()
    assert body["status"] == "degraded"
    assert body["services"] == {"engine": True, "head": True, "trained_weights": False}


def test_ingest_and_snapshot(client):
    response = post(client, [(10, 9, 9, 1), (20, 30, 2, -1)])
    assert response.status_code == 200
    assert response.json() == {"accepted": 2, "global_step": 2}

    snapshot = client.get("/snapshot").json()
    assert snapshot["step"] == 2
    assert snapshot["patches"] == [3, 5]
    assert len(snapshot["tokens"]) == 2 and len(snapshot["tokens"][0]) == 16

    # reading out twice returns the same tokens
    assert client.get("/snapshot").json() == snapshot


def test_empty_batch(client):
    response = post(client, [])
    assert response.status_code == 200
    assert response.json() == {"accepted": 0, "global_step": 0}


def test_order_regression_is_rejected(client):
    assert post(client, [(100, 1, 1, 1)]).status_code == 200
    before = client.get("/snapshot").json()

    response = post(client, [(50, 1, 1, 1)])
    assert response.status_code == 409
    assert response.json()["error"] == "OrderError"
    assert client.get("/snapshot").json() == before

    within = post(client, [(200, 1, 1, 1), (150, 1, 1, 1)])
    assert within.status_code == 409
    assert client.get("/snapshot").json()["step"] == 1


def test_out_of_bounds_is_rejected(client):
    response = post(client, [(0, 99, 0, 1)])
    assert response.status_code == 422
    assert response.json()["error"] == "ValidationError"
    assert response.json()["details"] == {"index": 0}


def test_zero_polarity_is_rejected(client):
    response = post(client, [(0, 1, 1, 0)])
    assert response.status_code == 422
    assert client.get("/snapshot").json()["step"] == 0


def test_predict(client):
    post(client, [(i, i % 32, (3 * i) % 32, 1 if i % 2 else -1) for i in range(64)])
    prediction = client.get("/predict").json()
    assert prediction["step"] == 64
    assert len(prediction["probs"]) == 3
    assert sum(prediction["probs"]) == pytest.approx(1.0)
    assert not prediction["degenerate"]


def test_reset(client):
    post(client, [(5, 1, 1, 1)])
    body = client.post("/reset").json()
    assert body == {"status": "reset", "global_step": 0}

    prediction = client.get("/predict").json()
    assert prediction["degenerate"]
    assert prediction["probs"] == pytest.approx([1 / 3] * 3)

    # the clock restarts, so earlier timestamps are accepted again
    assert post(client, [(1, 1, 1, 1)]).status_code == 200
