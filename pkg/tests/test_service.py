import pytest
from fastapi.testclient import TestClient

from todkit.oracle import RuleOracleBackend
from todkit.service import create_app


@pytest.fixture()
def client(db):
    app = create_app(RuleOracleBackend(), db, rng_seed=0)
    return TestClient(app)


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json() == {"status": "ok", "backend_info": "RuleOracleBackend"}


def test_health_without_backend(db):
    client = TestClient(create_app(None, None))
    assert client.get("/health").status_code == 503
    assert client.post("/session").status_code == 503


def test_session_lifecycle(client):
    sid = client.post("/session").json()["session_id"]

    r = client.post(f"/session/{sid}/message", json={"text": "i am looking for a hotel ."})
    assert r.status_code == 200
    payload = r.json()
    assert set(payload) == {
        "response", "raw_response", "belief", "domain",
        "db_match", "template", "tolerance_events",
    }
    assert payload["domain"] == "hotel"
    assert payload["db_match"] == ">3"

    r = client.post(f"/session/{sid}/message", json={"text": "the area should be east ."})
    assert r.json()["belief"] == "hotel { area = east }"

    transcript = client.get(f"/session/{sid}").json()
    assert transcript["session_id"] == sid
    roles = [m["role"] for m in transcript["transcript"]]
    assert roles == ["user", "system", "user", "system"]
    # transcript stores the raw (unpolished) system responses
    assert transcript["transcript"][3]["text"] == r.json()["raw_response"]

    assert client.delete(f"/session/{sid}").json() == {"deleted": True}
    assert client.get(f"/session/{sid}").status_code == 404


def test_bad_requests(client):
    sid = client.post("/session").json()["session_id"]
    assert client.post(f"/session/{sid}/message", json={"text": "  "}).status_code == 400
    assert client.post("/session/nope/message", json={"text": "hi"}).status_code == 404
    assert client.get("/session/nope").status_code == 404
    assert client.delete("/session/nope").status_code == 404


def test_sessions_are_isolated(client):
    a = client.post("/session").json()["session_id"]
    b = client.post("/session").json()["session_id"]
    client.post(f"/session/{a}/message", json={"text": "i am looking for a taxi ."})
    assert client.get(f"/session/{b}").json()["transcript"] == []


def test_ttl_eviction(db):
    client = TestClient(create_app(RuleOracleBackend(), db, ttl=0.0))
    sid = client.post("/session").json()["session_id"]
    import time

    time.sleep(0.01)
    assert client.get(f"/session/{sid}").status_code == 404
