"""HTTP contract tests for the curation service (no UI required)."""

import json

import pytest
from fastapi.testclient import TestClient

from conftest import make_record
from xqasrl.curation import CurationStore
from xqasrl.dataset import record_to_dict
from xqasrl.server import create_app


@pytest.fixture
def client():
    store = CurationStore()
    store.import_records([make_record("s1"), make_record("s2", language="he")])
    return TestClient(create_app(store))


def post_edit(client, key, version, **edit):
    return client.post(f"/items/{key}/edits", json={"version": version, **edit})


def test_healthz(client):
    response = client.get("/healthz")
    assert response.status_code == 200
    assert response.text == "ok"


def test_list_items_summaries(client):
    body = client.get("/items").json()
    assert [item["key"] for item in body["items"]] == ["s1#1", "s2#1"]
    first = body["items"][0]
    assert first == {
        "key": "s1#1",
        "status": "pending",
        "version": 0,
        "language": "fr",
        "predicate": "vote",
        "n_qas": 1,
    }


def test_list_items_language_filter(client):
    body = client.get("/items", params={"language": "he"}).json()
    assert [item["key"] for item in body["items"]] == ["s2#1"]


def test_get_item_url_encoded_key(client):
    response = client.get("/items/s1%231")
    assert response.status_code == 200
    body = response.json()
    assert body["key"] == "s1#1"
    assert body["version"] == 0
    assert body["record"]["qas"][0]["question"] == "Qui vote ?"
    assert body["edits"] == []


def test_get_item_missing_is_404(client):
    assert client.get("/items/zzz").status_code == 404


def test_edit_bumps_version(client):
    response = post_edit(client, "s1%231", 0, action="edit_question", qa_index=0, question="Qui ?")
    assert response.status_code == 200
    body = response.json()
    assert body["version"] == 1
    assert body["status"] == "reviewed"
    assert body["record"]["qas"][0]["question"] == "Qui ?"
    # listing reflects the new state
    items = client.get("/items", params={"status": "reviewed"}).json()["items"]
    assert [item["key"] for item in items] == ["s1#1"]


def test_stale_edit_is_409_with_current_version(client):
    assert post_edit(client, "s1%231", 0, action="accept").status_code == 200
    response = post_edit(client, "s1%231", 0, action="accept")
    assert response.status_code == 409
    detail = response.json()["detail"]
    assert detail["current_version"] == 1
    assert "targeted 0" in detail["message"]


def test_edit_requires_integer_version(client):
    response = client.post("/items/s1%231/edits", json={"action": "accept"})
    assert response.status_code == 422
    response = client.post("/items/s1%231/edits", json={"version": "0", "action": "accept"})
    assert response.status_code == 422


def test_edit_validation_error_is_422(client):
    response = post_edit(client, "s1%231", 0, action="edit_question", qa_index=0, question="")
    assert response.status_code == 422


def test_edit_missing_item_is_404(client):
    assert post_edit(client, "nope", 0, action="accept").status_code == 404


def test_category_endpoint(client):
    response = client.post("/items/s1%231/qas/0/category", json={"version": 0, "category": "V"})
    assert response.status_code == 200
    body = response.json()
    assert "category:V" in body["record"]["qas"][0]["flags"]
    stale = client.post("/items/s1%231/qas/0/category", json={"version": 0, "category": "M"})
    assert stale.status_code == 409
    assert stale.json()["detail"]["current_version"] == 1
    bad = client.post("/items/s1%231/qas/0/category", json={"version": 1, "category": "X"})
    assert bad.status_code == 422


def test_import_endpoint_counts_and_conflicts(client):
    fresh = record_to_dict(make_record("s9"))
    response = client.post("/import", json={"records": [fresh]})
    assert response.status_code == 200
    assert response.json() == {"imported": 1, "total": 3}
    # idempotent re-import
    again = client.post("/import", json={"records": [fresh]})
    assert again.json() == {"imported": 0, "total": 3}
    # conflicting content for an existing key
    changed = record_to_dict(
        make_record("s9", words=[("Tu", "PRON"), ("votes", "VERB"), ("là", "ADV")])
    )
    conflict = client.post("/import", json={"records": [changed]})
    assert conflict.status_code == 409
    assert "s9#1" in conflict.json()["detail"]


def test_import_rejects_malformed(client):
    response = client.post("/import", json={"records": [{"id": "broken"}]})
    assert response.status_code == 422
    response = client.post("/import", json={"records": "nope"})
    assert response.status_code == 422


def test_export_ndjson(client):
    post_edit(client, "s2%231", 0, action="accept")
    response = client.get("/export")
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("application/x-ndjson")
    lines = [line for line in response.text.splitlines() if line]
    assert len(lines) == 1
    assert json.loads(lines[0])["id"] == "s2#1"


def test_export_all_pending_empty(client):
    assert client.get("/export").text == ""


def test_stats_shape(client):
    post_edit(client, "s1%231", 0, action="accept")
    body = client.get("/stats").json()
    assert body["progress"] == {"items": 2, "reviewed": 1, "pending": 1}
    assert set(body["categories"]) == {"M", "V", "P", "R"}


def test_static_mount_serves_ui(tmp_path):
    (tmp_path / "index.html").write_text("<h1>review queue</h1>", encoding="utf-8")
    store = CurationStore()
    store.import_records([make_record("s1")])
    client = TestClient(create_app(store, static_dir=tmp_path))
    assert "review queue" in client.get("/").text
    assert client.get("/stats").status_code == 200  # API routes win over the mount


def test_auth_guard(monkeypatch):
    store = CurationStore()
    store.import_records([make_record("s1")])
    client = TestClient(create_app(store, auth_token_env="CURATION_TOKEN"), raise_server_exceptions=False)

    monkeypatch.delenv("CURATION_TOKEN", raising=False)
    assert client.get("/items").status_code == 500  # refuse to run open when env missing

    monkeypatch.setenv("CURATION_TOKEN", "sekret")
    assert client.get("/items").status_code == 401
    assert client.get("/items", headers={"Authorization": "Bearer wrong"}).status_code == 401
    ok = client.get("/items", headers={"Authorization": "Bearer sekret"})
    assert ok.status_code == 200
    # liveness probe stays open
    assert client.get("/healthz").status_code == 200
