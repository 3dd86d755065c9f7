import json
import time
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from lectio.service import ServiceConfig, create_app
from lectio.stub_asr import StubAsrServer

SMALL_DOC = json.dumps({
    "segments": [
        {"id": 0, "start": 0.0, "end": 4.0, "text": " Today we will cover waves."},
        {"id": 1, "start": 4.0, "end": 8.0, "text": " What do you think happens next?"},
        {"id": 2, "start": 8.0, "end": 12.0, "text": " To sum up, energy is conserved."},
    ],
})


def make_config(tmp_path, **kw):
    return ServiceConfig(data_dir=Path(tmp_path) / "data", admin_token="sesame",
                         worker_poll_interval=0.02, **kw)


@pytest.fixture()
def client(tmp_path):
    config = make_config(tmp_path)
    app = create_app(config)
    with TestClient(app) as c:
        c.app = app
        yield c


def upload_transcript(client, title="Waves", lecture_id=None, doc=SMALL_DOC):
    data = {"title": title}
    if lecture_id:
        data["lecture_id"] = lecture_id
    return client.post(
        "/lectures", data=data,
        files={"transcript": ("t.json", doc.encode(), "application/json")})


def wait_for_job(client, job_id, timeout=15.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        job = client.get(f"/jobs/{job_id}").json()
        if job["state"] in ("done", "error"):
            return job
        time.sleep(0.02)
    raise TimeoutError(f"job {job_id} did not settle")


def test_upload_transcript_fast_path(client):
    response = upload_transcript(client, lecture_id="lec-1")
    assert response.status_code == 201
    body = response.json()
    assert body["job_id"] is None
    assert body["lecture"]["status"] == "transcribed"
    assert body["lecture"]["duration"] == 12.0

    listing = client.get("/lectures").json()
    assert [l["lecture_id"] for l in listing] == ["lec-1"]

    transcript = client.get("/lectures/lec-1/transcript").json()
    assert len(transcript["segments"]) == 3
    assert transcript["segments"][0]["text"] == "Today we will cover waves."


def test_upload_requires_exactly_one_part(client):
    response = client.post("/lectures", data={"title": "x"})
    assert response.status_code == 400
    assert response.json()["code"] == "invalid_input"

    response = client.post(
        "/lectures", data={"title": "x"},
        files={"transcript": ("t.json", SMALL_DOC.encode(), "application/json"),
               "media": ("a.wav", b"RIFF", "audio/wav")})
    assert response.status_code == 400


def test_upload_duplicate_id_conflict(client):
    assert upload_transcript(client, lecture_id="dup").status_code == 201
    response = upload_transcript(client, lecture_id="dup")
    assert response.status_code == 409
    assert response.json()["code"] == "conflict"


def test_upload_bad_transcript_rolls_back(client):
    response = client.post(
        "/lectures", data={"title": "x", "lecture_id": "bad"},
        files={"transcript": ("t.json", b"{not json", "application/json")})
    assert response.status_code == 400
    assert client.get("/lectures").json() == []


def test_media_upload_queues_job_and_transcribes(tmp_path):
    with StubAsrServer() as stub:
        config = make_config(tmp_path, asr_endpoint=stub.endpoint)
        app = create_app(config)
        with TestClient(app) as client:
            response = client.post(
                "/lectures", data={"title": "Audio", "lecture_id": "aud"},
                files={"media": ("talk.wav", b"RIFFfake-wav-bytes", "audio/wav")})
            assert response.status_code == 201
            body = response.json()
            assert body["lecture"]["status"] == "registered"
            job = wait_for_job(client, body["job_id"])
            assert job["state"] == "done"
            lecture = client.get("/lectures").json()[0]
            assert lecture["status"] == "transcribed"
            assert lecture["duration"] == 11.0
            transcript = client.get("/lectures/aud/transcript").json()
            assert "Welcome to the lecture." in transcript["text"]


def test_media_upload_without_asr_endpoint_degrades(client):
    response = client.post(
        "/lectures", data={"title": "Audio", "lecture_id": "aud2"},
        files={"media": ("talk.wav", b"RIFFfake", "audio/wav")})
    assert response.status_code == 201
    job = wait_for_job(client, response.json()["job_id"])
    assert job["state"] == "error"
    assert "ASR" in job["error_message"] or "endpoint" in job["error_message"]
    # preflight failure leaves the lecture registered, not failed
    assert client.get("/lectures").json()[0]["status"] == "registered"


def test_analyze_flow(client):
    upload_transcript(client, lecture_id="lec-a")
    response = client.post("/lectures/lec-a/analyze?model=text_features_v1")
    assert response.status_code == 202
    job = wait_for_job(client, response.json()["job_id"])
    assert job["state"] == "done"

    lecture = client.get("/lectures").json()[0]
    assert lecture["status"] == "analyzed"

    summary = client.get("/lectures/lec-a/summary").json()
    assert summary["source"] == "model"
    assert summary["model_id"] == "text_features_v1"
    assert summary["counts"].get("organization", 0) >= 1
    assert summary["counts"].get("summing_up", 0) >= 1

    timeline = client.get("/lectures/lec-a/timeline").json()
    assert any(t["feature_id"] == "organization" for t in timeline)

    rows = client.get(
        "/lectures/lec-a/features/organization/sentences").json()
    assert any("Today we will cover" in r["text"] for r in rows)

    # question model analysis on the same lecture
    response = client.post("/lectures/lec-a/analyze?model=questions_v1")
    job = wait_for_job(client, response.json()["job_id"])
    assert job["state"] == "done"
    summary_q = client.get("/lectures/lec-a/summary?model=questions_v1").json()
    assert summary_q["counts"].get("question", 0) >= 1


def test_analyze_preconditions(client):
    response = client.post("/lectures/ghost/analyze?model=questions_v1")
    assert response.status_code == 404

    upload_transcript(client, lecture_id="lec-b")
    response = client.post("/lectures/lec-b/analyze?model=unknown-model")
    assert response.status_code == 404

    # a registered (not yet transcribed) lecture refuses analysis
    client.post("/lectures", data={"title": "m", "lecture_id": "reg"},
                files={"media": ("a.wav", b"RIFF", "audio/wav")})
    response = client.post("/lectures/reg/analyze?model=questions_v1")
    assert response.status_code == 409
    assert response.json()["code"] == "invalid_state"


def test_summary_empty_and_gold_source(client):
    upload_transcript(client, lecture_id="lec-c")
    summary = client.get("/lectures/lec-c/summary").json()
    assert summary["counts"] == {}
    assert summary["model_id"] is None

    timeline = client.get("/lectures/lec-c/timeline").json()
    assert timeline == []

    gold_summary = client.get("/lectures/lec-c/summary?source=gold").json()
    assert gold_summary["source"] == "gold"
    assert gold_summary["counts"] == {}

    response = client.get("/lectures/lec-c/summary?source=bogus")
    assert response.status_code == 400


def test_feature_validation(client):
    upload_transcript(client, lecture_id="lec-d")
    response = client.get("/lectures/lec-d/features/not_a_feature/sentences")
    assert response.status_code == 400
    assert response.json()["code"] == "invalid_input"


def test_transcript_content_negotiation(client):
    upload_transcript(client, lecture_id="lec-e")
    csv_response = client.get("/lectures/lec-e/transcript",
                              headers={"Accept": "text/csv"})
    assert csv_response.headers["content-type"].startswith("text/csv")
    lines = csv_response.text.strip().split("\n")
    assert lines[0] == "sentence_id,start,end,text"
    assert len(lines) == 4

    missing = client.get("/lectures/ghost/transcript")
    assert missing.status_code == 404


def test_trends(client):
    upload_transcript(client, lecture_id="t1")
    upload_transcript(client, lecture_id="t2")
    for lid in ("t1", "t2"):
        job = client.post(f"/lectures/{lid}/analyze?model=text_features_v1").json()
        wait_for_job(client, job["job_id"])

    response = client.get("/trends?lectures=t1,t2")
    assert response.status_code == 200
    body = response.json()
    assert body["lectures"] == ["t1", "t2"]
    for series in body["per_feature"].values():
        assert len(series) == 2

    missing = client.get("/trends?lectures=t1,ghost")
    assert missing.status_code == 404
    assert "ghost" in missing.json()["message"]


def test_models_admin(client):
    listing = client.get("/models").json()
    assert {m["model_id"] for m in listing} == {"questions_v1", "text_features_v1"}

    descriptor = {"model_id": "remote-bert", "task": "feature_multilabel",
                  "backend": "remote", "label_set": ["organization"],
                  "endpoint": "http://models.internal/infer"}

    response = client.post("/models", json=descriptor)
    assert response.status_code == 401

    headers = {"Authorization": "Bearer sesame"}
    response = client.post("/models", json=descriptor, headers=headers)
    assert response.status_code == 201
    assert "remote-bert" in {m["model_id"] for m in client.get("/models").json()}

    response = client.post("/models", json=descriptor, headers=headers)
    assert response.status_code == 409

    bad = dict(descriptor, model_id="x", backend="remote", endpoint=None)
    response = client.post("/models", json=bad, headers=headers)
    assert response.status_code == 400

    response = client.delete("/models/remote-bert", headers=headers)
    assert response.status_code == 200
    response = client.delete("/models/remote-bert", headers=headers)
    assert response.status_code == 404

    response = client.delete("/models/questions_v1")
    assert response.status_code == 401


def test_jobs_endpoint_unknown(client):
    assert client.get("/jobs/ghost").status_code == 404


def test_queued_jobs_survive_restart(tmp_path):
    from lectio.store import JobRecord, LectureRecord, Store
    from lectio.service.pipeline import ingest_transcript_document

    config = make_config(tmp_path)
    config.ensure_dirs()
    store = Store(str(config.db_path))
    record = store.put_lecture(LectureRecord(lecture_id="lq", title="T"))
    ingest_transcript_document(store, record, SMALL_DOC)
    store.create_job(JobRecord(job_id="job-pending", lecture_id="lq",
                               kind="analyze",
                               detail={"model_id": "text_features_v1"}))
    store.close()

    app = create_app(config)
    with TestClient(app) as client:
        job = wait_for_job(client, "job-pending")
        assert job["state"] == "done"
        summary = client.get("/lectures/lq/summary").json()
        assert summary["counts"]


def test_analyze_replaces_predictions_idempotently(client):
    upload_transcript(client, lecture_id="re")
    for _ in range(2):
        job = client.post("/lectures/re/analyze?model=text_features_v1").json()
        wait_for_job(client, job["job_id"])
    first = client.get("/lectures/re/summary").json()
    job = client.post("/lectures/re/analyze?model=text_features_v1").json()
    wait_for_job(client, job["job_id"])
    assert client.get("/lectures/re/summary").json() == first
