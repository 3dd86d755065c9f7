#!/usr/bin/env python3
"""Regenerate the committed golden payloads for the end-to-end fixture run.

Drives the real service: upload the bundled fixture transcript, analyze with
the default builtin model, then snapshot the summary, timeline, and
organization-sentences response bodies byte-for-byte.

Run from the repo root: python scripts/make_goldens.py
"""

import tempfile
import time
from importlib import resources
from pathlib import Path

from fastapi.testclient import TestClient

from lectio.service import ServiceConfig, create_app

ROOT = Path(__file__).resolve().parent.parent
GOLDEN = ROOT / "tests" / "golden"
LECTURE_ID = "fixture-lecture"
MODEL_ID = "text_features_v1"
FEATURE = "organization"


def main():
    GOLDEN.mkdir(exist_ok=True)
    document = resources.files("lectio.data").joinpath(
        "fixture_transcript.json").read_bytes()
    with tempfile.TemporaryDirectory() as tmp:
        config = ServiceConfig(data_dir=Path(tmp), worker_poll_interval=0.02)
        app = create_app(config)
        with TestClient(app) as client:
            response = client.post(
                "/lectures", data={"title": "Fixture lecture",
                                   "lecture_id": LECTURE_ID},
                files={"transcript": ("f.json", document, "application/json")})
            assert response.status_code == 201, response.text
            job = client.post(
                f"/lectures/{LECTURE_ID}/analyze?model={MODEL_ID}").json()
            deadline = time.monotonic() + 30
            while time.monotonic() < deadline:
                state = client.get(f"/jobs/{job['job_id']}").json()["state"]
                if state in ("done", "error"):
                    break
                time.sleep(0.02)
            assert state == "done", state

            snapshots = {
                "summary.json": f"/lectures/{LECTURE_ID}/summary",
                "timeline.json": f"/lectures/{LECTURE_ID}/timeline",
                f"sentences_{FEATURE}.json":
                    f"/lectures/{LECTURE_ID}/features/{FEATURE}/sentences",
            }
            for name, url in snapshots.items():
                body = client.get(url)
                assert body.status_code == 200
                (GOLDEN / name).write_bytes(body.content)
                print(f"{name}: {len(body.content)} bytes")


if __name__ == "__main__":
    main()
