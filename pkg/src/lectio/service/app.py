"""HTTP API serving the dashboard and headless clients.

Read endpoints return the summarize payloads byte-for-byte (stable JSON
serialization shared with the CLI). Long-running work (transcription,
analysis) goes through the persistent job queue; clients poll /jobs/{id}.
Errors come back as {"code", "message", "detail"?} with matching HTTP
status.
"""

from __future__ import annotations

import contextlib
import csv
import io
import json

from fastapi import FastAPI, Form, Request, Response, UploadFile
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..classify import ModelDescriptor
from ..errors import LectioError, ValidationError
from ..store import LectureRecord, Store
from ..taxonomy import feature_by_id
from .bootstrap import ensure_default_models
from .config import ServiceConfig, canonical_json, error_code_for, http_status_for
from .jobs import JobWorkerPool
from .pipeline import (ingest_transcript_document, job_payload, lecture_payload,
                       model_payload, new_id, queue_job, sentences_for,
                       service_taxonomy, store_media_blob, summary_for,
                       timeline_for)

_MEDIA_SUFFIXES = {
    "audio/wav": ".wav", "audio/x-wav": ".wav", "audio/mpeg": ".mp3",
    "audio/mp4": ".m4a", "video/mp4": ".mp4", "video/x-matroska": ".mkv",
    "video/webm": ".webm",
}


class ApiError(Exception):
    """Error carrying a documented API code; rendered as the error payload."""

    def __init__(self, code: str, message: str, detail=None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.detail = detail


def _json_response(payload, status_code: int = 200) -> Response:
    return Response(content=canonical_json(payload), status_code=status_code,
                    media_type="application/json")


def _error_response(code: str, message: str, detail=None) -> JSONResponse:
    body = {"code": code, "message": message}
    if detail is not None:
        body["detail"] = detail
    return JSONResponse(status_code=http_status_for(code), content=body)


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig.from_env()
    config.ensure_dirs()
    taxonomy = service_taxonomy()

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        store = Store(str(config.db_path))
        ensure_default_models(store, config.models_dir, taxonomy)
        pool = JobWorkerPool(store, config)
        pool.start()
        app.state.store = store
        app.state.pool = pool
        try:
            yield
        finally:
            pool.stop()
            store.close()

    app = FastAPI(title="lectio", lifespan=lifespan)
    app.state.config = config

    def store_of(request: Request) -> Store:
        return request.app.state.store

    @app.exception_handler(ApiError)
    async def on_api_error(request: Request, exc: ApiError):
        return _error_response(exc.code, exc.message, exc.detail)

    @app.exception_handler(LectioError)
    async def on_lectio_error(request: Request, exc: LectioError):
        return _error_response(error_code_for(exc), str(exc))

    def require_admin(request: Request):
        token = config.admin_token
        header = request.headers.get("authorization", "")
        presented = header.removeprefix("Bearer ").strip() if header else ""
        if not token or presented != token:
            raise ApiError("unauthorized", "admin token required")

    def require_lecture(store: Store, lecture_id: str) -> LectureRecord:
        lecture = store.get_lecture(lecture_id)
        if lecture is None:
            raise ApiError("not_found", f"unknown lecture {lecture_id!r}")
        return lecture

    # -- lectures ------------------------------------------------------------

    @app.post("/lectures")
    async def post_lecture(request: Request,
                           title: str = Form(...),
                           lecture_id: str | None = Form(None),
                           media: UploadFile | None = None,
                           transcript: UploadFile | None = None):
        store = store_of(request)
        if (media is None) == (transcript is None):
            raise ApiError("invalid_input",
                           "provide exactly one of 'media' or 'transcript'")
        lid = lecture_id or new_id("lec")

        if transcript is not None:
            document = (await transcript.read()).decode("utf-8")
            record = store.put_lecture(LectureRecord(
                lecture_id=lid, title=title, source_uri=None))
            try:
                ingest_transcript_document(store, record, document)
            except LectioError:
                store.purge_lecture(lid)
                raise
            return _json_response({
                "lecture": lecture_payload(store.get_lecture(lid)),
                "job_id": None,
            }, status_code=201)

        data = await media.read()
        if not data:
            raise ApiError("invalid_input", "empty media upload")
        suffix = _MEDIA_SUFFIXES.get(media.content_type or "")
        if suffix is None:
            name = media.filename or ""
            suffix = "." + name.rsplit(".", 1)[-1].lower() if "." in name else ""
        if suffix not in (".wav", ".mp3", ".m4a", ".mp4", ".mkv", ".webm"):
            raise ApiError("invalid_input",
                           f"unsupported media type {media.content_type!r}")
        blob = store_media_blob(config, data, suffix)
        record = store.put_lecture(LectureRecord(
            lecture_id=lid, title=title, source_uri=str(blob)))
        job = queue_job(store, lid, "transcribe")
        return _json_response({
            "lecture": lecture_payload(record),
            "job_id": job.job_id,
        }, status_code=201)

    @app.get("/lectures")
    async def get_lectures(request: Request):
        store = store_of(request)
        return _json_response([lecture_payload(l) for l in store.list_lectures()])

    @app.post("/lectures/{lecture_id}/analyze")
    async def post_analyze(request: Request, lecture_id: str, model: str):
        store = store_of(request)
        lecture = require_lecture(store, lecture_id)
        if store.get_model(model) is None:
            raise ApiError("not_found", f"unknown model {model!r}")
        if lecture.status not in ("transcribed", "analyzed"):
            raise ApiError("invalid_state",
                           f"lecture is {lecture.status}, not transcribed yet")
        job = queue_job(store, lecture_id, "analyze", detail={"model_id": model})
        return _json_response(job_payload(job), status_code=202)

    @app.get("/lectures/{lecture_id}/summary")
    async def get_summary(request: Request, lecture_id: str,
                          source: str = "model", model: str | None = None):
        store = store_of(request)
        require_lecture(store, lecture_id)
        _check_source(source)
        _check_model(store, model)
        return _json_response(summary_for(store, lecture_id, source, model, taxonomy))

    @app.get("/lectures/{lecture_id}/timeline")
    async def get_timeline(request: Request, lecture_id: str,
                           source: str = "model", model: str | None = None):
        store = store_of(request)
        require_lecture(store, lecture_id)
        _check_source(source)
        _check_model(store, model)
        return _json_response(timeline_for(store, lecture_id, source, model, taxonomy))

    @app.get("/lectures/{lecture_id}/features/{feature_id}/sentences")
    async def get_feature_sentences(request: Request, lecture_id: str,
                                    feature_id: str, model: str | None = None):
        store = store_of(request)
        require_lecture(store, lecture_id)
        if feature_by_id(taxonomy, feature_id) is None:
            raise ApiError("invalid_input", f"unknown feature {feature_id!r}")
        _check_model(store, model)
        return _json_response(sentences_for(store, lecture_id, feature_id, model,
                                            taxonomy))

    @app.get("/lectures/{lecture_id}/transcript")
    async def get_transcript(request: Request, lecture_id: str):
        store = store_of(request)
        require_lecture(store, lecture_id)
        transcript = store.get_transcript(lecture_id)
        if transcript is None:
            raise ApiError("not_found", f"lecture {lecture_id} has no transcript")
        accept = request.headers.get("accept", "")
        if "text/csv" in accept:
            out = io.StringIO()
            writer = csv.writer(out, lineterminator="\n")
            writer.writerow(("sentence_id", "start", "end", "text"))
            for s in transcript.sentences:
                writer.writerow((s.sentence_id, s.start, s.end, s.text))
            return Response(content=out.getvalue(), media_type="text/csv")
        payload = {
            "text": " ".join(s.text for s in transcript.sentences),
            "segments": [
                {"id": s.sentence_id, "start": s.start, "end": s.end, "text": s.text}
                for s in transcript.sentences
            ],
        }
        return _json_response(payload)

    @app.get("/trends")
    async def get_trends(request: Request, lectures: str):
        from ..summarize import summarize_lecture, trends, trends_payload
        from .pipeline import _events_for

        store = store_of(request)
        ids = [part for part in lectures.split(",") if part]
        if not ids:
            raise ApiError("invalid_input", "no lecture ids given")
        summaries = []
        durations = {}
        for lid in ids:
            lecture = store.get_lecture(lid)
            if lecture is None:
                raise ApiError("not_found", f"unknown lecture {lid!r}")
            if lecture.duration is None:
                raise ApiError("invalid_input", f"lecture {lid!r} has no duration yet")
            events, used_model = _events_for(store, lid, "model", None, taxonomy)
            summaries.append(summarize_lecture(
                events, taxonomy, lecture_id=lid, source="model",
                model_id=used_model))
            durations[lid] = lecture.duration
        return _json_response(trends_payload(trends(summaries, durations)))

    # -- models ---------------------------------------------------------------

    @app.get("/models")
    async def get_models(request: Request):
        store = store_of(request)
        return _json_response([model_payload(m) for m in store.list_models()])

    @app.post("/models")
    async def post_model(request: Request):
        require_admin(request)
        store = store_of(request)
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            raise ApiError("invalid_input", f"invalid JSON body: {exc}")
        try:
            descriptor = ModelDescriptor(
                model_id=str(body["model_id"]),
                task=str(body["task"]),
                backend=str(body["backend"]),
                label_set=tuple(body["label_set"]),
                threshold=body.get("threshold", 0.5),
                endpoint=body.get("endpoint"),
                version=str(body.get("version", "1")),
            )
        except KeyError as exc:
            raise ApiError("invalid_input", f"missing field {exc}")
        except ValidationError as exc:
            raise ApiError("invalid_input", str(exc))
        store.put_model(descriptor)
        return _json_response(model_payload(descriptor), status_code=201)

    @app.delete("/models/{model_id}")
    async def delete_model(request: Request, model_id: str):
        require_admin(request)
        store = store_of(request)
        if not store.delete_model(model_id):
            raise ApiError("not_found", f"unknown model {model_id!r}")
        return _json_response({"deleted": model_id})

    # -- jobs --------------------------------------------------------------------

    @app.get("/jobs/{job_id}")
    async def get_job(request: Request, job_id: str):
        store = store_of(request)
        job = store.get_job(job_id)
        if job is None:
            raise ApiError("not_found", f"unknown job {job_id!r}")
        return _json_response(job_payload(job))

    def _check_source(source: str):
        if source not in ("model", "gold"):
            raise ApiError("invalid_input", f"unknown source {source!r}")

    def _check_model(store: Store, model: str | None):
        if model is not None and store.get_model(model) is None:
            raise ApiError("not_found", f"unknown model {model!r}")

    if config.ui_dir is not None and config.ui_dir.is_dir():
        app.mount("/ui", StaticFiles(directory=str(config.ui_dir), html=True),
                  name="ui")

    return app
