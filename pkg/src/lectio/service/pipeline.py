"""Pipeline steps shared by the background worker and the CLI.

Each step is a thin composition of module operations operating through the
store; the worker wraps them in job bookkeeping, the CLI calls them
synchronously.
"""

from __future__ import annotations

import hashlib
import uuid
from pathlib import Path

from .. import asr_client
from ..classify import QUESTION_LABEL, predict
from ..errors import ForeignKeyError, LectioError, ValidationError
from ..events import round_time
from ..store import JobRecord, LectureRecord, Store
from ..summarize import (predictions_to_events, sentence_table,
                         sentence_table_payload, summarize_lecture,
                         summary_payload, timeline, timeline_payload)
from ..taxonomy import DidacticFeature, Taxonomy, default_taxonomy
from ..transcript import Transcript, parse_asr_json, reflow_sentences
from .bootstrap import load_builtin_model
from .config import ServiceConfig

_AUDIO_SUFFIXES = {".wav": "audio/wav", ".mp3": "audio/mpeg", ".m4a": "audio/mp4"}
_VIDEO_SUFFIXES = (".mp4", ".mkv", ".webm")


def new_id(prefix: str) -> str:
    return f"{prefix}-{uuid.uuid4().hex[:12]}"


def service_taxonomy(base: Taxonomy | None = None) -> Taxonomy:
    """The API's working taxonomy: the configured features plus a pseudo
    feature for the binary question model's reserved label, so question
    predictions chart like any other occurrence."""
    base = base or default_taxonomy()
    if any(f.id == QUESTION_LABEL for f in base.features):
        return base
    question = DidacticFeature(
        id=QUESTION_LABEL, display_name="Question sentences", category="audio",
        default_kind="point", text_classifiable=True, stp_areas=())
    return Taxonomy(version=base.version, features=base.features + (question,),
                    text_label_set=base.text_label_set)


def store_media_blob(config: ServiceConfig, data: bytes, suffix: str) -> Path:
    """Content-addressed media storage; returns the blob path."""
    digest = hashlib.sha256(data).hexdigest()
    path = config.media_dir / f"{digest}{suffix}"
    if not path.exists():
        path.write_bytes(data)
    return path


def ingest_transcript_document(store: Store, lecture: LectureRecord,
                               document: str, language: str = "en") -> Transcript:
    """Parse + reflow an ASR JSON document and persist it; the lecture jumps
    straight to transcribed."""
    segments = parse_asr_json(document)
    sentences = reflow_sentences(segments)
    transcript = Transcript(lecture_id=lecture.lecture_id, language=language,
                            sentences=tuple(sentences))
    store.put_transcript(transcript)
    store.set_lecture_duration(lecture.lecture_id, round_time(sentences[-1].end))
    store.transactional_status_update(lecture.lecture_id, "registered", "transcribing")
    store.transactional_status_update(lecture.lecture_id, "transcribing", "transcribed")
    return transcript


def run_transcription(store: Store, config: ServiceConfig, lecture_id: str):
    """Transcribe a registered lecture's stored media via the ASR service."""
    lecture = store.get_lecture(lecture_id)
    if lecture is None:
        raise ForeignKeyError(f"unknown lecture {lecture_id!r}")
    if lecture.source_uri is None:
        raise ValidationError(f"lecture {lecture_id} has no stored media")
    if config.asr_endpoint is None:
        raise ValidationError("no ASR endpoint configured (ASR_ENDPOINT)")

    media_path = Path(lecture.source_uri)
    suffix = media_path.suffix.lower()

    # preflight before any status change so failures leave the lecture
    # registered (notably a missing converter for video uploads)
    if suffix in _VIDEO_SUFFIXES:
        audio = asr_client.extract_audio(media_path)
        content_type = "audio/wav"
    elif suffix in _AUDIO_SUFFIXES:
        if not media_path.is_file():
            raise ValidationError(f"stored media missing: {media_path}")
        audio = media_path.read_bytes()
        content_type = _AUDIO_SUFFIXES[suffix]
    else:
        raise ValidationError(f"unsupported media suffix {suffix!r}")

    store.transactional_status_update(lecture_id, "registered", "transcribing")
    try:
        engine = asr_client.AsrEngineConfig(
            engine_id="configured", endpoint=config.asr_endpoint)
        document, _ = asr_client.transcribe(engine, audio, content_type)
        segments = parse_asr_json(document)
        sentences = reflow_sentences(segments)
        transcript = Transcript(lecture_id=lecture_id, language=engine.language,
                                sentences=tuple(sentences))
        store.put_transcript(transcript)
        store.set_lecture_duration(lecture_id, round_time(sentences[-1].end))
        store.transactional_status_update(lecture_id, "transcribing", "transcribed")
    except LectioError:
        store.transactional_status_update(lecture_id, "transcribing", "failed")
        raise


def run_analysis(store: Store, config: ServiceConfig, lecture_id: str,
                 model_id: str):
    """Predict sentence labels for a transcribed lecture and persist them."""
    lecture = store.get_lecture(lecture_id)
    if lecture is None:
        raise ForeignKeyError(f"unknown lecture {lecture_id!r}")
    descriptor = store.get_model(model_id)
    if descriptor is None:
        raise ForeignKeyError(f"unknown model {model_id!r}")
    transcript = store.get_transcript(lecture_id)
    if transcript is None:
        raise ValidationError(f"lecture {lecture_id} has no transcript yet")

    if descriptor.backend == "builtin_linear":
        model = load_builtin_model(descriptor, config.models_dir)
        predictions = predict(model, list(transcript.sentences))
    else:
        predictions = predict(descriptor, list(transcript.sentences))
    store.put_predictions(lecture_id, model_id, predictions)
    if store.get_lecture(lecture_id).status == "transcribed":
        store.transactional_status_update(lecture_id, "transcribed", "analyzed")


def queue_job(store: Store, lecture_id: str, kind: str,
              detail: dict | None = None) -> JobRecord:
    job = JobRecord(job_id=new_id("job"), lecture_id=lecture_id, kind=kind,
                    detail=detail)
    return store.create_job(job)


# -- read-side payload assembly (shared verbatim by API and CLI) ---------------

def lecture_payload(record: LectureRecord) -> dict:
    return {
        "lecture_id": record.lecture_id,
        "title": record.title,
        "duration": record.duration,
        "uploaded_at": record.uploaded_at,
        "source_uri": record.source_uri,
        "status": record.status,
    }


def job_payload(job: JobRecord) -> dict:
    return {
        "job_id": job.job_id,
        "lecture_id": job.lecture_id,
        "kind": job.kind,
        "state": job.state,
        "error_message": job.error_message,
        "created": job.created,
        "finished": job.finished,
    }


def model_payload(descriptor) -> dict:
    return {
        "model_id": descriptor.model_id,
        "task": descriptor.task,
        "backend": descriptor.backend,
        "label_set": list(descriptor.label_set),
        "threshold": descriptor.threshold,
        "endpoint": descriptor.endpoint,
        "version": descriptor.version,
    }


def _events_for(store: Store, lecture_id: str, source: str,
                model_id: str | None, taxonomy: Taxonomy):
    """Resolve the event list backing summary/timeline payloads.

    Returns (events, resolved_model_id). Missing predictions or gold yield an
    empty event list, not an error.
    """
    if source == "gold":
        gold = store.get_gold(lecture_id)
        return (list(gold.events) if gold else [], None)
    if model_id is None:
        model_id = store.latest_prediction_model(lecture_id)
        if model_id is None:
            return [], None
    predictions = store.get_predictions(lecture_id, model_id)
    transcript = store.get_transcript(lecture_id)
    if not predictions or transcript is None:
        return [], model_id
    return predictions_to_events(predictions, transcript, taxonomy), model_id


def summary_for(store: Store, lecture_id: str, source: str = "model",
                model_id: str | None = None,
                taxonomy: Taxonomy | None = None) -> dict:
    taxonomy = taxonomy or default_taxonomy()
    events, used_model = _events_for(store, lecture_id, source, model_id, taxonomy)
    summary = summarize_lecture(events, taxonomy, lecture_id=lecture_id,
                                source=source, model_id=used_model)
    return summary_payload(summary)


def timeline_for(store: Store, lecture_id: str, source: str = "model",
                 model_id: str | None = None,
                 taxonomy: Taxonomy | None = None) -> list[dict]:
    taxonomy = taxonomy or default_taxonomy()
    events, _ = _events_for(store, lecture_id, source, model_id, taxonomy)
    return timeline_payload(timeline(events, taxonomy))


def sentences_for(store: Store, lecture_id: str, feature_id: str,
                  model_id: str | None = None,
                  taxonomy: Taxonomy | None = None) -> list[dict]:
    taxonomy = taxonomy or default_taxonomy()
    transcript = store.get_transcript(lecture_id)
    predictions = store.get_predictions(lecture_id, model_id)
    if transcript is None:
        return sentence_table_payload([])
    rows = sentence_table(transcript, predictions, feature_id, taxonomy)
    return sentence_table_payload(rows)
