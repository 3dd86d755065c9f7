"""Durable persistence for lectures, transcripts, annotations, models,
predictions, and jobs.

Backed by a single-file sqlite database (schema in docs/schema.md). All
access goes through one connection guarded by a process lock: writes are
serialized, reads see committed state, and the compare-and-swap status
update is a single UPDATE statement, so exactly one of two racing updates
succeeds.
"""

from __future__ import annotations

import datetime as dt
import json
import sqlite3
import threading
from dataclasses import dataclass

from .classify import ModelDescriptor, Prediction
from .consensus import ConsensusConfig, GoldAnnotation
from .errors import (ConflictError, ForeignKeyError, IllegalTransition, IoError,
                     StaleState, ValidationError)
from .events import Event, Observation
from .transcript import SentenceRecord, Transcript

LECTURE_STATUSES = ("registered", "transcribing", "transcribed", "analyzed", "failed")
_STATUS_ORDER = ("registered", "transcribing", "transcribed", "analyzed")
JOB_STATES = ("queued", "running", "done", "error")

SCHEMA_VERSION = 1

_SCHEMA = """
CREATE TABLE IF NOT EXISTS lectures (
    lecture_id TEXT PRIMARY KEY,
    title TEXT NOT NULL,
    duration REAL,
    uploaded_at TEXT NOT NULL,
    source_uri TEXT,
    status TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS transcripts (
    lecture_id TEXT PRIMARY KEY,
    language TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS sentences (
    lecture_id TEXT NOT NULL,
    sentence_id INTEGER NOT NULL,
    start REAL NOT NULL,
    "end" REAL NOT NULL,
    text TEXT NOT NULL,
    PRIMARY KEY (lecture_id, sentence_id)
);
CREATE TABLE IF NOT EXISTS observations (
    obs_key INTEGER PRIMARY KEY AUTOINCREMENT,
    lecture_id TEXT NOT NULL,
    annotator_id TEXT NOT NULL,
    source TEXT NOT NULL,
    model_id TEXT
);
CREATE TABLE IF NOT EXISTS events (
    obs_key INTEGER NOT NULL,
    feature_id TEXT NOT NULL,
    kind TEXT NOT NULL,
    start REAL NOT NULL,
    "end" REAL
);
CREATE TABLE IF NOT EXISTS gold_events (
    lecture_id TEXT NOT NULL,
    event_index INTEGER NOT NULL,
    feature_id TEXT NOT NULL,
    kind TEXT NOT NULL,
    start REAL NOT NULL,
    "end" REAL,
    support INTEGER NOT NULL,
    annotator_count INTEGER NOT NULL,
    config TEXT NOT NULL,
    PRIMARY KEY (lecture_id, event_index)
);
CREATE TABLE IF NOT EXISTS models (
    model_id TEXT PRIMARY KEY,
    task TEXT NOT NULL,
    backend TEXT NOT NULL,
    label_set TEXT NOT NULL,
    threshold TEXT NOT NULL,
    endpoint TEXT,
    version TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS predictions (
    lecture_id TEXT NOT NULL,
    model_id TEXT NOT NULL,
    sentence_id INTEGER NOT NULL,
    scores TEXT NOT NULL,
    decided TEXT NOT NULL,
    PRIMARY KEY (lecture_id, model_id, sentence_id)
);
CREATE TABLE IF NOT EXISTS jobs (
    job_id TEXT PRIMARY KEY,
    lecture_id TEXT NOT NULL,
    kind TEXT NOT NULL,
    state TEXT NOT NULL,
    error_message TEXT,
    created TEXT NOT NULL,
    finished TEXT,
    detail TEXT
);
"""


def utc_now() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")


@dataclass(frozen=True)
class LectureRecord:
    lecture_id: str
    title: str
    status: str = "registered"
    duration: float | None = None
    uploaded_at: str = ""
    source_uri: str | None = None

    def __post_init__(self):
        if self.status not in LECTURE_STATUSES:
            raise ValidationError(f"unknown lecture status {self.status!r}")


@dataclass(frozen=True)
class JobRecord:
    job_id: str
    lecture_id: str
    kind: str  # "transcribe" | "analyze"
    state: str = "queued"
    error_message: str | None = None
    created: str = ""
    finished: str | None = None
    detail: dict | None = None  # e.g. {"model_id": ...} for analyze jobs

    def __post_init__(self):
        if self.kind not in ("transcribe", "analyze"):
            raise ValidationError(f"unknown job kind {self.kind!r}")
        if self.state not in JOB_STATES:
            raise ValidationError(f"unknown job state {self.state!r}")


def legal_transition(from_status: str, to_status: str) -> bool:
    if to_status == "failed":
        return True
    if from_status in _STATUS_ORDER and to_status in _STATUS_ORDER:
        return _STATUS_ORDER.index(to_status) == _STATUS_ORDER.index(from_status) + 1
    return False


class Store:
    """Single-file persistent store; safe for concurrent callers in-process."""

    def __init__(self, path: str):
        self.path = path
        self._lock = threading.RLock()
        try:
            # autocommit mode so explicit BEGIN/COMMIT pairs group transactions
            self._db = sqlite3.connect(path, check_same_thread=False,
                                       isolation_level=None)
        except sqlite3.Error as exc:
            raise IoError(f"cannot open store at {path}: {exc}") from exc
        self._db.row_factory = sqlite3.Row
        with self._lock:
            self._db.executescript(_SCHEMA)
            self._db.execute(f"PRAGMA user_version = {SCHEMA_VERSION}")
            self._db.commit()

    def close(self):
        with self._lock:
            self._db.close()

    def _require_lecture(self, lecture_id: str):
        row = self._db.execute(
            "SELECT 1 FROM lectures WHERE lecture_id = ?", (lecture_id,)).fetchone()
        if row is None:
            raise ForeignKeyError(f"unknown lecture {lecture_id!r}")

    # -- lectures -----------------------------------------------------------

    def put_lecture(self, record: LectureRecord) -> LectureRecord:
        with self._lock:
            if record.uploaded_at == "":
                record = LectureRecord(
                    lecture_id=record.lecture_id, title=record.title,
                    status=record.status, duration=record.duration,
                    uploaded_at=utc_now(), source_uri=record.source_uri)
            try:
                self._db.execute(
                    "INSERT INTO lectures (lecture_id, title, duration, uploaded_at,"
                    " source_uri, status) VALUES (?, ?, ?, ?, ?, ?)",
                    (record.lecture_id, record.title, record.duration,
                     record.uploaded_at, record.source_uri, record.status))
            except sqlite3.IntegrityError:
                raise ConflictError(f"lecture {record.lecture_id!r} already exists")
            self._db.commit()
            return record

    def get_lecture(self, lecture_id: str) -> LectureRecord | None:
        with self._lock:
            row = self._db.execute(
                "SELECT * FROM lectures WHERE lecture_id = ?", (lecture_id,)).fetchone()
        return self._lecture_from_row(row) if row else None

    def list_lectures(self) -> list[LectureRecord]:
        with self._lock:
            rows = self._db.execute(
                "SELECT * FROM lectures ORDER BY rowid").fetchall()
        return [self._lecture_from_row(r) for r in rows]

    @staticmethod
    def _lecture_from_row(row) -> LectureRecord:
        return LectureRecord(
            lecture_id=row["lecture_id"], title=row["title"],
            status=row["status"], duration=row["duration"],
            uploaded_at=row["uploaded_at"], source_uri=row["source_uri"])

    def set_lecture_duration(self, lecture_id: str, duration: float):
        with self._lock:
            self._require_lecture(lecture_id)
            self._db.execute(
                "UPDATE lectures SET duration = ? WHERE lecture_id = ?",
                (duration, lecture_id))
            self._db.commit()

    def transactional_status_update(self, lecture_id: str, from_status: str,
                                    to_status: str) -> LectureRecord:
        """Compare-and-swap the lecture status; exactly one of two racing
        identical updates succeeds."""
        if not legal_transition(from_status, to_status):
            raise IllegalTransition(f"{from_status} -> {to_status}")
        with self._lock:
            self._require_lecture(lecture_id)
            cursor = self._db.execute(
                "UPDATE lectures SET status = ? WHERE lecture_id = ? AND status = ?",
                (to_status, lecture_id, from_status))
            self._db.commit()
            if cursor.rowcount != 1:
                current = self.get_lecture(lecture_id).status
                raise StaleState(
                    f"lecture {lecture_id} is {current}, expected {from_status}")
            return self.get_lecture(lecture_id)

    def purge_lecture(self, lecture_id: str):
        """Manual retention: drop a lecture and everything hanging off it."""
        with self._lock:
            self._require_lecture(lecture_id)
            self._db.execute("BEGIN")
            keys = [r["obs_key"] for r in self._db.execute(
                "SELECT obs_key FROM observations WHERE lecture_id = ?",
                (lecture_id,))]
            if keys:
                self._db.executemany("DELETE FROM events WHERE obs_key = ?",
                                     [(k,) for k in keys])
            for table in ("observations", "gold_events", "predictions",
                          "sentences", "transcripts", "jobs", "lectures"):
                self._db.execute(
                    f"DELETE FROM {table} WHERE lecture_id = ?", (lecture_id,))
            self._db.commit()

    # -- transcripts ----------------------------------------------------------

    def put_transcript(self, transcript: Transcript):
        with self._lock:
            self._require_lecture(transcript.lecture_id)
            self._db.execute("BEGIN")
            self._db.execute(
                "DELETE FROM sentences WHERE lecture_id = ?", (transcript.lecture_id,))
            self._db.execute(
                "INSERT OR REPLACE INTO transcripts (lecture_id, language) VALUES (?, ?)",
                (transcript.lecture_id, transcript.language))
            self._db.executemany(
                'INSERT INTO sentences (lecture_id, sentence_id, start, "end", text)'
                " VALUES (?, ?, ?, ?, ?)",
                [(transcript.lecture_id, s.sentence_id, s.start, s.end, s.text)
                 for s in transcript.sentences])
            self._db.commit()

    def get_transcript(self, lecture_id: str) -> Transcript | None:
        with self._lock:
            head = self._db.execute(
                "SELECT language FROM transcripts WHERE lecture_id = ?",
                (lecture_id,)).fetchone()
            if head is None:
                return None
            rows = self._db.execute(
                'SELECT sentence_id, start, "end", text FROM sentences'
                " WHERE lecture_id = ? ORDER BY sentence_id", (lecture_id,)).fetchall()
        sentences = tuple(
            SentenceRecord(sentence_id=r["sentence_id"], start=r["start"],
                           end=r["end"], text=r["text"]) for r in rows)
        return Transcript(lecture_id=lecture_id, language=head["language"],
                          sentences=sentences)

    # -- observations -----------------------------------------------------------

    def put_observation(self, obs: Observation):
        with self._lock:
            self._require_lecture(obs.lecture_id)
            lecture = self.get_lecture(obs.lecture_id)
            if lecture.duration is not None:
                for e in obs.events:
                    last = e.end if e.end is not None else e.start
                    if last > lecture.duration:
                        raise ValidationError(
                            f"event at {last}s beyond lecture duration "
                            f"{lecture.duration}s")
            self._db.execute("BEGIN")
            cursor = self._db.execute(
                "INSERT INTO observations (lecture_id, annotator_id, source, model_id)"
                " VALUES (?, ?, ?, ?)",
                (obs.lecture_id, obs.annotator_id, obs.source, obs.model_id))
            obs_key = cursor.lastrowid
            self._db.executemany(
                'INSERT INTO events (obs_key, feature_id, kind, start, "end")'
                " VALUES (?, ?, ?, ?, ?)",
                [(obs_key, e.feature_id, e.kind, e.start, e.end)
                 for e in obs.events])
            self._db.commit()

    def list_observations(self, lecture_id: str) -> list[Observation]:
        with self._lock:
            heads = self._db.execute(
                "SELECT * FROM observations WHERE lecture_id = ? ORDER BY obs_key",
                (lecture_id,)).fetchall()
            observations = []
            for head in heads:
                rows = self._db.execute(
                    'SELECT feature_id, kind, start, "end" FROM events'
                    " WHERE obs_key = ? ORDER BY rowid", (head["obs_key"],)).fetchall()
                observations.append(Observation(
                    lecture_id=head["lecture_id"],
                    annotator_id=head["annotator_id"],
                    events=tuple(Event(r["feature_id"], r["kind"], r["start"],
                                       r["end"]) for r in rows),
                    source=head["source"],
                    model_id=head["model_id"]))
        return observations

    # -- gold ---------------------------------------------------------------------

    def put_gold(self, gold: GoldAnnotation):
        with self._lock:
            self._require_lecture(gold.lecture_id)
            config_json = json.dumps({
                "min_support": gold.config.min_support,
                "point_cluster_window": gold.config.point_cluster_window,
                "min_state_duration": gold.config.min_state_duration,
                "max_merge_gap": gold.config.max_merge_gap,
                "grid_step": gold.config.grid_step,
            }, sort_keys=True)
            self._db.execute("BEGIN")
            self._db.execute(
                "DELETE FROM gold_events WHERE lecture_id = ?", (gold.lecture_id,))
            self._db.executemany(
                "INSERT INTO gold_events (lecture_id, event_index, feature_id, kind,"
                ' start, "end", support, annotator_count, config)'
                " VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)",
                [(gold.lecture_id, i, e.feature_id, e.kind, e.start, e.end,
                  gold.support.get(i, 0), gold.annotator_count, config_json)
                 for i, e in enumerate(gold.events)])
            self._db.commit()

    def get_gold(self, lecture_id: str) -> GoldAnnotation | None:
        with self._lock:
            rows = self._db.execute(
                "SELECT * FROM gold_events WHERE lecture_id = ? ORDER BY event_index",
                (lecture_id,)).fetchall()
        if not rows:
            return None
        config = ConsensusConfig(**json.loads(rows[0]["config"]))
        events = tuple(Event(r["feature_id"], r["kind"], r["start"], r["end"])
                       for r in rows)
        support = {i: r["support"] for i, r in enumerate(rows)}
        return GoldAnnotation(lecture_id=lecture_id, events=events, support=support,
                              config=config, annotator_count=rows[0]["annotator_count"])

    # -- models ----------------------------------------------------------------------

    def put_model(self, descriptor: ModelDescriptor):
        with self._lock:
            try:
                self._db.execute(
                    "INSERT INTO models (model_id, task, backend, label_set,"
                    " threshold, endpoint, version) VALUES (?, ?, ?, ?, ?, ?, ?)",
                    (descriptor.model_id, descriptor.task, descriptor.backend,
                     json.dumps(list(descriptor.label_set)),
                     json.dumps(descriptor.threshold), descriptor.endpoint,
                     descriptor.version))
            except sqlite3.IntegrityError:
                raise ConflictError(f"model {descriptor.model_id!r} already exists")
            self._db.commit()

    def get_model(self, model_id: str) -> ModelDescriptor | None:
        with self._lock:
            row = self._db.execute(
                "SELECT * FROM models WHERE model_id = ?", (model_id,)).fetchone()
        if row is None:
            return None
        threshold = json.loads(row["threshold"])
        return ModelDescriptor(
            model_id=row["model_id"], task=row["task"], backend=row["backend"],
            label_set=tuple(json.loads(row["label_set"])), threshold=threshold,
            endpoint=row["endpoint"], version=row["version"])

    def list_models(self) -> list[ModelDescriptor]:
        with self._lock:
            rows = self._db.execute("SELECT model_id FROM models ORDER BY rowid")
            ids = [r["model_id"] for r in rows]
        return [self.get_model(mid) for mid in ids]

    def delete_model(self, model_id: str) -> bool:
        with self._lock:
            cursor = self._db.execute(
                "DELETE FROM models WHERE model_id = ?", (model_id,))
            self._db.commit()
            return cursor.rowcount == 1

    # -- predictions -------------------------------------------------------------------

    def put_predictions(self, lecture_id: str, model_id: str,
                        predictions: list[Prediction]):
        """Replace the (lecture, model) prediction set atomically."""
        with self._lock:
            self._require_lecture(lecture_id)
            if self.get_model(model_id) is None:
                raise ForeignKeyError(f"unknown model {model_id!r}")
            self._db.execute("BEGIN")
            self._db.execute(
                "DELETE FROM predictions WHERE lecture_id = ? AND model_id = ?",
                (lecture_id, model_id))
            self._db.executemany(
                "INSERT INTO predictions (lecture_id, model_id, sentence_id,"
                " scores, decided) VALUES (?, ?, ?, ?, ?)",
                [(lecture_id, model_id, p.sentence_id,
                  json.dumps(p.scores, sort_keys=True),
                  json.dumps(sorted(p.decided)))
                 for p in predictions])
            self._db.commit()

    def get_predictions(self, lecture_id: str,
                        model_id: str | None = None) -> list[Prediction]:
        with self._lock:
            if model_id is None:
                model_id = self.latest_prediction_model(lecture_id)
                if model_id is None:
                    return []
            rows = self._db.execute(
                "SELECT sentence_id, scores, decided FROM predictions"
                " WHERE lecture_id = ? AND model_id = ? ORDER BY sentence_id",
                (lecture_id, model_id)).fetchall()
        return [
            Prediction(sentence_id=r["sentence_id"],
                       scores=json.loads(r["scores"]),
                       decided=frozenset(json.loads(r["decided"])))
            for r in rows
        ]

    def latest_prediction_model(self, lecture_id: str) -> str | None:
        with self._lock:
            row = self._db.execute(
                "SELECT model_id FROM predictions WHERE lecture_id = ?"
                " ORDER BY rowid DESC LIMIT 1", (lecture_id,)).fetchone()
        return row["model_id"] if row else None

    # -- jobs --------------------------------------------------------------------------

    def create_job(self, job: JobRecord) -> JobRecord:
        with self._lock:
            self._require_lecture(job.lecture_id)
            if job.created == "":
                job = JobRecord(job_id=job.job_id, lecture_id=job.lecture_id,
                                kind=job.kind, state=job.state,
                                error_message=job.error_message,
                                created=utc_now(), finished=job.finished,
                                detail=job.detail)
            try:
                self._db.execute(
                    "INSERT INTO jobs (job_id, lecture_id, kind, state,"
                    " error_message, created, finished, detail)"
                    " VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
                    (job.job_id, job.lecture_id, job.kind, job.state,
                     job.error_message, job.created, job.finished,
                     json.dumps(job.detail) if job.detail is not None else None))
            except sqlite3.IntegrityError:
                raise ConflictError(f"job {job.job_id!r} already exists")
            self._db.commit()
            return job

    def get_job(self, job_id: str) -> JobRecord | None:
        with self._lock:
            row = self._db.execute(
                "SELECT * FROM jobs WHERE job_id = ?", (job_id,)).fetchone()
        if row is None:
            return None
        return JobRecord(job_id=row["job_id"], lecture_id=row["lecture_id"],
                         kind=row["kind"], state=row["state"],
                         error_message=row["error_message"],
                         created=row["created"], finished=row["finished"],
                         detail=json.loads(row["detail"]) if row["detail"] else None)

    def list_jobs(self, state: str | None = None) -> list[JobRecord]:
        with self._lock:
            if state is None:
                rows = self._db.execute("SELECT job_id FROM jobs ORDER BY rowid")
            else:
                rows = self._db.execute(
                    "SELECT job_id FROM jobs WHERE state = ? ORDER BY rowid", (state,))
            ids = [r["job_id"] for r in rows]
        return [self.get_job(jid) for jid in ids]

    def claim_job(self) -> JobRecord | None:
        """Atomically move one queued job to running, skipping lectures that
        already have a running job (per-lecture mutual exclusion)."""
        with self._lock:
            row = self._db.execute(
                "SELECT job_id FROM jobs WHERE state = 'queued' AND lecture_id NOT IN"
                " (SELECT lecture_id FROM jobs WHERE state = 'running')"
                " ORDER BY rowid LIMIT 1").fetchone()
            if row is None:
                return None
            self._db.execute(
                "UPDATE jobs SET state = 'running' WHERE job_id = ?", (row["job_id"],))
            self._db.commit()
            return self.get_job(row["job_id"])

    def finish_job(self, job_id: str, state: str, error_message: str | None = None):
        if state not in ("done", "error"):
            raise ValidationError("jobs finish as done or error")
        if (state == "error") != (error_message is not None):
            raise ValidationError("error_message present iff state is error")
        with self._lock:
            self._db.execute(
                "UPDATE jobs SET state = ?, error_message = ?, finished = ?"
                " WHERE job_id = ?", (state, error_message, utc_now(), job_id))
            self._db.commit()

    def requeue_stale_jobs(self) -> int:
        """Return crashed 'running' jobs to the queue (startup recovery)."""
        with self._lock:
            cursor = self._db.execute(
                "UPDATE jobs SET state = 'queued' WHERE state = 'running'")
            self._db.commit()
            return cursor.rowcount

    # -- integrity ------------------------------------------------------------------------

    def integrity_scan(self) -> list[str]:
        """Foreign-key closure check; empty list means clean."""
        problems = []
        with self._lock:
            queries = (
                ("transcripts", "SELECT lecture_id FROM transcripts WHERE lecture_id"
                                " NOT IN (SELECT lecture_id FROM lectures)"),
                ("sentences", "SELECT DISTINCT lecture_id FROM sentences WHERE"
                              " lecture_id NOT IN (SELECT lecture_id FROM lectures)"),
                ("observations", "SELECT DISTINCT lecture_id FROM observations WHERE"
                                 " lecture_id NOT IN (SELECT lecture_id FROM lectures)"),
                ("gold_events", "SELECT DISTINCT lecture_id FROM gold_events WHERE"
                                " lecture_id NOT IN (SELECT lecture_id FROM lectures)"),
                ("predictions", "SELECT DISTINCT lecture_id FROM predictions WHERE"
                                " lecture_id NOT IN (SELECT lecture_id FROM lectures)"),
                ("predictions(model)", "SELECT DISTINCT model_id FROM predictions WHERE"
                                       " model_id NOT IN (SELECT model_id FROM models)"),
                ("jobs", "SELECT DISTINCT lecture_id FROM jobs WHERE lecture_id"
                         " NOT IN (SELECT lecture_id FROM lectures)"),
                ("events", "SELECT DISTINCT obs_key FROM events WHERE obs_key"
                           " NOT IN (SELECT obs_key FROM observations)"),
            )
            for name, sql in queries:
                for row in self._db.execute(sql):
                    problems.append(f"{name}: orphaned reference {tuple(row)}")
        return problems
