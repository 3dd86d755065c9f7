"""Persistent job queue worker pool.

Jobs live in the store, so nothing is lost across restarts: stale 'running'
claims re-enter the queue on startup, and claiming enforces at most one
running job per lecture. Workers poll; clients poll /jobs/{id}.
"""

from __future__ import annotations

import logging
import threading

from ..errors import LectioError
from ..store import JobRecord, Store
from .config import ServiceConfig, error_code_for
from .pipeline import run_analysis, run_transcription

log = logging.getLogger(__name__)


class JobWorkerPool:
    def __init__(self, store: Store, config: ServiceConfig):
        self.store = store
        self.config = config
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []

    def start(self):
        self.store.requeue_stale_jobs()
        for i in range(self.config.worker_count):
            thread = threading.Thread(target=self._loop, name=f"lectio-worker-{i}",
                                      daemon=True)
            thread.start()
            self._threads.append(thread)

    def stop(self):
        self._stop.set()
        for thread in self._threads:
            thread.join(timeout=10)
        self._threads.clear()

    def _loop(self):
        while not self._stop.is_set():
            job = self.store.claim_job()
            if job is None:
                self._stop.wait(self.config.worker_poll_interval)
                continue
            self._run(job)

    def _run(self, job: JobRecord):
        try:
            if job.kind == "transcribe":
                run_transcription(self.store, self.config, job.lecture_id)
            else:
                model_id = (job.detail or {}).get("model_id")
                if not model_id:
                    raise LectioError("analyze job has no model_id")
                run_analysis(self.store, self.config, job.lecture_id, model_id)
            self.store.finish_job(job.job_id, "done")
        except LectioError as exc:
            log.warning("job %s failed: %s", job.job_id, exc)
            self.store.finish_job(job.job_id, "error",
                                  f"{error_code_for(exc)}: {exc}")
        except Exception as exc:  # keep the worker alive on bugs
            log.exception("job %s crashed", job.job_id)
            self.store.finish_job(job.job_id, "error", f"internal: {exc}")

    def drain(self, timeout: float = 30.0):
        """Block until no queued or running jobs remain (test helper)."""
        import time

        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            pending = self.store.list_jobs("queued") + self.store.list_jobs("running")
            if not pending:
                return
            time.sleep(0.02)
        raise TimeoutError("jobs did not settle in time")
