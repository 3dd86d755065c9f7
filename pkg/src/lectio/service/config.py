"""Service configuration and shared serialization helpers.

Settings resolve as flags > environment > defaults. Environment variables:
LISTEN_ADDR, DATA_DIR, ADMIN_TOKEN, ASR_ENDPOINT.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

from .. import errors


@dataclass
class ServiceConfig:
    data_dir: Path
    listen_addr: str = "127.0.0.1:8000"
    admin_token: str | None = None
    asr_endpoint: str | None = None
    worker_count: int = 2
    worker_poll_interval: float = 0.05
    ui_dir: Path | None = None

    @classmethod
    def from_env(cls, **overrides) -> "ServiceConfig":
        values = {
            "data_dir": Path(os.environ.get("DATA_DIR", "./lectio-data")),
            "listen_addr": os.environ.get("LISTEN_ADDR", "127.0.0.1:8000"),
            "admin_token": os.environ.get("ADMIN_TOKEN"),
            "asr_endpoint": os.environ.get("ASR_ENDPOINT"),
        }
        ui = os.environ.get("UI_DIR")
        if ui:
            values["ui_dir"] = Path(ui)
        for key, value in overrides.items():
            if value is not None:
                values[key] = value
        if isinstance(values["data_dir"], str):
            values["data_dir"] = Path(values["data_dir"])
        return cls(**values)

    @property
    def db_path(self) -> Path:
        return self.data_dir / "lectio.sqlite3"

    @property
    def media_dir(self) -> Path:
        return self.data_dir / "media"

    @property
    def models_dir(self) -> Path:
        return self.data_dir / "models"

    def ensure_dirs(self):
        for path in (self.data_dir, self.media_dir, self.models_dir):
            path.mkdir(parents=True, exist_ok=True)


def canonical_json(payload) -> str:
    """Stable byte-level JSON used by both the API and the CLI."""
    return json.dumps(payload, ensure_ascii=False, sort_keys=True,
                      separators=(",", ":"))


# LectioError subclass -> API error code
_ERROR_CODES = (
    (errors.ConflictError, "conflict"),
    (errors.StaleState, "conflict"),
    (errors.IllegalTransition, "invalid_state"),
    (errors.ForeignKeyError, "not_found"),
    (errors.UnknownFeature, "invalid_input"),
    (errors.RemoteUnavailable, "upstream_failed"),
    (errors.ProtocolError, "upstream_failed"),
    (errors.LabelMismatch, "upstream_failed"),
    (errors.EngineUnavailable, "upstream_failed"),
    (errors.EngineError, "upstream_failed"),
    (errors.SchemaError, "upstream_failed"),
    (errors.Timeout, "upstream_failed"),
    (errors.ToolMissing, "upstream_failed"),
    (errors.ConversionError, "upstream_failed"),
    (errors.IoError, "internal"),
    (errors.LectioError, "invalid_input"),
)

_HTTP_STATUS = {
    "invalid_input": 400,
    "unauthorized": 401,
    "not_found": 404,
    "conflict": 409,
    "invalid_state": 409,
    "upstream_failed": 502,
    "internal": 500,
}


def error_code_for(exc: Exception) -> str:
    for klass, code in _ERROR_CODES:
        if isinstance(exc, klass):
            return code
    return "internal"


def http_status_for(code: str) -> int:
    return _HTTP_STATUS.get(code, 500)
