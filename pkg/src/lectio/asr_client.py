"""Client for an external speech-recognition service.

Transcription always happens out of process: either over HTTP against a
configured engine endpoint, or not at all (callers can ingest transcript
files directly). Video containers are reduced to mono 16kHz WAV via an
external converter subprocess before upload.
"""

from __future__ import annotations

import shutil
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

import httpx

from .errors import (ConversionError, EngineError, EngineUnavailable, OrderError,
                     ParseError, SchemaError, Timeout, ToolMissing,
                     ValidationError)
from .transcript import AsrSegment, parse_asr_json

ACCEPTED_AUDIO = {
    "audio/wav": "wav",
    "audio/x-wav": "wav",
    "audio/mpeg": "mp3",
    "audio/mp4": "m4a",
}
ACCEPTED_VIDEO_SUFFIXES = (".mp4", ".mkv", ".webm")
MAX_UPLOAD_BYTES = 2 * 1024 ** 3

CONVERTER = "ffmpeg"
LANGUAGE_HEADER = "X-Language-Hint"


@dataclass(frozen=True)
class AsrEngineConfig:
    engine_id: str
    endpoint: str
    timeout: float = 600.0
    language: str = "en"

    def __post_init__(self):
        if not self.endpoint.startswith(("http://", "https://")):
            raise ValidationError(f"endpoint must be an http(s) URL: {self.endpoint!r}")
        if self.timeout <= 0:
            raise ValidationError("timeout must be positive")


def transcribe(config: AsrEngineConfig, media: bytes, content_type: str,
               client: httpx.Client | None = None) -> tuple[str, list[AsrSegment]]:
    """POST audio to the engine; return the raw ASR JSON document and its
    validated segments. Validation happens before any persistence."""
    if not media:
        raise ValidationError("empty media payload")
    if content_type not in ACCEPTED_AUDIO:
        raise ValidationError(
            f"unsupported audio type {content_type!r}; accepted: "
            f"{sorted(ACCEPTED_AUDIO)}")
    if len(media) > MAX_UPLOAD_BYTES:
        raise ValidationError(f"payload exceeds {MAX_UPLOAD_BYTES} bytes")

    headers = {"Content-Type": content_type, LANGUAGE_HEADER: config.language}
    close = False
    if client is None:
        client = httpx.Client(timeout=config.timeout)
        close = True
    try:
        try:
            response = client.post(config.endpoint, content=media, headers=headers,
                                   timeout=config.timeout)
        except httpx.TimeoutException as exc:
            raise Timeout(f"{config.engine_id} timed out after {config.timeout}s") from exc
        except httpx.TransportError as exc:
            raise EngineUnavailable(f"{config.endpoint}: {exc}") from exc
    finally:
        if close:
            client.close()

    if response.status_code < 200 or response.status_code >= 300:
        raise EngineError(
            f"{config.engine_id} returned {response.status_code}: "
            f"{response.text[:200]}")
    document = response.text
    try:
        segments = parse_asr_json(document)
    except (ParseError, OrderError) as exc:
        raise SchemaError(f"{config.engine_id} response invalid: {exc}") from exc
    return document, segments


def extract_audio(video_path: str | Path) -> bytes:
    """Convert a video container to mono 16kHz PCM WAV bytes.

    Invokes the external converter as:
        ffmpeg -y -i <input> -vn -ac 1 -ar 16000 -f wav <output>
    No partial files survive a failure.
    """
    path = Path(video_path)
    if shutil.which(CONVERTER) is None:
        raise ToolMissing(
            f"{CONVERTER} is not installed; upload an audio file or a transcript"
            " document instead")
    if not path.is_file():
        raise ConversionError(f"no such file: {path}")
    if path.suffix.lower() not in ACCEPTED_VIDEO_SUFFIXES:
        raise ConversionError(
            f"unsupported container {path.suffix!r}; accepted: "
            f"{ACCEPTED_VIDEO_SUFFIXES}")

    with tempfile.TemporaryDirectory() as tmp:
        out_path = Path(tmp) / "audio.wav"
        cmd = [CONVERTER, "-y", "-i", str(path), "-vn", "-ac", "1",
               "-ar", "16000", "-f", "wav", str(out_path)]
        result = subprocess.run(cmd, capture_output=True)
        if result.returncode != 0:
            raise ConversionError(
                f"{CONVERTER} failed ({result.returncode}): "
                f"{result.stderr.decode(errors='replace')[-300:]}")
        return out_path.read_bytes()
