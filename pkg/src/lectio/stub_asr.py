"""Deterministic stub ASR engine for tests and demos.

A tiny threaded HTTP server that answers every POST with a canned ASR JSON
document (or a configured failure), so the transcription pipeline can run
end to end without model weights.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

DEFAULT_DOCUMENT = {
    "text": " Welcome to the lecture. Today we will cover waves. Any questions so far?",
    "segments": [
        {"id": 0, "start": 0.0, "end": 3.5, "text": " Welcome to the lecture."},
        {"id": 1, "start": 3.5, "end": 8.0, "text": " Today we will cover waves."},
        {"id": 2, "start": 8.0, "end": 11.0, "text": " Any questions so far?"},
    ],
}


class _Handler(BaseHTTPRequestHandler):
    def do_POST(self):
        # drain the request body so keep-alive clients are not confused
        length = int(self.headers.get("Content-Length", 0))
        if length:
            self.rfile.read(length)
        status = self.server.status_code
        body = self.server.body
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, fmt, *args):
        pass


class StubAsrServer:
    """Context manager running the stub engine on an ephemeral port."""

    def __init__(self, document: dict | None = None, status_code: int = 200,
                 raw_body: bytes | None = None):
        self._server = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
        if raw_body is not None:
            body = raw_body
        else:
            body = json.dumps(document or DEFAULT_DOCUMENT).encode("utf-8")
        self._server.body = body
        self._server.status_code = status_code
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def endpoint(self) -> str:
        host, port = self._server.server_address
        return f"http://{host}:{port}/transcribe"

    def __enter__(self):
        self._thread.start()
        return self

    def __exit__(self, *exc_info):
        self._server.shutdown()
        self._server.server_close()
        self._thread.join(timeout=5)
        return False
