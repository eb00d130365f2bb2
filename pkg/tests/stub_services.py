"""Tiny threaded HTTP stubs standing in for external adapter services."""

from __future__ import annotations

import json
import socket
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer


class StubService:
    """One-endpoint HTTP server; records request bodies for assertions."""

    def __init__(self, respond) -> None:
        """``respond(body_dict) -> (status, content_type, payload_bytes)``."""
        self.requests: list[dict] = []
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self) -> None:  # noqa: N802 (stdlib naming)
                length = int(self.headers.get("content-length", 0))
                body = json.loads(self.rfile.read(length) or b"{}")
                stub.requests.append(body)
                status, content_type, payload = respond(body)
                self.send_response(status)
                self.send_header("content-type", content_type)
                self.send_header("content-length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            def log_message(self, *args) -> None:
                pass

        self._server = HTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    def __enter__(self) -> "StubService":
        self._thread.start()
        return self

    def __exit__(self, *exc_info) -> None:
        self._server.shutdown()
        self._server.server_close()

    @property
    def url(self) -> str:
        host, port = self._server.server_address
        return f"http://{host}:{port}/"


def json_stub(payload: dict, status: int = 200) -> "StubService":
    body = json.dumps(payload).encode("utf-8")
    return StubService(lambda _req: (status, "application/json", body))


def bytes_stub(payload: bytes, status: int = 200) -> "StubService":
    return StubService(lambda _req: (status, "application/octet-stream", payload))


def dead_url() -> str:
    """URL with no listener; connections are refused immediately."""
    probe = socket.socket()
    probe.bind(("127.0.0.1", 0))
    port = probe.getsockname()[1]
    probe.close()
    return f"http://127.0.0.1:{port}/"
