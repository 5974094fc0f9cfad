"""Embedded HTTP/JSON API exposing one expansion session to a review panel.

Serves read endpoints for the session state, ranking, candidates, and
history, plus two mutations: submit a complete decision map, and run the
next iteration. Mutations run under a lock and publish an immutable snapshot
that the read endpoints serve without blocking, so a long iteration never
stalls a status poll. Static files for the panel itself are served from an
optional directory; without one, a bare fallback page lists the endpoints.

Single-session, loopback-oriented; not a multi-tenant service.
"""

from __future__ import annotations

import json
import logging
import mimetypes
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .session import (
    CONVERGED,
    DecisionError,
    ExpansionSession,
    SessionStateError,
    session_to_dict,
)

log = logging.getLogger(__name__)

API_SCHEMA_VERSION = 1

_FALLBACK_PAGE = """<!doctype html>
<html><head><meta charset="utf-8"><title>expansion session</title></head>
<body>
<h1>Expansion session API</h1>
<p>No review panel is installed. The JSON API is live:</p>
<ul>
<li>GET /api/session</li>
<li>GET /api/session/ranking</li>
<li>GET /api/session/candidates</li>
<li>GET /api/session/history</li>
<li>POST /api/session/decisions</li>
<li>POST /api/session/iterate</li>
</ul>
</body></html>
"""


class SessionServer:
    """Own one session and one HTTP server bound to it."""

    def __init__(
        self,
        session: ExpansionSession,
        host: str = "127.0.0.1",
        port: int = 0,
        ui_dir: str | Path | None = None,
    ):
        self.session = session
        self.ui_dir = Path(ui_dir).resolve() if ui_dir is not None else None
        self._lock = threading.Lock()
        self._snapshot = self._build_snapshot()
        self.converged = threading.Event()
        if session.status == CONVERGED:
            self.converged.set()
        handler = _make_handler(self)
        self._httpd = ThreadingHTTPServer((host, port), handler)
        self._httpd.daemon_threads = True
        self.host = host
        self.port = self._httpd.server_address[1]
        self._thread: threading.Thread | None = None

    # -- snapshot plumbing -------------------------------------------------

    def _build_snapshot(self) -> dict:
        doc = session_to_dict(self.session)
        last = doc["history"][-1] if doc["history"] else None
        return {
            "session": {
                "schema_version": API_SCHEMA_VERSION,
                "session_id": doc["session_id"],
                "status": doc["status"],
                "iteration": len(doc["history"]),
                "query": doc["query"],
                "seed_query": doc["seed_query"],
                "relevant": doc["relevant"],
                "previous_relevant": doc["previous_relevant"],
                "params": doc["params"],
                "index_fingerprint": doc["index_fingerprint"],
                "zero_signal": bool(last and last["zero_signal"]),
            },
            "ranking": {
                "iteration": len(doc["history"]),
                "ranking": last["ranking"] if last else [],
            },
            "candidates": {
                "iteration": len(doc["history"]),
                "status": doc["status"],
                "candidates": last["candidates"] if last else [],
                "decided": bool(last and last["decisions"] is not None),
            },
            "history": {"history": doc["history"]},
            "full": doc,
        }

    def snapshot(self) -> dict:
        return self._snapshot

    def mutate(self, fn):
        """Run ``fn(session)`` under the lock and publish a fresh snapshot."""
        with self._lock:
            result = fn(self.session)
            self._snapshot = self._build_snapshot()
            if self.session.status == CONVERGED:
                self.converged.set()
            return result

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> int:
        """Serve on a background thread; returns the bound port."""
        if self._thread is None:
            self._thread = threading.Thread(
                target=self._httpd.serve_forever, name="session-api", daemon=True
            )
            self._thread.start()
        return self.port

    def wait_converged(self, timeout: float | None = None) -> bool:
        return self.converged.wait(timeout)

    def shutdown(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None

    def serve_until_converged(self) -> None:
        """Block the calling thread until the session converges, then stop."""
        self.start()
        try:
            self.converged.wait()
        finally:
            self.shutdown()


def _make_handler(server: SessionServer):
    class Handler(BaseHTTPRequestHandler):
        # route table lives on the closure's ``server``
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # keep test output quiet
            log.debug("%s - %s", self.address_string(), fmt % args)

        def _send_json(self, status: int, payload: dict) -> None:
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _send_error_json(self, status: int, message: str) -> None:
            self._send_json(status, {"error": message})

        def do_GET(self):
            path = self.path.split("?", 1)[0]
            snap = server.snapshot()
            if path == "/api/session":
                self._send_json(200, snap["session"])
            elif path == "/api/session/ranking":
                self._send_json(200, snap["ranking"])
            elif path == "/api/session/candidates":
                self._send_json(200, snap["candidates"])
            elif path == "/api/session/history":
                self._send_json(200, snap["history"])
            elif path.startswith("/api/"):
                self._send_error_json(404, f"no such endpoint: {path}")
            else:
                self._send_static(path)

        def do_POST(self):
            path = self.path.split("?", 1)[0]
            # Drain the request body before dispatching: with keep-alive,
            # unread body bytes would corrupt the next request on the
            # same connection.
            body = self._read_body()
            if path == "/api/session/decisions":
                self._post_decisions(body)
            elif path == "/api/session/iterate":
                self._post_iterate()
            else:
                self._send_error_json(404, f"no such endpoint: {path}")

        def _read_body(self) -> dict | None:
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            if not raw:
                return {}
            try:
                parsed = json.loads(raw)
            except json.JSONDecodeError:
                return None
            return parsed if isinstance(parsed, dict) else None

        def _post_decisions(self, body: dict | None):
            if body is None or not isinstance(body.get("decisions"), dict):
                self._send_error_json(
                    400, 'body must be JSON: {"decisions": {term: verdict}, ...}'
                )
                return
            decided_by = body.get("decided_by")
            try:
                server.mutate(
                    lambda s: s.submit_decisions(body["decisions"], decided_by)
                )
            except DecisionError as exc:
                self._send_error_json(400, str(exc))
                return
            except SessionStateError as exc:
                self._send_error_json(409, str(exc))
                return
            self._send_json(200, server.snapshot()["session"])

        def _post_iterate(self):
            try:
                server.mutate(lambda s: s.run_iteration())
            except SessionStateError as exc:
                self._send_error_json(409, str(exc))
                return
            snap = server.snapshot()
            self._send_json(
                200,
                {
                    "status": snap["session"]["status"],
                    "iteration": snap["session"]["iteration"],
                    "ranking": snap["ranking"]["ranking"],
                    "candidates": snap["candidates"]["candidates"],
                    "zero_signal": snap["session"]["zero_signal"],
                },
            )

        def _send_static(self, path: str):
            if server.ui_dir is None:
                if path in ("/", "/index.html"):
                    body = _FALLBACK_PAGE.encode("utf-8")
                    self.send_response(200)
                    self.send_header("Content-Type", "text/html; charset=utf-8")
                    self.send_header("Content-Length", str(len(body)))
                    self.end_headers()
                    self.wfile.write(body)
                else:
                    self._send_error_json(404, "no static assets installed")
                return
            rel = path.lstrip("/") or "index.html"
            target = (server.ui_dir / rel).resolve()
            if server.ui_dir not in target.parents and target != server.ui_dir:
                self._send_error_json(404, "not found")
                return
            if target.is_dir():
                target = target / "index.html"
            if not target.is_file():
                self._send_error_json(404, "not found")
                return
            ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
            body = target.read_bytes()
            self.send_response(200)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

    return Handler


def serve_session(
    session: ExpansionSession,
    host: str = "127.0.0.1",
    port: int = 0,
    ui_dir: str | Path | None = None,
) -> SessionServer:
    """Convenience: construct, start, and return the server (non-blocking)."""
    server = SessionServer(session, host=host, port=port, ui_dir=ui_dir)
    server.start()
    return server
