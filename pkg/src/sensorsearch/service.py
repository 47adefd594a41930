"""Minimal JSON-over-HTTP front end for the search engine.

Endpoints:
    POST /search       rank sensors against a priority profile
    GET  /sensors/{uid}  one sensor with raw and normalized values
    GET  /properties   the property registry with observed bounds
    POST /corpus/load  load a corpus file or generate a seeded corpus
    POST /simulate     run a distributed strategy over a split corpus

Built on the stdlib http server: one process, threads per connection, no
framework dependency. Responses carry permissive CORS headers so the browser
console can call the service from another origin during development.
"""

from __future__ import annotations

import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .engine import Engine
from .errors import (EmptyPriority, InvalidFilter, InvalidK, InvalidRequest,
                     KeyMismatch, LoadError, NoCorpus, OutOfBounds,
                     ParseError, UnknownProperty)

_BAD_REQUEST = (ParseError, InvalidFilter, InvalidRequest, UnknownProperty,
                InvalidK, EmptyPriority, KeyMismatch, OutOfBounds, LoadError,
                ValueError)


def _error_body(exc: Exception) -> dict:
    body: dict = {"type": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ParseError):
        body["line"] = exc.line
        body["column"] = exc.column
        body["expected"] = sorted(exc.expected)
    if isinstance(exc, LoadError):
        body["line"] = exc.line
    return {"error": body}


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "sensorsearch"

    @property
    def engine(self) -> Engine:
        return self.server.engine  # type: ignore[attr-defined]

    def log_message(self, format: str, *args) -> None:
        if getattr(self.server, "verbose", False):
            super().log_message(format, *args)

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self._send_cors()
        self.end_headers()
        self.wfile.write(body)

    def _send_cors(self) -> None:
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length", 0))
        raw = self.rfile.read(length) if length else b""
        if not raw:
            raise InvalidRequest("request body must be a JSON object")
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise InvalidRequest(f"malformed JSON body: {exc.msg}") from exc
        if not isinstance(doc, dict):
            raise InvalidRequest("request body must be a JSON object")
        return doc

    def _dispatch(self, method: str) -> None:
        path = self.path.split("?", 1)[0].rstrip("/") or "/"
        try:
            if method == "POST" and path == "/search":
                self._send_json(200, self.engine.search(self._read_body()))
            elif method == "POST" and path == "/corpus/load":
                self._send_json(200, self.engine.load_corpus(self._read_body()))
            elif method == "POST" and path == "/simulate":
                self._send_json(200, self.engine.simulate(self._read_body()))
            elif method == "GET" and path == "/properties":
                self._send_json(200, {"properties": self.engine.properties_listing()})
            elif method == "GET" and path.startswith("/sensors/"):
                uid = path[len("/sensors/"):]
                try:
                    self._send_json(200, self.engine.get_sensor(uid))
                except KeyError:
                    self._send_json(404, {"error": {
                        "type": "NotFound", "message": f"no sensor {uid!r}"}})
            else:
                self._send_json(404, {"error": {
                    "type": "NotFound", "message": f"no route {method} {path}"}})
        except NoCorpus as exc:
            self._send_json(409, _error_body(exc))
        except _BAD_REQUEST as exc:
            self._send_json(400, _error_body(exc))
        except Exception as exc:  # noqa: BLE001  surface, never hang the socket
            self._send_json(500, {"error": {
                "type": "InternalError", "message": str(exc)}})

    def do_GET(self) -> None:
        self._dispatch("GET")

    def do_POST(self) -> None:
        self._dispatch("POST")

    def do_OPTIONS(self) -> None:
        self.send_response(204)
        self._send_cors()
        self.send_header("Content-Length", "0")
        self.end_headers()


def make_server(engine: Engine, host: str = "127.0.0.1",
                port: int = 8765, verbose: bool = False) -> ThreadingHTTPServer:
    server = ThreadingHTTPServer((host, port), _Handler)
    server.engine = engine  # type: ignore[attr-defined]
    server.verbose = verbose  # type: ignore[attr-defined]
    return server


def serve(engine: Engine, host: str = "127.0.0.1", port: int = 8765,
          verbose: bool = False) -> None:
    """Serve until interrupted."""
    server = make_server(engine, host, port, verbose=verbose)
    try:
        server.serve_forever()
    finally:
        server.server_close()
