"""Minimal JSON-over-HTTP plumbing shared by the registry, the build
service, and the project serve API.

Server side: an app object with ``handle(method, path, query, body) ->
(status, payload)`` is mounted on a threading HTTP server; payloads are
JSON-encoded, errors use the ``{"error": {"code", "detail"}}``
envelope.  Client side: :func:`request_json` returns ``(status,
payload)`` for any HTTP response and raises :class:`NetworkError` only
for transport failures, keeping remote error payloads distinguishable
from unreachable servers.
"""

from __future__ import annotations

import json
import mimetypes
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any, Callable, Mapping
from urllib import error as urlerror
from urllib import parse as urlparse
from urllib import request as urlrequest

__all__ = ["ApiError", "NetworkError", "JsonApp", "start_server", "request_json"]

JsonHandler = Callable[[str, str, Mapping[str, list[str]], Any], tuple[int, Any]]


class ApiError(Exception):
    """Service-level error mapped to an HTTP status and error envelope."""

    def __init__(self, status: int, code: str, detail: str):
        super().__init__(f"{code}: {detail}")
        self.status = status
        self.code = code
        self.detail = detail


class NetworkError(OSError):
    """Transport failure: the server could not be reached at all."""

    def __init__(self, url: str, reason: str):
        super().__init__(f"cannot reach {url}: {reason}")
        self.url = url
        self.reason = reason


class JsonApp:
    """Base class for JSON services; subclasses implement handle()."""

    def handle(self, method: str, path: str, query: Mapping[str, list[str]],
               body: Any) -> tuple[int, Any]:
        raise NotImplementedError


class _Handler(BaseHTTPRequestHandler):
    server_version = "comodi"
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt: str, *args: object) -> None:
        pass

    def _read_body(self) -> Any:
        length = int(self.headers.get("Content-Length") or 0)
        if length == 0:
            return None
        raw = self.rfile.read(length)
        try:
            return json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ApiError(400, "BAD_REQUEST", f"request body is not valid JSON: {exc}")

    def _dispatch(self, method: str) -> None:
        parsed = urlparse.urlsplit(self.path)
        query = urlparse.parse_qs(parsed.query, keep_blank_values=True)
        try:
            body = self._read_body()
            status, payload = self.server.app.handle(method, parsed.path, query, body)
        except ApiError as exc:
            status = exc.status
            payload = {"error": {"code": exc.code, "detail": exc.detail}}
        except Exception as exc:  # surface, never hang the connection
            status = 500
            payload = {"error": {"code": "INTERNAL", "detail": f"{type(exc).__name__}: {exc}"}}
        data = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(data)

    def _serve_static(self, path: str) -> bool:
        root: Path | None = self.server.static_root
        if root is None:
            return False
        relative = path.lstrip("/") or "index.html"
        target = (root / relative).resolve()
        if not str(target).startswith(str(root.resolve())) or not target.is_file():
            return False
        data = target.read_bytes()
        content_type = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        self.send_response(200)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)
        return True

    def do_GET(self) -> None:
        path = urlparse.urlsplit(self.path).path
        if not path.startswith(("/api", "/v1")) and self._serve_static(path):
            return
        self._dispatch("GET")

    def do_POST(self) -> None:
        self._dispatch("POST")

    def do_PUT(self) -> None:
        self._dispatch("PUT")

    def do_DELETE(self) -> None:
        self._dispatch("DELETE")

    def do_OPTIONS(self) -> None:
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, PUT, DELETE")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()


class _Server(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address: tuple[str, int], app: JsonApp,
                 static_root: Path | None = None):
        super().__init__(address, _Handler)
        self.app = app
        self.static_root = static_root


def start_server(app: JsonApp, host: str = "127.0.0.1", port: int = 0,
                 background: bool = True, static_root: str | Path | None = None) -> _Server:
    """Start the app on a threading HTTP server; port 0 picks a free port."""
    server = _Server((host, port), app,
                     static_root=Path(static_root) if static_root else None)
    if background:
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
    return server


def request_json(method: str, url: str, body: Any = None,
                 timeout: float = 30.0) -> tuple[int, Any]:
    """Issue a JSON request; returns (status, payload) for any HTTP answer.

    Raises :class:`NetworkError` only when no HTTP response was
    obtained, so callers can tell unreachable servers from remote
    error payloads.
    """
    data = None
    headers = {"Accept": "application/json"}
    if body is not None:
        data = json.dumps(body).encode("utf-8")
        headers["Content-Type"] = "application/json"
    req = urlrequest.Request(url, data=data, headers=headers, method=method)
    try:
        with urlrequest.urlopen(req, timeout=timeout) as resp:
            raw = resp.read()
            status = resp.status
    except urlerror.HTTPError as exc:
        raw = exc.read()
        status = exc.code
    except (urlerror.URLError, OSError, TimeoutError) as exc:
        reason = getattr(exc, "reason", exc)
        raise NetworkError(url, str(reason)) from exc
    if not raw:
        return status, None
    try:
        return status, json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise NetworkError(url, f"response is not valid JSON: {exc}") from exc
