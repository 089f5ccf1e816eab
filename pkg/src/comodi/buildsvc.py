"""Compilation service: accept source bundles, run a configured toolchain,
return artifact bytes or diagnostics.

Toolchains are external command templates from a ``toolchains.json``
config file: a list of ``{"platform", "language", "command"}`` entries
where the command (argv list or shell-style string) may use the
placeholders ``{SRC_DIR}``, ``{OUT_FILE}``, and ``{ENTRY}`` (filled
from the request's entry hint).  The service is toolchain-agnostic; a
scripted stub stands in for a real compiler farm.

Every request gets an isolated scratch directory (removed afterwards);
source paths must be relative with no parent traversal and the bundle
is capped at 16 MiB.  Source files are written with a fixed mtime so
archive-building toolchains stay byte-deterministic.

HTTP surface: ``POST /v1/compile`` with a JSON body (sources base64)
-> 200 CompileResult | 422 rejected request | 503 worker pool
saturated.  :func:`remote_compile` submits to a server and returns a
result identical to a server-side compile; transport failures raise
``NetworkError``, distinguished from compile failures and rejections.
"""

from __future__ import annotations

import base64
import json
import os
import re
import shlex
import shutil
import subprocess
import tempfile
import threading
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath
from typing import Any, Iterable, Mapping

from .httpjson import ApiError, JsonApp, request_json
from .registry import CompileServerEntry

__all__ = [
    "MAX_BUNDLE_BYTES",
    "BuildRequestError",
    "SourceFile",
    "CompileRequest",
    "Diagnostic",
    "CompileResult",
    "Toolchain",
    "load_toolchains",
    "compile_request",
    "BuildApp",
    "remote_compile",
]

MAX_BUNDLE_BYTES = 16 * 1024 * 1024
SOURCE_MTIME = 946684800  # fixed timestamp for deterministic archives
TOOLCHAIN_TIMEOUT_S = 300

_DIAG_RE = re.compile(r"^(?P<file>[^:\s][^:]*):(?P<line>\d+)(?::\d+)?:\s*(?P<message>.+)$")


class BuildRequestError(Exception):
    """A request rejected before any toolchain ran (422 on the wire)."""

    def __init__(self, code: str, detail: str):
        super().__init__(f"{code}: {detail}")
        self.code = code
        self.detail = detail


@dataclass(frozen=True)
class SourceFile:
    path: str
    content: bytes


@dataclass(frozen=True)
class CompileRequest:
    platform: str
    language: str
    sources: tuple[SourceFile, ...]
    entry_hint: str = ""
    options: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Diagnostic:
    file: str
    line: int
    message: str

    def to_obj(self) -> dict:
        return {"file": self.file, "line": self.line, "message": self.message}


@dataclass(frozen=True)
class CompileResult:
    status: str  # "ok" | "failed"
    artifact: bytes | None
    log: str
    diagnostics: tuple[Diagnostic, ...] = ()

    def to_obj(self) -> dict:
        out: dict[str, Any] = {
            "status": self.status,
            "log": self.log,
            "diagnostics": [d.to_obj() for d in self.diagnostics],
        }
        if self.artifact is not None:
            out["artifact_b64"] = base64.b64encode(self.artifact).decode("ascii")
        return out

    @classmethod
    def from_obj(cls, obj: Mapping[str, Any]) -> "CompileResult":
        artifact = None
        if obj.get("artifact_b64") is not None:
            artifact = base64.b64decode(obj["artifact_b64"])
        return cls(
            status=str(obj.get("status", "failed")),
            artifact=artifact,
            log=str(obj.get("log", "")),
            diagnostics=tuple(Diagnostic(str(d.get("file", "")), int(d.get("line", 0)),
                                         str(d.get("message", "")))
                              for d in obj.get("diagnostics", [])),
        )


@dataclass(frozen=True)
class Toolchain:
    platform: str
    language: str
    command: tuple[str, ...]


def load_toolchains(path: str | Path) -> list[Toolchain]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    toolchains = []
    for entry in data:
        command = entry["command"]
        argv = tuple(shlex.split(command)) if isinstance(command, str) else tuple(command)
        toolchains.append(Toolchain(platform=str(entry["platform"]),
                                    language=str(entry["language"]), command=argv))
    return toolchains


def _check_sources(sources: Iterable[SourceFile]) -> None:
    sources = tuple(sources)
    if not sources:
        raise BuildRequestError("BAD_REQUEST", "at least one source file required")
    total = 0
    for src in sources:
        pure = PurePosixPath(src.path)
        if pure.is_absolute() or not src.path or "\\" in src.path:
            raise BuildRequestError("BAD_PATH", f"source path must be relative: {src.path!r}")
        if ".." in pure.parts or any(not part for part in pure.parts):
            raise BuildRequestError("BAD_PATH",
                                    f"source path may not traverse upwards: {src.path!r}")
        total += len(src.content)
    if total > MAX_BUNDLE_BYTES:
        raise BuildRequestError("SIZE_LIMIT",
                                f"bundle is {total} bytes, limit is {MAX_BUNDLE_BYTES}")


def _parse_diagnostics(log: str) -> tuple[Diagnostic, ...]:
    diags = []
    for line in log.splitlines():
        m = _DIAG_RE.match(line.strip())
        if m:
            diags.append(Diagnostic(m.group("file"), int(m.group("line")),
                                    m.group("message")))
    return tuple(diags)


def compile_request(req: CompileRequest, toolchains: Iterable[Toolchain],
                    timeout: float = TOOLCHAIN_TIMEOUT_S) -> CompileResult:
    """Materialize sources in an isolated scratch dir, run the toolchain, collect.

    Raises :class:`BuildRequestError` for requests rejected before the
    toolchain runs (unsupported target, bad paths, size); toolchain
    failures come back as a ``failed`` result with the captured log.
    """
    toolchain = next((t for t in toolchains
                      if t.platform == req.platform and t.language == req.language), None)
    if toolchain is None:
        raise BuildRequestError("UNSUPPORTED_TARGET",
                                f"no toolchain for platform={req.platform!r} "
                                f"language={req.language!r}")
    _check_sources(req.sources)

    scratch = Path(tempfile.mkdtemp(prefix="comodi-build-"))
    try:
        src_dir = scratch / "src"
        out_dir = scratch / "out"
        src_dir.mkdir()
        out_dir.mkdir()
        for src in req.sources:
            target = src_dir / src.path
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(src.content)
            os.utime(target, (SOURCE_MTIME, SOURCE_MTIME))
        out_file = out_dir / "artifact.bin"

        argv = [arg.replace("{SRC_DIR}", str(src_dir))
                   .replace("{OUT_FILE}", str(out_file))
                   .replace("{ENTRY}", req.entry_hint)
                for arg in toolchain.command]
        try:
            proc = subprocess.run(argv, cwd=src_dir, capture_output=True, text=True,
                                  timeout=timeout)
            log = proc.stdout + proc.stderr
            returncode = proc.returncode
        except subprocess.TimeoutExpired as exc:
            log = f"toolchain timed out after {timeout}s: {exc}"
            returncode = -1
        except OSError as exc:
            log = f"toolchain could not be started: {exc}"
            returncode = -1

        if returncode == 0 and out_file.exists():
            return CompileResult(status="ok", artifact=out_file.read_bytes(), log=log)
        if returncode == 0:
            log += "\ntoolchain exited cleanly but produced no artifact"
        diagnostics = _parse_diagnostics(log)
        if not diagnostics and not log:
            diagnostics = (Diagnostic("", 0, f"toolchain exited with status {returncode}"),)
        return CompileResult(status="failed", artifact=None, log=log,
                             diagnostics=diagnostics)
    finally:
        shutil.rmtree(scratch, ignore_errors=True)


# ---------------------------------------------------------------------------
# HTTP service

class BuildApp(JsonApp):
    def __init__(self, toolchains: Iterable[Toolchain], max_workers: int = 4,
                 queue_timeout: float = 60.0):
        self.toolchains = tuple(toolchains)
        self._slots = threading.BoundedSemaphore(max_workers)
        self.queue_timeout = queue_timeout

    def handle(self, method: str, path: str, query: Mapping[str, list[str]],
               body: Any) -> tuple[int, Any]:
        if method != "POST" or path.rstrip("/") != "/v1/compile":
            raise ApiError(404, "NO_ROUTE", f"{method} {path} is not a build endpoint")
        req = _request_from_obj(body)
        if not self._slots.acquire(timeout=self.queue_timeout):
            raise ApiError(503, "BUSY", "all compile workers are busy")
        try:
            result = compile_request(req, self.toolchains)
        except BuildRequestError as exc:
            raise ApiError(422, exc.code, exc.detail)
        finally:
            self._slots.release()
        return 200, result.to_obj()


def _request_from_obj(body: Any) -> CompileRequest:
    if not isinstance(body, dict):
        raise ApiError(400, "BAD_REQUEST", "body must be a JSON object")
    try:
        sources = tuple(
            SourceFile(path=str(s["path"]), content=base64.b64decode(s["content_b64"]))
            for s in body.get("sources", [])
        )
        return CompileRequest(
            platform=str(body["platform"]),
            language=str(body["language"]),
            sources=sources,
            entry_hint=str(body.get("entry_hint", "")),
            options={str(k): str(v) for k, v in (body.get("options") or {}).items()},
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ApiError(400, "BAD_REQUEST", f"malformed compile request: {exc}")


def request_to_obj(req: CompileRequest) -> dict:
    return {
        "platform": req.platform,
        "language": req.language,
        "sources": [{"path": s.path,
                     "content_b64": base64.b64encode(s.content).decode("ascii")}
                    for s in req.sources],
        "entry_hint": req.entry_hint,
        "options": dict(req.options),
    }


def remote_compile(server: CompileServerEntry | str, req: CompileRequest,
                   timeout: float = 330.0) -> CompileResult:
    """Submit a request to a compile server; the client adds nothing.

    Remote rejection payloads surface verbatim as
    :class:`BuildRequestError`; transport failures raise
    ``NetworkError``.
    """
    url = server.url if isinstance(server, CompileServerEntry) else server
    status, payload = request_json("POST", url.rstrip("/") + "/v1/compile",
                                   request_to_obj(req), timeout=timeout)
    if status >= 400:
        err = (payload or {}).get("error", {}) if isinstance(payload, dict) else {}
        raise BuildRequestError(str(err.get("code", f"HTTP_{status}")),
                                str(err.get("detail", "remote error")))
    return CompileResult.from_obj(payload)
