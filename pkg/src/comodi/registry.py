"""The centralized component registry: publish, search, fetch, count downloads.

The store is an append-only event log (``registry.log``, one JSON
record per line) with an in-memory index rebuilt at startup, so a
restart reproduces exactly the state reached by any sequence of
register/download events.  Published records are immutable; the same
name@version can never be registered twice.

Search results satisfy every set criterion and are ranked by download
count descending, ties broken by name ascending then version
descending.  Type filters use port compatibility: ``provides_type``
matches components with a provides port compatible with the wanted
type, ``uses_type`` matches components able to consume the offered
type.

Compile servers are a directory read from an admin-managed config file
(``compile_servers.json`` next to the log); edits appear on the next
listing.

HTTP surface (JSON API, see :class:`RegistryApp`):

- ``POST /v1/components`` -> 201 record | 409 DUPLICATE | 422 INVALID_DESCRIPTOR
- ``GET /v1/components?text=&tag=&provides_type=&uses_type=&limit=`` -> 200 list
- ``GET /v1/components/{name}/{version}`` -> 200 | 404 (version may be ``latest``)
- ``POST /v1/components/{name}/{version}/downloads`` -> 200 ``{"count": n}``
- ``GET /v1/compile-servers`` -> 200 list
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Mapping

from .httpjson import ApiError, JsonApp, request_json
from .model import (
    ComponentDescriptor,
    DataType,
    DescriptorError,
    GlobalName,
    Version,
    descriptor_from_obj,
    descriptor_to_obj,
    parse_datatype,
    datatype_to_obj,
    validate_descriptor,
)
from .wiring import ports_compatible

__all__ = [
    "RegistryError",
    "RegistryRecord",
    "SearchQuery",
    "CompileServerEntry",
    "RegistryStore",
    "RegistryApp",
    "RegistryClient",
]

LOG_FILENAME = "registry.log"
SERVERS_FILENAME = "compile_servers.json"
DEFAULT_SEARCH_LIMIT = 50


class RegistryError(Exception):
    """Registry operation failure with a machine-readable code."""

    def __init__(self, code: str, detail: str, violations: list[str] | None = None):
        super().__init__(f"{code}: {detail}")
        self.code = code
        self.detail = detail
        self.violations = violations or []


@dataclass(frozen=True)
class RegistryRecord:
    descriptor: ComponentDescriptor
    artifact_url: str
    published_at: str = ""
    download_count: int = 0
    publisher: str = ""

    def key(self) -> str:
        return self.descriptor.key()

    def to_obj(self) -> dict:
        return {
            "descriptor": descriptor_to_obj(self.descriptor),
            "artifact_url": self.artifact_url,
            "published_at": self.published_at,
            "download_count": self.download_count,
            "publisher": self.publisher,
        }

    @classmethod
    def from_obj(cls, obj: Mapping[str, Any]) -> "RegistryRecord":
        return cls(
            descriptor=descriptor_from_obj(obj["descriptor"]),
            artifact_url=str(obj.get("artifact_url", "")),
            published_at=str(obj.get("published_at", "")),
            download_count=int(obj.get("download_count", 0)),
            publisher=str(obj.get("publisher", "")),
        )


@dataclass(frozen=True)
class SearchQuery:
    text: str | None = None
    tag_prefix: str | None = None
    provides_type: DataType | None = None
    uses_type: DataType | None = None
    limit: int = DEFAULT_SEARCH_LIMIT

    def criteria_set(self) -> bool:
        return any(v is not None for v in
                   (self.text, self.tag_prefix, self.provides_type, self.uses_type))


@dataclass(frozen=True)
class CompileServerEntry:
    url: str
    platforms: tuple[str, ...]
    description: str = ""

    def to_obj(self) -> dict:
        return {"url": self.url, "platforms": list(self.platforms),
                "description": self.description}

    @classmethod
    def from_obj(cls, obj: Mapping[str, Any]) -> "CompileServerEntry":
        return cls(url=str(obj.get("url", "")),
                   platforms=tuple(str(p) for p in obj.get("platforms", [])),
                   description=str(obj.get("description", "")))


def _tag_has_prefix(tag: str, prefix: str) -> bool:
    tag_parts = tag.split("/")
    want = prefix.split("/")
    return len(want) <= len(tag_parts) and tag_parts[:len(want)] == want


def _matches(record: RegistryRecord, q: SearchQuery) -> bool:
    d = record.descriptor
    if q.text is not None:
        haystack = " ".join([str(d.name), d.doc.summary, d.doc.description,
                             " ".join(d.tags)]).lower()
        if q.text.lower() not in haystack:
            return False
    if q.tag_prefix is not None:
        if not any(_tag_has_prefix(tag, q.tag_prefix) for tag in d.tags):
            return False
    if q.provides_type is not None:
        if not any(p.direction == "provides"
                   and ports_compatible(p.datatype, q.provides_type).ok
                   for p in d.ports):
            return False
    if q.uses_type is not None:
        if not any(p.direction == "uses"
                   and ports_compatible(q.uses_type, p.datatype).ok
                   for p in d.ports):
            return False
    return True


def _rank_key(record: RegistryRecord) -> tuple:
    v = record.descriptor.version
    return (-record.download_count, str(record.descriptor.name),
            (-v.major, -v.minor, -v.patch))


def search_records(records: list[RegistryRecord], q: SearchQuery) -> list[RegistryRecord]:
    """Filter + rank a record list; the store and the oracle both go through this shape."""
    hits = [r for r in records if _matches(r, q)]
    hits.sort(key=_rank_key)
    return hits[:q.limit]


class RegistryStore:
    """File-backed registry state: append-only log plus in-memory index."""

    def __init__(self, directory: str | os.PathLike):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.log_path = self.directory / LOG_FILENAME
        self.servers_path = self.directory / SERVERS_FILENAME
        self._records: dict[str, RegistryRecord] = {}
        self._lock = threading.Lock()
        self._replay()

    def _replay(self) -> None:
        if not self.log_path.exists():
            return
        with self.log_path.open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                event = json.loads(line)
                if event.get("event") == "register":
                    record = RegistryRecord.from_obj(event["record"])
                    self._records[record.key()] = record
                elif event.get("event") == "download":
                    key = f"{event['name']}@{event['version']}"
                    if key in self._records:
                        rec = self._records[key]
                        self._records[key] = replace(
                            rec, download_count=rec.download_count + 1)

    def _append(self, event: dict) -> None:
        with self.log_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(event) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def register(self, record: RegistryRecord) -> RegistryRecord:
        """Store a new record durably; duplicates and invalid descriptors rejected."""
        violations = validate_descriptor(record.descriptor)
        if violations:
            raise RegistryError("INVALID_DESCRIPTOR",
                                "descriptor violates invariants: " + "; ".join(violations),
                                violations=violations)
        if not record.artifact_url:
            raise RegistryError("INVALID_DESCRIPTOR", "artifact_url must be nonempty")
        stored = replace(record, download_count=0,
                         published_at=record.published_at
                         or datetime.now(timezone.utc).isoformat())
        with self._lock:
            if stored.key() in self._records:
                raise RegistryError("DUPLICATE", f"{stored.key()} is already registered")
            self._append({"event": "register", "record": stored.to_obj()})
            self._records[stored.key()] = stored
        return stored

    def fetch(self, name: GlobalName | str, version: Version | str = "latest") -> RegistryRecord:
        name = str(name)
        with self._lock:
            if str(version) == "latest":
                candidates = [r for r in self._records.values()
                              if str(r.descriptor.name) == name]
                if not candidates:
                    raise RegistryError("NOT_FOUND", f"no component named {name}")
                return max(candidates, key=lambda r: r.descriptor.version)
            key = f"{name}@{version}"
            if key not in self._records:
                raise RegistryError("NOT_FOUND", f"{key} is not registered")
            return self._records[key]

    def search(self, q: SearchQuery) -> list[RegistryRecord]:
        if not q.criteria_set():
            raise RegistryError("BAD_QUERY", "at least one search criterion must be set")
        if q.limit < 1:
            raise RegistryError("BAD_QUERY", "limit must be positive")
        with self._lock:
            snapshot = list(self._records.values())
        return search_records(snapshot, q)

    def record_download(self, name: GlobalName | str, version: Version | str) -> int:
        key = f"{name}@{version}"
        with self._lock:
            if key not in self._records:
                raise RegistryError("NOT_FOUND", f"{key} is not registered")
            self._append({"event": "download", "name": str(name), "version": str(version)})
            rec = self._records[key]
            updated = replace(rec, download_count=rec.download_count + 1)
            self._records[key] = updated
            return updated.download_count

    def list_compile_servers(self) -> list[CompileServerEntry]:
        """Current directory contents, url-ascending; re-read on every call."""
        if not self.servers_path.exists():
            return []
        data = json.loads(self.servers_path.read_text(encoding="utf-8"))
        entries = [CompileServerEntry.from_obj(e) for e in data]
        entries.sort(key=lambda e: e.url)
        return entries

    def all_records(self) -> list[RegistryRecord]:
        with self._lock:
            return list(self._records.values())


# ---------------------------------------------------------------------------
# HTTP service

class RegistryApp(JsonApp):
    def __init__(self, store: RegistryStore):
        self.store = store

    def handle(self, method: str, path: str, query: Mapping[str, list[str]],
               body: Any) -> tuple[int, Any]:
        parts = [p for p in path.split("/") if p]
        try:
            if method == "POST" and parts == ["v1", "components"]:
                return self._register(body)
            if method == "GET" and parts == ["v1", "components"]:
                return self._search(query)
            if method == "GET" and parts == ["v1", "compile-servers"]:
                return 200, [e.to_obj() for e in self.store.list_compile_servers()]
            if len(parts) == 4 and parts[:2] == ["v1", "components"] and method == "GET":
                record = self.store.fetch(parts[2], parts[3])
                return 200, record.to_obj()
            if len(parts) == 5 and parts[:2] == ["v1", "components"] \
                    and parts[4] == "downloads" and method == "POST":
                count = self.store.record_download(parts[2], parts[3])
                return 200, {"count": count}
        except RegistryError as exc:
            raise ApiError(_status_for(exc.code), exc.code, exc.detail)
        except DescriptorError as exc:
            raise ApiError(422, "INVALID_DESCRIPTOR", str(exc))
        raise ApiError(404, "NO_ROUTE", f"{method} {path} is not a registry endpoint")

    def _register(self, body: Any) -> tuple[int, Any]:
        if not isinstance(body, dict) or "descriptor" not in body:
            raise ApiError(400, "BAD_REQUEST", "body must carry a descriptor")
        record = RegistryRecord(
            descriptor=descriptor_from_obj(body["descriptor"]),
            artifact_url=str(body.get("artifact_url", "")),
            publisher=str(body.get("publisher", "")),
        )
        stored = self.store.register(record)
        return 201, stored.to_obj()

    def _search(self, query: Mapping[str, list[str]]) -> tuple[int, Any]:
        def first(key: str) -> str | None:
            values = query.get(key)
            return values[0] if values else None

        limit_text = first("limit")
        q = SearchQuery(
            text=first("text"),
            tag_prefix=first("tag"),
            provides_type=parse_datatype(first("provides_type"))
            if first("provides_type") else None,
            uses_type=parse_datatype(first("uses_type")) if first("uses_type") else None,
            limit=int(limit_text) if limit_text else DEFAULT_SEARCH_LIMIT,
        )
        return 200, [r.to_obj() for r in self.store.search(q)]


def _status_for(code: str) -> int:
    return {"DUPLICATE": 409, "NOT_FOUND": 404, "INVALID_DESCRIPTOR": 422,
            "BAD_QUERY": 422}.get(code, 400)


# ---------------------------------------------------------------------------
# HTTP client

class RegistryClient:
    """Thin client over the registry JSON API; remote errors become RegistryError."""

    def __init__(self, base_url: str, timeout: float = 30.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def _call(self, method: str, path: str, body: Any = None) -> Any:
        status, payload = request_json(method, self.base_url + path, body,
                                       timeout=self.timeout)
        if status >= 400:
            err = (payload or {}).get("error", {}) if isinstance(payload, dict) else {}
            raise RegistryError(str(err.get("code", f"HTTP_{status}")),
                                str(err.get("detail", "remote error")))
        return payload

    def register(self, descriptor: ComponentDescriptor, artifact_url: str,
                 publisher: str = "") -> RegistryRecord:
        payload = self._call("POST", "/v1/components", {
            "descriptor": descriptor_to_obj(descriptor),
            "artifact_url": artifact_url,
            "publisher": publisher,
        })
        return RegistryRecord.from_obj(payload)

    def search(self, q: SearchQuery) -> list[RegistryRecord]:
        params: list[tuple[str, str]] = []
        if q.text is not None:
            params.append(("text", q.text))
        if q.tag_prefix is not None:
            params.append(("tag", q.tag_prefix))
        if q.provides_type is not None:
            params.append(("provides_type", json.dumps(datatype_to_obj(q.provides_type))))
        if q.uses_type is not None:
            params.append(("uses_type", json.dumps(datatype_to_obj(q.uses_type))))
        params.append(("limit", str(q.limit)))
        from urllib.parse import urlencode
        payload = self._call("GET", "/v1/components?" + urlencode(params))
        return [RegistryRecord.from_obj(r) for r in payload]

    def fetch(self, name: GlobalName | str, version: Version | str = "latest") -> RegistryRecord:
        payload = self._call("GET", f"/v1/components/{name}/{version}")
        return RegistryRecord.from_obj(payload)

    def record_download(self, name: GlobalName | str, version: Version | str) -> int:
        payload = self._call("POST", f"/v1/components/{name}/{version}/downloads")
        return int(payload["count"])

    def list_compile_servers(self) -> list[CompileServerEntry]:
        payload = self._call("GET", "/v1/compile-servers")
        return [CompileServerEntry.from_obj(e) for e in payload]
