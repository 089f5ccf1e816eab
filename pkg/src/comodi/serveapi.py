"""The local project API behind ``comodi serve``; the studio UI drives it.

All semantics stay server-side: connect gestures, substitute lookups,
replacements, validation, and runs call straight into the wiring and
engine modules, and the client only mirrors what comes back.

Endpoints (JSON over HTTP, loopback by default):

- ``GET  /api/project`` -> project document
- ``POST /api/project/nodes`` ``{id, component, version, params}``
- ``DELETE /api/project/nodes/{id}``
- ``POST /api/project/edges`` ``{src, dst}`` -> 200 | 409 with the Violation
- ``GET  /api/project/nodes/{id}/substitutes`` -> candidate list
- ``POST /api/project/nodes/{id}/replace`` ``{component, version}``
- ``POST /api/project/nodes/{id}/params`` ``{params}`` -> updated document
- ``POST /api/project/validate`` -> ``{"violations": [...]}``
- ``POST /api/project/run`` -> run report | 409 with violations
- ``GET  /api/registry/search`` -> registry proxy (builtin-backed when
  no registry is configured)
- ``GET/PUT /api/layout`` -> canvas position sidecar
  (``<project>.layout.json``; UI-local state, never in the project doc)

Mutations persist the project document atomically next to where it was
loaded from.  A failing gesture leaves both the in-memory project and
the file untouched.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Any, Mapping

from .builtins import BuiltinCatalog
from .engine import ArtifactResolver, report_to_obj, run
from .httpjson import ApiError, JsonApp
from .model import DescriptorError, GlobalName, Version
from .registry import RegistryClient, RegistryError, RegistryRecord, SearchQuery
from .wiring import (
    PortRef,
    Project,
    ProjectNode,
    Resolver,
    WiringError,
    project_to_obj,
    replace_node,
    substitutable,
    validate_project,
    connect,
)

__all__ = ["ProjectSession", "ServeApp"]


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)


class ProjectSession:
    """One project under edit, guarded by a lock, persisted on change."""

    def __init__(self, project: Project, path: Path | None, resolver: Resolver,
                 artifact_resolver: ArtifactResolver,
                 registry: RegistryClient | None = None,
                 catalog: BuiltinCatalog | None = None):
        self.project = project
        self.path = path
        self.resolver = resolver
        self.artifact_resolver = artifact_resolver
        self.registry = registry
        self.catalog = catalog
        self.lock = threading.Lock()

    def persist(self) -> None:
        if self.path is not None:
            from .wiring import serialize_project
            _atomic_write(self.path, serialize_project(self.project))

    def layout_path(self) -> Path | None:
        if self.path is None:
            return None
        name = self.path.name
        if name.endswith(".project.json"):
            name = name[:-len(".project.json")]
        else:
            name = self.path.stem
        return self.path.with_name(name + ".layout.json")

    def candidate_records(self, node_id: str) -> list[RegistryRecord]:
        """Substitution candidates: builtin components plus registry hits
        found by the node's connected port types (or its tag family when
        unconnected)."""
        node = self.project.nodes[node_id]
        seen: dict[str, RegistryRecord] = {}

        def add(record: RegistryRecord) -> None:
            seen.setdefault(record.key(), record)

        if self.catalog is not None:
            for descriptor in self.catalog.descriptors():
                add(RegistryRecord(descriptor=descriptor,
                                   artifact_url=f"builtin:{descriptor.key()}"))
        if self.registry is not None:
            queries: list[SearchQuery] = []
            for e in self.project.edges_out_of(node_id):
                try:
                    consumer = self.resolver(self.project.nodes[e.dst.node].component,
                                             self.project.nodes[e.dst.node].version)
                except LookupError:
                    continue
                port = consumer.port(e.dst.port)
                if port is not None:
                    queries.append(SearchQuery(provides_type=port.datatype))
            for e in self.project.edges_into(node_id):
                try:
                    producer = self.resolver(self.project.nodes[e.src.node].component,
                                             self.project.nodes[e.src.node].version)
                except LookupError:
                    continue
                port = producer.port(e.src.port)
                if port is not None:
                    queries.append(SearchQuery(uses_type=port.datatype))
            if not queries:
                try:
                    current = self.resolver(node.component, node.version)
                    queries.append(SearchQuery(tag_prefix=current.tags[0].split("/")[0]))
                except LookupError:
                    pass
            for q in queries:
                try:
                    for record in self.registry.search(q):
                        add(record)
                except RegistryError:
                    continue
        return list(seen.values())


class ServeApp(JsonApp):
    def __init__(self, session: ProjectSession):
        self.session = session

    # -- routing -----------------------------------------------------------

    def handle(self, method: str, path: str, query: Mapping[str, list[str]],
               body: Any) -> tuple[int, Any]:
        parts = [p for p in path.split("/") if p]
        s = self.session
        if parts[:1] != ["api"]:
            raise ApiError(404, "NO_ROUTE", f"{path} is not an API path")
        rest = parts[1:]

        if rest == ["project"] and method == "GET":
            with s.lock:
                return 200, project_to_obj(s.project)
        if rest == ["project", "nodes"] and method == "POST":
            return self._add_node(body)
        if len(rest) == 3 and rest[:2] == ["project", "nodes"] and method == "DELETE":
            return self._delete_node(rest[2])
        if rest == ["project", "edges"] and method == "POST":
            return self._add_edge(body)
        if len(rest) == 4 and rest[:2] == ["project", "nodes"] \
                and rest[3] == "substitutes" and method == "GET":
            return self._substitutes(rest[2])
        if len(rest) == 4 and rest[:2] == ["project", "nodes"] \
                and rest[3] == "replace" and method == "POST":
            return self._replace(rest[2], body)
        if len(rest) == 4 and rest[:2] == ["project", "nodes"] \
                and rest[3] == "params" and method == "POST":
            return self._set_params(rest[2], body)
        if rest == ["project", "validate"] and method == "POST":
            with s.lock:
                violations = validate_project(s.project, s.resolver)
            return 200, {"violations": [v.to_obj() for v in violations]}
        if rest == ["project", "run"] and method == "POST":
            return self._run()
        if rest == ["registry", "search"] and method == "GET":
            return self._registry_search(query)
        if rest == ["layout"] and method == "GET":
            return self._layout_get()
        if rest == ["layout"] and method in ("PUT", "POST"):
            return self._layout_put(body)
        raise ApiError(404, "NO_ROUTE", f"{method} {path} is not an API endpoint")

    # -- project mutations ---------------------------------------------------

    def _add_node(self, body: Any) -> tuple[int, Any]:
        if not isinstance(body, dict):
            raise ApiError(400, "BAD_REQUEST", "body must be a JSON object")
        node_id = str(body.get("id", ""))
        if not node_id:
            raise ApiError(400, "BAD_REQUEST", "node id required")
        try:
            name = GlobalName.parse(str(body.get("component", "")))
            version = Version.parse(str(body.get("version", "")))
        except DescriptorError as exc:
            raise ApiError(400, "BAD_REQUEST", str(exc))
        params = body.get("params") or {}
        if not isinstance(params, dict):
            raise ApiError(400, "BAD_REQUEST", "params must be an object")
        s = self.session
        with s.lock:
            if node_id in s.project.nodes:
                raise ApiError(409, "DUPLICATE_NODE", f"node {node_id!r} already exists")
            s.project = s.project.with_node(node_id, ProjectNode(
                component=name, version=version, params=dict(params)))
            s.persist()
            return 200, project_to_obj(s.project)

    def _delete_node(self, node_id: str) -> tuple[int, Any]:
        s = self.session
        with s.lock:
            if node_id not in s.project.nodes:
                raise ApiError(404, "NOT_FOUND", f"node {node_id!r} does not exist")
            s.project = s.project.without_node(node_id)
            s.persist()
            return 200, project_to_obj(s.project)

    def _add_edge(self, body: Any) -> tuple[int, Any]:
        if not isinstance(body, dict) or "src" not in body or "dst" not in body:
            raise ApiError(400, "BAD_REQUEST", "body must carry src and dst")
        try:
            src = PortRef.parse(str(body["src"]))
            dst = PortRef.parse(str(body["dst"]))
        except DescriptorError as exc:
            raise ApiError(400, "BAD_REQUEST", str(exc))
        s = self.session
        with s.lock:
            try:
                s.project = connect(s.project, src, dst, s.resolver)
            except WiringError as exc:
                return 409, exc.violation.to_obj()
            s.persist()
            return 200, project_to_obj(s.project)

    def _substitutes(self, node_id: str) -> tuple[int, Any]:
        s = self.session
        with s.lock:
            if node_id not in s.project.nodes:
                raise ApiError(404, "NOT_FOUND", f"node {node_id!r} does not exist")
            node = s.project.nodes[node_id]
            results = []
            for record in s.candidate_records(node_id):
                d = record.descriptor
                if d.name == node.component and d.version == node.version:
                    continue
                try:
                    verdict = substitutable(s.project, node_id, d, s.resolver)
                except WiringError:
                    continue
                if verdict.ok:
                    results.append({
                        "component": str(d.name),
                        "version": str(d.version),
                        "summary": d.doc.summary,
                        "label": d.representation.label,
                        "download_count": record.download_count,
                    })
            results.sort(key=lambda r: (-r["download_count"], r["component"]))
            return 200, results

    def _replace(self, node_id: str, body: Any) -> tuple[int, Any]:
        if not isinstance(body, dict):
            raise ApiError(400, "BAD_REQUEST", "body must be a JSON object")
        try:
            name = GlobalName.parse(str(body.get("component", "")))
            version = Version.parse(str(body.get("version", "")))
        except DescriptorError as exc:
            raise ApiError(400, "BAD_REQUEST", str(exc))
        s = self.session
        with s.lock:
            if node_id not in s.project.nodes:
                raise ApiError(404, "NOT_FOUND", f"node {node_id!r} does not exist")
            try:
                candidate = s.resolver(name, version)
            except LookupError as exc:
                raise ApiError(404, "UNKNOWN_COMPONENT", str(exc))
            try:
                s.project = replace_node(s.project, node_id, candidate, s.resolver)
            except WiringError as exc:
                payload = exc.violation.to_obj()
                if exc.verdict is not None:
                    payload["reports"] = [
                        {"name": r.name, "kind": r.kind, "ok": r.ok, "reason": r.reason}
                        for r in exc.verdict.reports
                    ]
                return 409, payload
            s.persist()
            return 200, project_to_obj(s.project)

    def _set_params(self, node_id: str, body: Any) -> tuple[int, Any]:
        if not isinstance(body, dict) or not isinstance(body.get("params"), dict):
            raise ApiError(400, "BAD_REQUEST", "body must carry a params object")
        for name, value in body["params"].items():
            if not isinstance(value, (bool, int, float, str)):
                raise ApiError(400, "BAD_REQUEST", f"param {name!r} must be a scalar")
        s = self.session
        with s.lock:
            if node_id not in s.project.nodes:
                raise ApiError(404, "NOT_FOUND", f"node {node_id!r} does not exist")
            import dataclasses
            node = s.project.nodes[node_id]
            s.project = s.project.with_node(
                node_id, dataclasses.replace(node, params=dict(body["params"])))
            s.persist()
            return 200, project_to_obj(s.project)

    def _run(self) -> tuple[int, Any]:
        s = self.session
        with s.lock:
            violations = validate_project(s.project, s.resolver)
            if violations:
                return 409, {"violations": [v.to_obj() for v in violations]}
            report = run(s.project, s.resolver, s.artifact_resolver)
            return 200, report_to_obj(report)

    # -- registry proxy and layout sidecar -----------------------------------

    def _registry_search(self, query: Mapping[str, list[str]]) -> tuple[int, Any]:
        s = self.session
        if s.registry is not None:
            from urllib.parse import urlencode
            flat = [(k, v) for k, values in query.items() for v in values]
            from .httpjson import request_json
            status, payload = request_json(
                "GET", s.registry.base_url + "/v1/components?" + urlencode(flat))
            return status, payload
        # No registry configured: answer from the builtin catalog.
        records = []
        if s.catalog is not None:
            for d in s.catalog.descriptors():
                records.append(RegistryRecord(
                    descriptor=d, artifact_url=f"builtin:{d.key()}"))
        text_values = query.get("text") or [None]
        text = text_values[0]
        if text:
            records = [r for r in records
                       if text.lower() in (str(r.descriptor.name) + " "
                                           + r.descriptor.doc.summary).lower()]
        records.sort(key=lambda r: (-r.download_count, str(r.descriptor.name)))
        return 200, [r.to_obj() for r in records]

    def _layout_get(self) -> tuple[int, Any]:
        path = self.session.layout_path()
        if path is None or not path.exists():
            return 200, {}
        try:
            return 200, json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            return 200, {}

    def _layout_put(self, body: Any) -> tuple[int, Any]:
        if not isinstance(body, dict):
            raise ApiError(400, "BAD_REQUEST", "layout must be an object")
        path = self.session.layout_path()
        if path is not None:
            _atomic_write(path, json.dumps(body, indent=2) + "\n")
        return 200, body
