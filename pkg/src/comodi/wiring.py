"""Dataflow projects: wiring, compatibility checking, and composition.

A project is a directed acyclic graph of component instances.  Edges run
from provides ports to uses ports and each uses port accepts at most one
edge; fan-out from a provides port is unlimited.  Projects are
value-like: edit operations (:func:`connect`, :func:`replace_node`)
return updated copies and leave the input untouched on error.

Port compatibility is the directional structural relation implemented
by :func:`ports_compatible`: identical scalar kinds, arrays matching in
rank and specified extents, width-subtyped composites (the provider may
carry extra fields), and opaques matching on name plus major version
with a non-decreasing minor.

Execution order is a longest-path level assignment: the level of a node
is the length of the longest edge-path reaching it, so independent
nodes land in the same level and may run concurrently.

Component descriptors are looked up through a resolver callable
``resolver(name: GlobalName, version: Version) -> ComponentDescriptor``
that raises ``LookupError`` for unknown components.

Project files are strict UTF-8 JSON documents (extension
``.project.json``) with keys ``{meta, nodes, edges}`` and edge
references written ``"nodeId.port"``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping

from .model import (
    ComponentDescriptor,
    DataType,
    DescriptorError,
    Doc,
    GlobalName,
    IDENT_RE,
    PROVIDES,
    Behavior,
    Composition,
    PortSpec,
    Representation,
    USES,
    Version,
    _expect_list,
    _expect_obj,
    _expect_str,
    coerce_scalar,
    scalar_value_matches,
    validate_descriptor,
)

__all__ = [
    "VIOLATION_CODES",
    "MAX_COMPOUND_DEPTH",
    "Violation",
    "WiringError",
    "PortRef",
    "Edge",
    "ProjectNode",
    "ProjectMeta",
    "Project",
    "Schedule",
    "CompatVerdict",
    "SubstReport",
    "SubstVerdict",
    "ComponentIdentity",
    "Resolver",
    "ports_compatible",
    "connect",
    "validate_project",
    "schedule",
    "substitutable",
    "replace_node",
    "compose_compound",
    "flatten_compound",
    "flatten_project",
    "parse_project",
    "serialize_project",
    "project_from_obj",
    "project_to_obj",
    "validate_project_structure",
]

VIOLATION_CODES = frozenset({
    "UNBOUND_REQUIRED_USES",
    "TYPE_MISMATCH",
    "CYCLE",
    "DANGLING_REF",
    "DUPLICATE_BINDING",
    "UNKNOWN_COMPONENT",
    "PARAM_TYPE",
})

MAX_COMPOUND_DEPTH = 32

Resolver = Callable[[GlobalName, Version], ComponentDescriptor]


@dataclass(frozen=True)
class Violation:
    code: str
    path: str
    detail: str

    def __str__(self) -> str:
        return f"{self.code} at {self.path}: {self.detail}"

    def to_obj(self) -> dict:
        return {"code": self.code, "path": self.path, "detail": self.detail}


class WiringError(ValueError):
    """A wiring operation was rejected; carries the refusing violation."""

    def __init__(self, violation: Violation, verdict: "SubstVerdict | None" = None):
        super().__init__(str(violation))
        self.violation = violation
        self.verdict = verdict


@dataclass(frozen=True)
class PortRef:
    node: str
    port: str

    def __str__(self) -> str:
        return f"{self.node}.{self.port}"

    @classmethod
    def parse(cls, text: str) -> "PortRef":
        node, _, port = text.rpartition(".")
        if not node or not port:
            raise DescriptorError(f"malformed port reference {text!r}: expected node.port")
        return cls(node, port)


@dataclass(frozen=True)
class Edge:
    src: PortRef
    dst: PortRef


@dataclass(frozen=True)
class ProjectNode:
    component: GlobalName
    version: Version
    params: Mapping[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class ProjectMeta:
    title: str = ""
    description: str = ""


@dataclass(frozen=True)
class Project:
    nodes: Mapping[str, ProjectNode] = field(default_factory=dict)
    edges: tuple[Edge, ...] = ()
    meta: ProjectMeta = ProjectMeta()

    def with_node(self, node_id: str, node: ProjectNode) -> "Project":
        nodes = dict(self.nodes)
        nodes[node_id] = node
        return replace(self, nodes=nodes)

    def without_node(self, node_id: str) -> "Project":
        nodes = {k: v for k, v in self.nodes.items() if k != node_id}
        edges = tuple(e for e in self.edges
                      if e.src.node != node_id and e.dst.node != node_id)
        return replace(self, nodes=nodes, edges=edges)

    def edges_into(self, node_id: str) -> tuple[Edge, ...]:
        return tuple(e for e in self.edges if e.dst.node == node_id)

    def edges_out_of(self, node_id: str) -> tuple[Edge, ...]:
        return tuple(e for e in self.edges if e.src.node == node_id)


@dataclass(frozen=True)
class Schedule:
    """Longest-path level assignment; nodes within a level are independent."""

    levels: tuple[tuple[str, ...], ...]

    def level_of(self, node_id: str) -> int:
        for i, level in enumerate(self.levels):
            if node_id in level:
                return i
        raise KeyError(node_id)

    def order(self) -> tuple[str, ...]:
        return tuple(n for level in self.levels for n in level)


@dataclass(frozen=True)
class CompatVerdict:
    ok: bool
    reason: str = ""


@dataclass(frozen=True)
class SubstReport:
    name: str
    kind: str  # "uses" | "provides" | "param"
    ok: bool
    reason: str = ""


@dataclass(frozen=True)
class SubstVerdict:
    ok: bool
    reports: tuple[SubstReport, ...] = ()

    def failures(self) -> tuple[SubstReport, ...]:
        return tuple(r for r in self.reports if not r.ok)


@dataclass(frozen=True)
class ComponentIdentity:
    name: GlobalName
    version: Version
    doc: Doc = Doc()
    tags: tuple[str, ...] = ("uncategorized",)


# ---------------------------------------------------------------------------
# Port compatibility

def _mismatch(path: str, what: str) -> CompatVerdict:
    return CompatVerdict(False, f"{path}: {what}" if path else what)


def ports_compatible(provided: DataType, used: DataType, _path: str = "") -> CompatVerdict:
    """Directional structural compatibility of a provided type against a used type."""
    if provided.kind != used.kind:
        return _mismatch(_path, f"kind mismatch: {provided.kind} provided, {used.kind} used")
    if used.kind in ("integer64", "real64", "boolean", "text"):
        return CompatVerdict(True)
    if used.kind == "array":
        if provided.rank != used.rank:
            return _mismatch(_path, f"rank mismatch: {provided.rank} provided, {used.rank} used")
        if used.extents is not None:
            for i, want in enumerate(used.extents):
                if want is None:
                    continue
                have = provided.extents[i] if provided.extents is not None else None
                if have != want:
                    return _mismatch(_path, f"extents[{i}]: {have} provided, {want} used")
        return ports_compatible(provided.element, used.element,
                                f"{_path}.element" if _path else "element")
    if used.kind == "composite":
        have = provided.field_map()
        for name, want_type in used.fields or ():
            if name not in have:
                return _mismatch(_path, f"missing field {name}")
            sub = ports_compatible(have[name], want_type,
                                   f"{_path}.fields.{name}" if _path else f"fields.{name}")
            if not sub.ok:
                return sub
        return CompatVerdict(True)
    if used.kind == "opaque":
        if provided.name != used.name:
            return _mismatch(_path, f"opaque name mismatch: {provided.name} vs {used.name}")
        if provided.version.major != used.version.major:
            return _mismatch(_path, "opaque major version mismatch: "
                                    f"{provided.version} vs {used.version}")
        if provided.version.minor < used.version.minor:
            return _mismatch(_path, "opaque minor version too old: "
                                    f"{provided.version} provided, {used.version} used")
        return CompatVerdict(True)
    return _mismatch(_path, f"unknown kind {used.kind!r}")


# ---------------------------------------------------------------------------
# Graph inspection helpers

def _adjacency(edges: Iterable[Edge]) -> dict[str, set[str]]:
    adj: dict[str, set[str]] = {}
    for e in edges:
        adj.setdefault(e.src.node, set()).add(e.dst.node)
    return adj


def _reachable(adj: Mapping[str, set[str]], start: str) -> set[str]:
    seen: set[str] = set()
    stack = [start]
    while stack:
        n = stack.pop()
        for m in adj.get(n, ()):
            if m not in seen:
                seen.add(m)
                stack.append(m)
    return seen


def _find_cycle(nodes: Iterable[str], edges: Iterable[Edge]) -> list[str] | None:
    adj = _adjacency(edges)
    color: dict[str, int] = {}

    def visit(n: str, trail: list[str]) -> list[str] | None:
        color[n] = 1
        trail.append(n)
        for m in sorted(adj.get(n, ())):
            if color.get(m, 0) == 1:
                return trail[trail.index(m):]
            if color.get(m, 0) == 0:
                found = visit(m, trail)
                if found is not None:
                    return found
        trail.pop()
        color[n] = 2
        return None

    for n in sorted(nodes):
        if color.get(n, 0) == 0:
            found = visit(n, [])
            if found is not None:
                return found
    return None


def _resolve_node(p: Project, node_id: str, resolver: Resolver) -> ComponentDescriptor:
    node = p.nodes[node_id]
    try:
        return resolver(node.component, node.version)
    except LookupError:
        raise WiringError(Violation("UNKNOWN_COMPONENT", f"nodes.{node_id}",
                                    f"{node.component}@{node.version} is not resolvable"))


# ---------------------------------------------------------------------------
# Connect

def connect(p: Project, src: PortRef | tuple[str, str], dst: PortRef | tuple[str, str],
            resolver: Resolver) -> Project:
    """Append a provides->uses edge after checking both endpoints and types.

    Atomic: raises :class:`WiringError` (carrying the refusing
    violation) without touching the project.
    """
    src = PortRef(*src) if isinstance(src, tuple) else src
    dst = PortRef(*dst) if isinstance(dst, tuple) else dst

    for ref in (src, dst):
        if ref.node not in p.nodes:
            raise WiringError(Violation("DANGLING_REF", str(ref),
                                        f"node {ref.node!r} does not exist"))
    src_desc = _resolve_node(p, src.node, resolver)
    dst_desc = _resolve_node(p, dst.node, resolver)

    src_port = src_desc.port(src.port)
    if src_port is None or src_port.direction != PROVIDES:
        raise WiringError(Violation("DANGLING_REF", str(src),
                                    f"{src.port!r} is not a provides port of {src_desc.name}"))
    dst_port = dst_desc.port(dst.port)
    if dst_port is None or dst_port.direction != USES:
        raise WiringError(Violation("DANGLING_REF", str(dst),
                                    f"{dst.port!r} is not a uses port of {dst_desc.name}"))

    for e in p.edges:
        if e.dst == dst:
            raise WiringError(Violation("DUPLICATE_BINDING", str(dst),
                                        f"uses port already bound from {e.src}"))

    verdict = ports_compatible(src_port.datatype, dst_port.datatype)
    if not verdict.ok:
        raise WiringError(Violation("TYPE_MISMATCH", f"{src} -> {dst}", verdict.reason))

    if src.node == dst.node or src.node in _reachable(_adjacency(p.edges), dst.node):
        raise WiringError(Violation("CYCLE", f"{src} -> {dst}",
                                    "edge would create a dependency cycle"))

    return replace(p, edges=p.edges + (Edge(src, dst),))


# ---------------------------------------------------------------------------
# Validation

def validate_project(p: Project, resolver: Resolver) -> list[Violation]:
    """All violations preventing a run; empty exactly when the project is runnable."""
    out: list[Violation] = []
    descriptors: dict[str, ComponentDescriptor] = {}

    for node_id in sorted(p.nodes):
        node = p.nodes[node_id]
        try:
            descriptors[node_id] = resolver(node.component, node.version)
        except LookupError:
            out.append(Violation("UNKNOWN_COMPONENT", f"nodes.{node_id}",
                                 f"{node.component}@{node.version} is not resolvable"))

    for node_id in sorted(descriptors):
        desc = descriptors[node_id]
        node = p.nodes[node_id]
        for name in sorted(node.params):
            spec = desc.param(name)
            if spec is None:
                out.append(Violation("PARAM_TYPE", f"nodes.{node_id}.params.{name}",
                                     f"component declares no parameter {name!r}"))
                continue
            value = coerce_scalar(spec.datatype.kind, node.params[name])
            if not scalar_value_matches(spec.datatype.kind, value):
                out.append(Violation("PARAM_TYPE", f"nodes.{node_id}.params.{name}",
                                     f"value does not type-check against {spec.datatype.kind}"))
        for spec in desc.params:
            if spec.default is None and spec.name not in node.params:
                out.append(Violation("PARAM_TYPE", f"nodes.{node_id}.params.{spec.name}",
                                     "parameter has no default and is not bound"))

    bound_dst: set[PortRef] = set()
    for i, e in enumerate(p.edges):
        path = f"edges[{i}]"
        broken = False
        for ref, direction in ((e.src, PROVIDES), (e.dst, USES)):
            if ref.node not in p.nodes:
                out.append(Violation("DANGLING_REF", f"{path}:{ref}",
                                     f"node {ref.node!r} does not exist"))
                broken = True
            elif ref.node in descriptors:
                port = descriptors[ref.node].port(ref.port)
                if port is None or port.direction != direction:
                    out.append(Violation("DANGLING_REF", f"{path}:{ref}",
                                         f"{ref.port!r} is not a {direction} port"))
                    broken = True
            else:
                broken = True  # unresolved component already reported
        if not broken:
            if e.dst in bound_dst:
                out.append(Violation("DUPLICATE_BINDING", f"{path}:{e.dst}",
                                     "uses port bound more than once"))
            src_t = descriptors[e.src.node].port(e.src.port).datatype
            dst_t = descriptors[e.dst.node].port(e.dst.port).datatype
            verdict = ports_compatible(src_t, dst_t)
            if not verdict.ok:
                out.append(Violation("TYPE_MISMATCH", f"{path}:{e.src} -> {e.dst}",
                                     verdict.reason))
        bound_dst.add(e.dst)

    cycle = _find_cycle(p.nodes, p.edges)
    if cycle is not None:
        out.append(Violation("CYCLE", " -> ".join(cycle + [cycle[0]]),
                             "project graph contains a cycle"))

    for node_id in sorted(descriptors):
        desc = descriptors[node_id]
        for port in desc.ports:
            if port.direction == USES and port.required:
                ref = PortRef(node_id, port.name)
                if ref not in bound_dst:
                    out.append(Violation("UNBOUND_REQUIRED_USES", str(ref),
                                         "required uses port is not bound"))

    return out


# ---------------------------------------------------------------------------
# Scheduling

def schedule(p: Project) -> Schedule:
    """Longest-path level assignment, ids sorted within each level.

    Deterministic and insertion-order independent.  Raises
    :class:`WiringError` with a CYCLE violation on cyclic graphs.
    """
    cycle = _find_cycle(p.nodes, p.edges)
    if cycle is not None:
        raise WiringError(Violation("CYCLE", " -> ".join(cycle + [cycle[0]]),
                                    "cannot schedule a cyclic project"))
    preds: dict[str, set[str]] = {n: set() for n in p.nodes}
    for e in p.edges:
        preds[e.dst.node].add(e.src.node)

    level: dict[str, int] = {}

    def level_of(n: str) -> int:
        if n not in level:
            level[n] = 1 + max((level_of(m) for m in preds[n]), default=-1)
        return level[n]

    for n in p.nodes:
        level_of(n)

    depth = max(level.values(), default=-1) + 1
    buckets: list[list[str]] = [[] for _ in range(depth)]
    for n in sorted(level):
        buckets[level[n]].append(n)
    return Schedule(levels=tuple(tuple(b) for b in buckets))


# ---------------------------------------------------------------------------
# Substitutability

def substitutable(p: Project, node_id: str, candidate: ComponentDescriptor,
                  resolver: Resolver) -> SubstVerdict:
    """Check whether a candidate component can replace a node in place.

    Only connected ports and bound params constrain the candidate; its
    own unbound requirements (required uses ports, defaultless params)
    must be covered so the project stays valid after the swap.
    """
    if node_id not in p.nodes:
        raise WiringError(Violation("DANGLING_REF", node_id,
                                    f"node {node_id!r} does not exist"))
    reports: list[SubstReport] = []
    node = p.nodes[node_id]

    connected_uses: set[str] = set()
    for e in p.edges_into(node_id):
        q = e.dst.port
        connected_uses.add(q)
        port = candidate.port(q)
        if port is None or port.direction != USES:
            reports.append(SubstReport(q, "uses", False,
                                       f"candidate has no uses port {q!r}"))
            continue
        src_desc = _resolve_node(p, e.src.node, resolver)
        src_port = src_desc.port(e.src.port)
        verdict = ports_compatible(src_port.datatype, port.datatype)
        reports.append(SubstReport(q, "uses", verdict.ok, verdict.reason))

    seen_out: set[str] = set()
    for e in p.edges_out_of(node_id):
        r = e.src.port
        port = candidate.port(r)
        if port is None or port.direction != PROVIDES:
            if r not in seen_out:
                reports.append(SubstReport(r, "provides", False,
                                           f"candidate has no provides port {r!r}"))
                seen_out.add(r)
            continue
        consumer = _resolve_node(p, e.dst.node, resolver)
        used = consumer.port(e.dst.port).datatype
        verdict = ports_compatible(port.datatype, used)
        reports.append(SubstReport(r, "provides", verdict.ok,
                                   verdict.reason if not verdict.ok else f"feeds {e.dst}"))

    for name in sorted(node.params):
        spec = candidate.param(name)
        if spec is None:
            reports.append(SubstReport(name, "param", False,
                                       f"candidate declares no parameter {name!r}"))
        elif not scalar_value_matches(spec.datatype.kind,
                                      coerce_scalar(spec.datatype.kind, node.params[name])):
            reports.append(SubstReport(name, "param", False,
                                       f"bound value does not match {spec.datatype.kind}"))
        else:
            reports.append(SubstReport(name, "param", True))

    for port in candidate.ports:
        if port.direction == USES and port.required and port.name not in connected_uses:
            reports.append(SubstReport(port.name, "uses", False,
                                       "candidate requires uses port "
                                       f"{port.name!r} which is unbound here"))
    for spec in candidate.params:
        if spec.default is None and spec.name not in node.params:
            reports.append(SubstReport(spec.name, "param", False,
                                       f"candidate parameter {spec.name!r} has no default "
                                       "and no binding"))

    return SubstVerdict(ok=all(r.ok for r in reports), reports=tuple(reports))


def replace_node(p: Project, node_id: str, candidate: ComponentDescriptor,
                 resolver: Resolver) -> Project:
    """Swap a node's component for a substitutable candidate, keeping all edges.

    Atomic: a failing substitutability verdict is raised verbatim and
    the project is unchanged.
    """
    verdict = substitutable(p, node_id, candidate, resolver)
    if not verdict.ok:
        detail = "; ".join(f"{r.kind} {r.name}: {r.reason}" for r in verdict.failures())
        raise WiringError(Violation("TYPE_MISMATCH", f"nodes.{node_id}", detail),
                          verdict=verdict)
    node = p.nodes[node_id]
    return p.with_node(node_id, replace(node, component=candidate.name,
                                        version=candidate.version))


# ---------------------------------------------------------------------------
# Compound components

def compose_compound(p: Project, promotions: Mapping[str, str],
                     identity: ComponentIdentity, resolver: Resolver) -> ComponentDescriptor:
    """Package a project as a compound component by promoting inner ports.

    ``promotions`` maps inner ``"node.port"`` references to outer port
    names.  The project must be valid except that promoted uses ports
    may be unbound; promoting a uses port already fed by an internal
    edge is rejected, as are duplicate outer names and dangling
    references.
    """
    outer_seen: dict[str, str] = {}
    promoted_uses: set[PortRef] = set()
    ports: list[PortSpec] = []

    bound_dst = {e.dst for e in p.edges}
    for inner, outer in sorted(promotions.items()):
        ref = PortRef.parse(inner)
        if ref.node not in p.nodes:
            raise WiringError(Violation("DANGLING_REF", inner,
                                        f"promotion target absent: {inner}"))
        desc = _resolve_node(p, ref.node, resolver)
        port = desc.port(ref.port)
        if port is None:
            raise WiringError(Violation("DANGLING_REF", inner,
                                        f"promotion target absent: {inner}"))
        if outer in outer_seen:
            raise WiringError(Violation("DUPLICATE_BINDING", outer,
                                        f"outer port {outer!r} promoted from both "
                                        f"{outer_seen[outer]} and {inner}"))
        outer_seen[outer] = inner
        if port.direction == USES:
            if ref in bound_dst:
                raise WiringError(Violation("DUPLICATE_BINDING", inner,
                                            "cannot promote a uses port bound by an "
                                            "internal edge"))
            promoted_uses.add(ref)
        ports.append(PortSpec(name=outer, direction=port.direction,
                              datatype=port.datatype, required=port.required,
                              doc=port.doc))

    violations = [v for v in validate_project(p, resolver)
                  if not (v.code == "UNBOUND_REQUIRED_USES"
                          and PortRef.parse(v.path) in promoted_uses)]
    if violations:
        raise WiringError(violations[0])

    inner_behaviors = [_resolve_node(p, n, resolver).behavior for n in sorted(p.nodes)]
    behavior = Behavior(
        deterministic=all(b.deterministic for b in inner_behaviors),
        stateful=any(b.stateful for b in inner_behaviors),
    )
    ports.sort(key=lambda port: (0 if port.direction == USES else 1, port.name))

    descriptor = ComponentDescriptor(
        name=identity.name,
        version=identity.version,
        kind="compound",
        doc=identity.doc,
        tags=identity.tags,
        ports=tuple(ports),
        params=(),
        behavior=behavior,
        representation=Representation(label=identity.name.segments[-1],
                                      category=identity.tags[0].split("/")[0]),
        composition=Composition(project=p, promotions=dict(promotions)),
    )
    problems = validate_descriptor(descriptor)
    if problems:
        raise WiringError(Violation("DANGLING_REF", str(identity.name),
                                    "; ".join(problems)))
    return descriptor


def _expand(p: Project, resolver: Resolver, depth: int) -> tuple[
        dict[str, ProjectNode], list[Edge], dict[str, dict[str, PortRef] | None]]:
    if depth > MAX_COMPOUND_DEPTH:
        raise WiringError(Violation("CYCLE", "composition",
                                    f"compound nesting exceeds {MAX_COMPOUND_DEPTH} levels "
                                    "(cycle of compound references?)"))
    nodes: dict[str, ProjectNode] = {}
    edges: list[Edge] = []
    portmap: dict[str, dict[str, PortRef] | None] = {}

    for node_id, node in p.nodes.items():
        desc = _resolve_node(p, node_id, resolver)
        if desc.kind == "elementary":
            nodes[node_id] = node
            portmap[node_id] = None
        else:
            inner_nodes, inner_edges, inner_map = _expand(
                desc.composition.project, resolver, depth + 1)
            for iid, inode in inner_nodes.items():
                nodes[f"{node_id}.{iid}"] = inode
            for e in inner_edges:
                edges.append(Edge(PortRef(f"{node_id}.{e.src.node}", e.src.port),
                                  PortRef(f"{node_id}.{e.dst.node}", e.dst.port)))
            mapping: dict[str, PortRef] = {}
            for inner_ref, outer in desc.composition.promotions.items():
                ref = PortRef.parse(inner_ref)
                target = inner_map.get(ref.node)
                final = ref if target is None else target.get(ref.port)
                if final is None:
                    raise WiringError(Violation("DANGLING_REF", inner_ref,
                                                f"promotion target absent: {inner_ref}"))
                mapping[outer] = PortRef(f"{node_id}.{final.node}", final.port)
            portmap[node_id] = mapping

    def rewrite(ref: PortRef) -> PortRef:
        mapping = portmap.get(ref.node)
        if mapping is None:
            return ref
        final = mapping.get(ref.port)
        if final is None:
            raise WiringError(Violation("DANGLING_REF", str(ref),
                                        f"compound port {ref.port!r} has no promotion"))
        return final

    for e in p.edges:
        edges.append(Edge(rewrite(e.src), rewrite(e.dst)))

    return nodes, edges, portmap


def flatten_project(p: Project, resolver: Resolver) -> Project:
    """Expand every compound node into its elementary constituents.

    Instance ids of inlined nodes are namespaced by the compound
    instance path (``outer.inner``); promotions become direct edges.
    """
    nodes, edges, _ = _expand(p, resolver, depth=1)
    return Project(nodes=nodes, edges=tuple(edges), meta=p.meta)


def flatten_compound(d: ComponentDescriptor, resolver: Resolver) -> Project:
    """Expand a compound descriptor into a fully elementary project."""
    if d.kind != "compound" or d.composition is None:
        raise WiringError(Violation("DANGLING_REF", str(d.name),
                                    "flatten requires a compound descriptor"))
    return flatten_project(d.composition.project, resolver)


# ---------------------------------------------------------------------------
# Project document codec

def project_from_obj(obj: object, path: str = "project") -> Project:
    """Structural parse of a project JSON object (no invariant checks)."""
    data = _expect_obj(obj, path, ("meta", "nodes", "edges"))
    meta_obj = _expect_obj(data["meta"], f"{path}.meta", ("title", "description"))
    meta = ProjectMeta(_expect_str(meta_obj["title"], f"{path}.meta.title"),
                       _expect_str(meta_obj["description"], f"{path}.meta.description"))

    raw_nodes = data["nodes"]
    if not isinstance(raw_nodes, dict):
        raise DescriptorError(f"{path}.nodes: expected object")
    nodes: dict[str, ProjectNode] = {}
    for node_id, entry in raw_nodes.items():
        npath = f"{path}.nodes.{node_id}"
        nd = _expect_obj(entry, npath, ("component", "version", "params"))
        raw_params = nd["params"]
        if not isinstance(raw_params, dict):
            raise DescriptorError(f"{npath}.params: expected object")
        params: dict[str, object] = {}
        for name, value in raw_params.items():
            if not isinstance(value, (bool, int, float, str)):
                raise DescriptorError(f"{npath}.params.{name}: expected scalar")
            params[name] = value
        nodes[node_id] = ProjectNode(
            component=GlobalName.parse(_expect_str(nd["component"], f"{npath}.component")),
            version=Version.parse(_expect_str(nd["version"], f"{npath}.version")),
            params=params,
        )

    edges = []
    for i, entry in enumerate(_expect_list(data["edges"], f"{path}.edges")):
        ed = _expect_obj(entry, f"{path}.edges[{i}]", ("src", "dst"))
        edges.append(Edge(PortRef.parse(_expect_str(ed["src"], f"{path}.edges[{i}].src")),
                          PortRef.parse(_expect_str(ed["dst"], f"{path}.edges[{i}].dst"))))

    return Project(nodes=nodes, edges=tuple(edges), meta=meta)


def project_to_obj(p: Project) -> dict:
    """Project as a JSON-ready dict; nodes and param maps emitted name-sorted."""
    return {
        "meta": {"title": p.meta.title, "description": p.meta.description},
        "nodes": {
            node_id: {
                "component": str(node.component),
                "version": str(node.version),
                "params": {k: node.params[k] for k in sorted(node.params)},
            }
            for node_id, node in sorted(p.nodes.items())
        },
        "edges": [{"src": str(e.src), "dst": str(e.dst)} for e in p.edges],
    }


def validate_project_structure(p: Project, path: str, out: list[str]) -> None:
    """Resolver-free structural checks, appended as violation strings."""
    for node_id in p.nodes:
        if not all(IDENT_RE.match(part) for part in node_id.split(".")):
            out.append(f"{path}.nodes.{node_id}: invalid instance id")
    seen_dst: set[PortRef] = set()
    for i, e in enumerate(p.edges):
        for ref in (e.src, e.dst):
            if ref.node not in p.nodes:
                out.append(f"{path}.edges[{i}]: dangling reference {ref}")
        if e.dst in seen_dst:
            out.append(f"{path}.edges[{i}]: uses port {e.dst} bound more than once")
        seen_dst.add(e.dst)
    cycle = _find_cycle(p.nodes, p.edges)
    if cycle is not None:
        out.append(f"{path}: cycle " + " -> ".join(cycle + [cycle[0]]))


def parse_project(text: str) -> Project:
    """Parse a .project.json document, rejecting structural invariant violations."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DescriptorError(f"syntax error at line {exc.lineno} column {exc.colno}: {exc.msg}",
                              line=exc.lineno, column=exc.colno) from exc
    project = project_from_obj(obj)
    problems: list[str] = []
    validate_project_structure(project, "project", problems)
    if problems:
        raise DescriptorError("invalid project: " + "; ".join(problems),
                              violations=problems)
    return project


def serialize_project(p: Project) -> str:
    """Canonical UTF-8 project document."""
    return json.dumps(project_to_obj(p), indent=2, ensure_ascii=False) + "\n"
