"""Component descriptor model and its canonical text form.

A component descriptor is the published contract of a computational
component: global name, version, typed uses/provides ports, scalar
parameters, behavior flags, and either an implementation reference
(elementary) or an embedded project with port promotions (compound).

Descriptor files are strict UTF-8 JSON documents (extension
``.comodi.json``).  Serialization is canonical: keys are emitted in the
fixed order documented on :func:`serialize_descriptor`, composite type
fields and promotion maps are sorted by name, and equal descriptors
always produce byte-identical documents.

Construction does not enforce invariants; :func:`validate_descriptor`
reports them as data and :func:`parse_descriptor` rejects documents that
carry violations.  All types are immutable and safe to share.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, TYPE_CHECKING

if TYPE_CHECKING:
    from .wiring import Project

__all__ = [
    "SCALAR_KINDS",
    "USES",
    "PROVIDES",
    "INTEGER64",
    "REAL64",
    "BOOLEAN",
    "TEXT",
    "DescriptorError",
    "GlobalName",
    "Version",
    "DataType",
    "PortSpec",
    "ParamSpec",
    "Doc",
    "Behavior",
    "Representation",
    "Implementation",
    "Composition",
    "ComponentDescriptor",
    "parse_descriptor",
    "serialize_descriptor",
    "validate_descriptor",
    "parse_datatype",
    "datatype_to_obj",
    "datatype_from_obj",
    "scalar_value_matches",
]

SEGMENT_RE = re.compile(r"^[a-z][a-z0-9_]*$")
IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
TAG_SEGMENT_RE = re.compile(r"^[a-z0-9][a-z0-9_-]*$")
VERSION_RE = re.compile(r"^(0|[1-9][0-9]*)\.(0|[1-9][0-9]*)\.(0|[1-9][0-9]*)$")

SCALAR_KINDS = ("integer64", "real64", "boolean", "text")
ALL_KINDS = SCALAR_KINDS + ("array", "composite", "opaque")
BACKENDS = ("builtin", "subprocess", "plugin")

USES = "uses"
PROVIDES = "provides"

MAX_NAME_LENGTH = 255
MAX_RANK = 7
MAX_TYPE_DEPTH = 16

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


class DescriptorError(ValueError):
    """Raised when a descriptor document cannot be parsed or is invalid.

    ``line``/``column`` are set for syntax errors, ``violations`` for
    invariant failures detected after structural parsing.
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None,
                 violations: list[str] | None = None):
        super().__init__(message)
        self.line = line
        self.column = column
        self.violations = violations or []


@dataclass(frozen=True, order=True)
class Version:
    major: int
    minor: int
    patch: int

    def __str__(self) -> str:
        return f"{self.major}.{self.minor}.{self.patch}"

    @classmethod
    def parse(cls, text: str) -> "Version":
        m = VERSION_RE.match(text)
        if not m:
            raise DescriptorError(f"invalid version {text!r}: expected M.m.p")
        return cls(int(m.group(1)), int(m.group(2)), int(m.group(3)))


@dataclass(frozen=True, order=True)
class GlobalName:
    """Reverse-domain style global identifier, e.g. org.comodi.examples.square."""

    segments: tuple[str, ...]

    def __str__(self) -> str:
        return ".".join(self.segments)

    @classmethod
    def parse(cls, text: str) -> "GlobalName":
        if not isinstance(text, str) or not text:
            raise DescriptorError(f"invalid global name {text!r}")
        return cls(tuple(text.split(".")))


@dataclass(frozen=True)
class DataType:
    """Structural semantic type flowing through a port.

    Exactly the fields matching ``kind`` are populated.  Composite
    fields are kept name-sorted so equal types compare and serialize
    identically; arrays whose extents are all unspecified normalize to
    ``extents=None``.
    """

    kind: str
    element: "DataType | None" = None
    rank: int | None = None
    extents: tuple[int | None, ...] | None = None
    fields: tuple[tuple[str, "DataType"], ...] | None = None
    name: GlobalName | None = None
    version: Version | None = None

    def __post_init__(self) -> None:
        if self.extents is not None and all(e is None for e in self.extents):
            object.__setattr__(self, "extents", None)
        if self.fields is not None:
            object.__setattr__(self, "fields", tuple(sorted(self.fields, key=lambda kv: kv[0])))

    @classmethod
    def scalar(cls, kind: str) -> "DataType":
        return cls(kind=kind)

    @classmethod
    def array(cls, element: "DataType", rank: int,
              extents: Iterable[int | None] | None = None) -> "DataType":
        return cls(kind="array", element=element, rank=rank,
                   extents=None if extents is None else tuple(extents))

    @classmethod
    def composite(cls, fields: Mapping[str, "DataType"]) -> "DataType":
        return cls(kind="composite", fields=tuple(fields.items()))

    @classmethod
    def opaque(cls, name: GlobalName, version: Version) -> "DataType":
        return cls(kind="opaque", name=name, version=version)

    def field_map(self) -> dict[str, "DataType"]:
        return dict(self.fields or ())

    def depth(self) -> int:
        if self.kind == "array":
            return 1 + (self.element.depth() if self.element is not None else 0)
        if self.kind == "composite":
            return 1 + max((t.depth() for _, t in self.fields or ()), default=0)
        return 1


INTEGER64 = DataType.scalar("integer64")
REAL64 = DataType.scalar("real64")
BOOLEAN = DataType.scalar("boolean")
TEXT = DataType.scalar("text")


@dataclass(frozen=True)
class PortSpec:
    name: str
    direction: str
    datatype: DataType
    required: bool = True  # meaningful for uses ports only
    doc: str = ""


@dataclass(frozen=True)
class ParamSpec:
    name: str
    datatype: DataType
    default: object = None  # scalar value of the declared type, or None
    doc: str = ""


@dataclass(frozen=True)
class Doc:
    summary: str = ""
    description: str = ""
    authors: tuple[str, ...] = ()


@dataclass(frozen=True)
class Behavior:
    deterministic: bool = True
    stateful: bool = False


@dataclass(frozen=True)
class Representation:
    label: str = ""
    category: str = ""


@dataclass(frozen=True)
class Implementation:
    backend: str
    artifact: str
    entry: str = ""
    platforms: tuple[str, ...] = ("any",)


@dataclass(frozen=True)
class Composition:
    """Embedded project plus promotion map inner "node.port" -> outer port name."""

    project: "Project"
    promotions: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class ComponentDescriptor:
    name: GlobalName
    version: Version
    kind: str  # "elementary" | "compound"
    doc: Doc = Doc()
    tags: tuple[str, ...] = ()
    ports: tuple[PortSpec, ...] = ()
    params: tuple[ParamSpec, ...] = ()
    behavior: Behavior = Behavior()
    representation: Representation = Representation()
    implementation: Implementation | None = None
    composition: Composition | None = None

    def port(self, name: str) -> PortSpec | None:
        for p in self.ports:
            if p.name == name:
                return p
        return None

    def ports_by_direction(self, direction: str) -> tuple[PortSpec, ...]:
        return tuple(p for p in self.ports if p.direction == direction)

    def param(self, name: str) -> ParamSpec | None:
        for p in self.params:
            if p.name == name:
                return p
        return None

    def key(self) -> str:
        return f"{self.name}@{self.version}"


# ---------------------------------------------------------------------------
# Scalar value checks (shared by params, defaults and the runtime layer)

def scalar_value_matches(kind: str, value: object) -> bool:
    """True if a plain Python value is a legal payload for a scalar kind."""
    if kind == "integer64":
        return isinstance(value, int) and not isinstance(value, bool) \
            and INT64_MIN <= value <= INT64_MAX
    if kind == "real64":
        return isinstance(value, float)
    if kind == "boolean":
        return isinstance(value, bool)
    if kind == "text":
        return isinstance(value, str)
    return False


def coerce_scalar(kind: str, value: object) -> object:
    """Coerce a JSON-sourced scalar to the declared kind (int -> real64 widening)."""
    if kind == "real64" and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    return value


# ---------------------------------------------------------------------------
# Strict JSON helpers

def _expect_obj(value: object, path: str, required: tuple[str, ...],
                optional: tuple[str, ...] = ()) -> dict:
    if not isinstance(value, dict):
        raise DescriptorError(f"{path}: expected object, got {type(value).__name__}")
    for key in value:
        if key not in required and key not in optional:
            raise DescriptorError(f"{path}: unknown field {key!r}")
    for key in required:
        if key not in value:
            raise DescriptorError(f"{path}: missing field {key!r}")
    return value


def _expect_str(value: object, path: str) -> str:
    if not isinstance(value, str):
        raise DescriptorError(f"{path}: expected string, got {type(value).__name__}")
    return value


def _expect_bool(value: object, path: str) -> bool:
    if not isinstance(value, bool):
        raise DescriptorError(f"{path}: expected boolean, got {type(value).__name__}")
    return value


def _expect_list(value: object, path: str) -> list:
    if not isinstance(value, list):
        raise DescriptorError(f"{path}: expected array, got {type(value).__name__}")
    return value


# ---------------------------------------------------------------------------
# DataType codec

def datatype_from_obj(obj: object, path: str = "datatype") -> DataType:
    data = _expect_obj(obj, path, ("kind",), ("element", "rank", "extents", "fields",
                                              "name", "version"))
    kind = _expect_str(data["kind"], f"{path}.kind")
    if kind in SCALAR_KINDS:
        _expect_obj(obj, path, ("kind",))
        return DataType.scalar(kind)
    if kind == "array":
        _expect_obj(obj, path, ("kind", "element", "rank"), ("extents",))
        element = datatype_from_obj(data["element"], f"{path}.element")
        rank = data["rank"]
        if not isinstance(rank, int) or isinstance(rank, bool):
            raise DescriptorError(f"{path}.rank: expected integer")
        extents = None
        if "extents" in data:
            raw = _expect_list(data["extents"], f"{path}.extents")
            ext: list[int | None] = []
            for i, e in enumerate(raw):
                if e is None:
                    ext.append(None)
                elif isinstance(e, int) and not isinstance(e, bool):
                    ext.append(e)
                else:
                    raise DescriptorError(f"{path}.extents[{i}]: expected integer or null")
            extents = ext
        return DataType.array(element, rank, extents)
    if kind == "composite":
        _expect_obj(obj, path, ("kind", "fields"))
        raw = data["fields"]
        if not isinstance(raw, dict):
            raise DescriptorError(f"{path}.fields: expected object")
        return DataType.composite({
            name: datatype_from_obj(t, f"{path}.fields.{name}") for name, t in raw.items()
        })
    if kind == "opaque":
        _expect_obj(obj, path, ("kind", "name", "version"))
        return DataType.opaque(GlobalName.parse(_expect_str(data["name"], f"{path}.name")),
                               Version.parse(_expect_str(data["version"], f"{path}.version")))
    raise DescriptorError(f"{path}.kind: unknown kind {kind!r}")


def datatype_to_obj(t: DataType) -> dict:
    if t.kind in SCALAR_KINDS:
        return {"kind": t.kind}
    if t.kind == "array":
        out: dict[str, Any] = {"kind": "array", "element": datatype_to_obj(t.element),
                               "rank": t.rank}
        if t.extents is not None:
            out["extents"] = list(t.extents)
        return out
    if t.kind == "composite":
        return {"kind": "composite",
                "fields": {name: datatype_to_obj(ft) for name, ft in (t.fields or ())}}
    if t.kind == "opaque":
        return {"kind": "opaque", "name": str(t.name), "version": str(t.version)}
    raise DescriptorError(f"cannot serialize datatype of kind {t.kind!r}")


def parse_datatype(text: str) -> DataType:
    """Parse a type given either as a bare scalar kind token or a JSON object."""
    token = text.strip()
    if token in SCALAR_KINDS:
        return DataType.scalar(token)
    try:
        obj = json.loads(token)
    except json.JSONDecodeError as exc:
        raise DescriptorError(f"invalid datatype {text!r}: {exc.msg}") from exc
    return datatype_from_obj(obj)


# ---------------------------------------------------------------------------
# Descriptor parsing

def parse_descriptor(text: str) -> ComponentDescriptor:
    """Parse and validate a descriptor document.

    Raises :class:`DescriptorError` for syntax errors (position
    reported), unknown fields, and invariant violations (the violation
    list is attached).
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DescriptorError(f"syntax error at line {exc.lineno} column {exc.colno}: {exc.msg}",
                              line=exc.lineno, column=exc.colno) from exc
    descriptor = descriptor_from_obj(obj)
    violations = validate_descriptor(descriptor)
    if violations:
        raise DescriptorError("invalid descriptor: " + "; ".join(violations),
                              violations=violations)
    return descriptor


def descriptor_from_obj(obj: object) -> ComponentDescriptor:
    """Structural parse of a descriptor JSON object (no invariant checks)."""
    data = _expect_obj(obj, "descriptor",
                       ("name", "version", "kind", "doc", "tags", "ports", "params",
                        "behavior", "representation"),
                       ("implementation", "composition"))

    doc_obj = _expect_obj(data["doc"], "doc", ("summary", "description", "authors"))
    authors = tuple(_expect_str(a, f"doc.authors[{i}]")
                    for i, a in enumerate(_expect_list(doc_obj["authors"], "doc.authors")))
    doc = Doc(_expect_str(doc_obj["summary"], "doc.summary"),
              _expect_str(doc_obj["description"], "doc.description"), authors)

    tags = tuple(_expect_str(t, f"tags[{i}]")
                 for i, t in enumerate(_expect_list(data["tags"], "tags")))

    ports = []
    for i, p in enumerate(_expect_list(data["ports"], "ports")):
        pd = _expect_obj(p, f"ports[{i}]", ("name", "direction", "datatype"),
                         ("required", "doc"))
        ports.append(PortSpec(
            name=_expect_str(pd["name"], f"ports[{i}].name"),
            direction=_expect_str(pd["direction"], f"ports[{i}].direction"),
            datatype=datatype_from_obj(pd["datatype"], f"ports[{i}].datatype"),
            required=_expect_bool(pd.get("required", True), f"ports[{i}].required"),
            doc=_expect_str(pd.get("doc", ""), f"ports[{i}].doc"),
        ))

    params = []
    for i, p in enumerate(_expect_list(data["params"], "params")):
        pd = _expect_obj(p, f"params[{i}]", ("name", "datatype"), ("default", "doc"))
        datatype = datatype_from_obj(pd["datatype"], f"params[{i}].datatype")
        default = pd.get("default")
        if default is not None:
            default = coerce_scalar(datatype.kind, default)
        params.append(ParamSpec(
            name=_expect_str(pd["name"], f"params[{i}].name"),
            datatype=datatype,
            default=default,
            doc=_expect_str(pd.get("doc", ""), f"params[{i}].doc"),
        ))

    beh = _expect_obj(data["behavior"], "behavior", ("deterministic", "stateful"))
    behavior = Behavior(_expect_bool(beh["deterministic"], "behavior.deterministic"),
                        _expect_bool(beh["stateful"], "behavior.stateful"))

    rep = _expect_obj(data["representation"], "representation", ("label", "category"))
    representation = Representation(_expect_str(rep["label"], "representation.label"),
                                    _expect_str(rep["category"], "representation.category"))

    implementation = None
    if "implementation" in data:
        im = _expect_obj(data["implementation"], "implementation",
                         ("backend", "artifact", "entry", "platforms"))
        platforms = tuple(_expect_str(pl, f"implementation.platforms[{i}]")
                          for i, pl in enumerate(_expect_list(im["platforms"],
                                                              "implementation.platforms")))
        implementation = Implementation(
            backend=_expect_str(im["backend"], "implementation.backend"),
            artifact=_expect_str(im["artifact"], "implementation.artifact"),
            entry=_expect_str(im["entry"], "implementation.entry"),
            platforms=platforms,
        )

    composition = None
    if "composition" in data:
        from .wiring import project_from_obj
        co = _expect_obj(data["composition"], "composition", ("project", "promotions"))
        project = project_from_obj(co["project"], "composition.project")
        raw_prom = co["promotions"]
        if not isinstance(raw_prom, dict):
            raise DescriptorError("composition.promotions: expected object")
        promotions = {}
        for inner, outer in raw_prom.items():
            promotions[inner] = _expect_str(outer, f"composition.promotions[{inner!r}]")
        composition = Composition(project=project, promotions=promotions)

    return ComponentDescriptor(
        name=GlobalName.parse(_expect_str(data["name"], "name")),
        version=Version.parse(_expect_str(data["version"], "version")),
        kind=_expect_str(data["kind"], "kind"),
        doc=doc,
        tags=tags,
        ports=tuple(ports),
        params=tuple(params),
        behavior=behavior,
        representation=representation,
        implementation=implementation,
        composition=composition,
    )


# ---------------------------------------------------------------------------
# Canonical serialization

def descriptor_to_obj(d: ComponentDescriptor) -> dict:
    """Descriptor as a JSON-ready dict in canonical key order.

    Key order: name, version, kind, doc, tags, ports, params, behavior,
    representation, then implementation or composition.  Composite type
    fields and promotion maps are emitted name-sorted; everything else
    preserves declaration order.
    """
    out: dict[str, Any] = {
        "name": str(d.name),
        "version": str(d.version),
        "kind": d.kind,
        "doc": {"summary": d.doc.summary, "description": d.doc.description,
                "authors": list(d.doc.authors)},
        "tags": list(d.tags),
        "ports": [
            {"name": p.name, "direction": p.direction,
             "datatype": datatype_to_obj(p.datatype), "required": p.required, "doc": p.doc}
            for p in d.ports
        ],
        "params": [],
        "behavior": {"deterministic": d.behavior.deterministic,
                     "stateful": d.behavior.stateful},
        "representation": {"label": d.representation.label,
                           "category": d.representation.category},
    }
    for p in d.params:
        entry: dict[str, Any] = {"name": p.name, "datatype": datatype_to_obj(p.datatype)}
        if p.default is not None:
            entry["default"] = p.default
        entry["doc"] = p.doc
        out["params"].append(entry)
    if d.implementation is not None:
        im = d.implementation
        out["implementation"] = {"backend": im.backend, "artifact": im.artifact,
                                 "entry": im.entry, "platforms": list(im.platforms)}
    if d.composition is not None:
        from .wiring import project_to_obj
        out["composition"] = {
            "project": project_to_obj(d.composition.project),
            "promotions": {k: d.composition.promotions[k]
                           for k in sorted(d.composition.promotions)},
        }
    return out


def serialize_descriptor(d: ComponentDescriptor) -> str:
    """Canonical UTF-8 document; byte-identical for equal descriptors."""
    return json.dumps(descriptor_to_obj(d), indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# Validation

def _validate_datatype(t: DataType, path: str, out: list[str], depth: int = 1) -> None:
    if depth > MAX_TYPE_DEPTH:
        out.append(f"{path}: nesting depth exceeds {MAX_TYPE_DEPTH}")
        return
    if t.kind in SCALAR_KINDS:
        return
    if t.kind == "array":
        if t.element is None:
            out.append(f"{path}: array missing element type")
        else:
            _validate_datatype(t.element, f"{path}.element", out, depth + 1)
        if t.rank is None or t.rank < 1 or t.rank > MAX_RANK:
            out.append(f"{path}.rank: rank must be in 1..{MAX_RANK}")
        elif t.extents is not None:
            if len(t.extents) != t.rank:
                out.append(f"{path}.extents: expected {t.rank} entries, got {len(t.extents)}")
            for i, e in enumerate(t.extents):
                if e is not None and e < 1:
                    out.append(f"{path}.extents[{i}]: extent must be positive")
        return
    if t.kind == "composite":
        fields = t.fields or ()
        if not fields:
            out.append(f"{path}: composite must have at least one field")
        seen: set[str] = set()
        for name, ft in fields:
            if not IDENT_RE.match(name):
                out.append(f"{path}.fields.{name}: invalid field name")
            if name in seen:
                out.append(f"{path}.fields.{name}: duplicate field name")
            seen.add(name)
            _validate_datatype(ft, f"{path}.fields.{name}", out, depth + 1)
        return
    if t.kind == "opaque":
        if t.name is None or t.version is None:
            out.append(f"{path}: opaque requires name and version")
        else:
            _validate_global_name(t.name, f"{path}.name", out)
            _validate_version(t.version, f"{path}.version", out)
        return
    out.append(f"{path}.kind: unknown kind {t.kind!r}")


def _validate_global_name(name: GlobalName, path: str, out: list[str]) -> None:
    if len(name.segments) < 2:
        out.append(f"{path}: global name needs at least 2 segments")
    for seg in name.segments:
        if not SEGMENT_RE.match(seg):
            out.append(f"{path}: invalid segment {seg!r}")
    if len(str(name)) > MAX_NAME_LENGTH:
        out.append(f"{path}: name longer than {MAX_NAME_LENGTH} characters")


def _validate_version(v: Version, path: str, out: list[str]) -> None:
    for part, label in ((v.major, "major"), (v.minor, "minor"), (v.patch, "patch")):
        if not isinstance(part, int) or isinstance(part, bool) or part < 0:
            out.append(f"{path}.{label}: must be a non-negative integer")


def validate_descriptor(d: ComponentDescriptor) -> list[str]:
    """All invariant violations, each naming the invariant and the offending path.

    Empty list iff :func:`parse_descriptor` would accept the serialized form.
    """
    out: list[str] = []
    _validate_global_name(d.name, "name", out)
    _validate_version(d.version, "version", out)

    if d.kind not in ("elementary", "compound"):
        out.append(f"kind: must be elementary or compound, got {d.kind!r}")

    if not d.tags:
        out.append("tags: at least one classification tag required")
    for i, tag in enumerate(d.tags):
        parts = tag.split("/")
        if not parts or any(not TAG_SEGMENT_RE.match(p) for p in parts):
            out.append(f"tags[{i}]: invalid classification path {tag!r}")

    seen_ports: set[str] = set()
    for i, p in enumerate(d.ports):
        if not IDENT_RE.match(p.name):
            out.append(f"ports[{i}].name: invalid identifier {p.name!r}")
        if p.name in seen_ports:
            out.append(f"ports[{i}].name: duplicate port name {p.name!r}")
        seen_ports.add(p.name)
        if p.direction not in (USES, PROVIDES):
            out.append(f"ports[{i}].direction: must be uses or provides")
        _validate_datatype(p.datatype, f"ports[{i}].datatype", out)

    seen_params: set[str] = set()
    for i, p in enumerate(d.params):
        if not IDENT_RE.match(p.name):
            out.append(f"params[{i}].name: invalid identifier {p.name!r}")
        if p.name in seen_params:
            out.append(f"params[{i}].name: duplicate param name {p.name!r}")
        seen_params.add(p.name)
        if p.datatype.kind not in SCALAR_KINDS:
            out.append(f"params[{i}].datatype: params must use scalar kinds")
        elif p.default is not None and not scalar_value_matches(p.datatype.kind, p.default):
            out.append(f"params[{i}].default: does not type-check against {p.datatype.kind}")

    # kind/body: exactly one of implementation/composition, matching kind
    if d.implementation is not None and d.composition is not None:
        out.append("implementation: kind/body mismatch (both implementation and composition present)")
    elif d.kind == "elementary" and d.implementation is None:
        out.append("implementation: kind/body mismatch (elementary descriptor without implementation)")
    elif d.kind == "compound" and d.composition is None:
        out.append("composition: kind/body mismatch (compound descriptor without composition)")
    elif d.kind == "elementary" and d.composition is not None:
        out.append("composition: kind/body mismatch (elementary descriptor carrying a composition)")
    elif d.kind == "compound" and d.implementation is not None:
        out.append("implementation: kind/body mismatch (compound descriptor carrying an implementation)")

    if d.implementation is not None:
        im = d.implementation
        if im.backend not in BACKENDS:
            out.append(f"implementation.backend: unknown backend {im.backend!r}")
        for i, pl in enumerate(im.platforms):
            if not pl:
                out.append(f"implementation.platforms[{i}]: empty platform id")

    if d.composition is not None:
        from .wiring import validate_project_structure
        validate_project_structure(d.composition.project, "composition.project", out)
        node_ids = set(d.composition.project.nodes)
        outer_seen: set[str] = set()
        for inner, outer in sorted(d.composition.promotions.items()):
            node, _, port = inner.rpartition(".")
            if not node or not port:
                out.append(f"composition.promotions: malformed inner reference {inner!r}")
                continue
            if node not in node_ids:
                out.append(f"composition.promotions: promotion target absent: {inner}")
            if outer in outer_seen:
                out.append(f"composition.promotions: duplicate outer port name {outer!r}")
            outer_seen.add(outer)
            if outer not in seen_ports:
                out.append(f"composition.promotions: promoted outer port {outer!r} not in ports")
        for p in d.ports:
            if p.name not in outer_seen:
                out.append(f"ports: compound port {p.name!r} has no promotion")

    return out
