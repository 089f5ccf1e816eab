"""Project execution: runtime values, component backends, and run reports.

Values pair a datatype with an immutable payload: Python scalars for
the scalar kinds, read-only NumPy arrays for numeric/boolean arrays,
:class:`GenericArray` for arrays over other element kinds, read-only
field maps for composites, and ``bytes`` for opaques.  Within a
process, values move across edges by reference; every fan-out consumer
observes the identical object.

Three backends instantiate elementary components:

``builtin``
    The artifact resolver returns a callable
    ``fn(inputs: Mapping[str, payload], params: Mapping[str, scalar]) ->
    Mapping[str, payload]``; inputs and outputs are payloads keyed by
    port name.

``subprocess``
    The artifact resolver returns the path of an executable artifact.
    The child speaks newline-delimited UTF-8 JSON on stdin/stdout: it
    announces ``{"msg": "hello", "protocol": 1, "component": ...,
    "version": ...}`` on start, receives ``{"msg": "invoke", "params":
    {...}, "inputs": {...}}``, and answers ``{"msg": "result",
    "outputs": {...}}`` or ``{"msg": "error", "code": ..., "detail":
    ...}``.  One invoke per process unless the descriptor is stateful,
    in which case invokes repeat and ``{"msg": "close"}`` ends it.

``plugin``
    The artifact resolver returns the path of a Python source file;
    ``entry`` names a callable in it with the builtin contract.

:func:`run` executes a validated project level by level per the wiring
schedule, exactly once per node.  A node error skips only its
downstream cone; independent branches complete.  The report records
per-node wall times, statuses, outputs, and the project hash.
"""

from __future__ import annotations

import base64
import hashlib
import importlib.util
import json
import math
import queue
import shlex
import subprocess
import sys
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Any, Callable, Mapping

import numpy as np

from .model import ComponentDescriptor, DataType, PROVIDES, USES, \
    coerce_scalar, scalar_value_matches
from .wiring import Project, PortRef, Resolver, Violation, flatten_project, \
    ports_compatible, schedule, serialize_project, validate_project

__all__ = [
    "PROTOCOL_VERSION",
    "EngineError",
    "ComponentError",
    "ProtocolError",
    "ProjectNotRunnable",
    "GenericArray",
    "Value",
    "make_value",
    "payload_equal",
    "value_to_obj",
    "value_from_obj",
    "encode_value",
    "decode_value",
    "ComponentInstance",
    "ArtifactResolver",
    "instantiate",
    "invoke",
    "close_instance",
    "NodeRun",
    "RunReport",
    "run",
    "report_to_obj",
    "serialize_report",
    "current_platform",
]

PROTOCOL_VERSION = 1
HANDSHAKE_TIMEOUT_S = 10.0

NUMPY_DTYPES = {"integer64": np.int64, "real64": np.float64, "boolean": np.bool_}

ArtifactResolver = Callable[[ComponentDescriptor], object]


class EngineError(RuntimeError):
    def __init__(self, message: str, code: str = "ENGINE"):
        super().__init__(message)
        self.code = code


class ComponentError(EngineError):
    """An error reported by a component itself (code + detail surfaced)."""

    def __init__(self, code: str, detail: str):
        super().__init__(f"{code}: {detail}", code=code)
        self.detail = detail


class ProtocolError(EngineError):
    def __init__(self, message: str):
        super().__init__(message, code="PROTOCOL")


class ProjectNotRunnable(EngineError):
    def __init__(self, violations: list[Violation]):
        super().__init__("project does not validate: "
                         + "; ".join(str(v) for v in violations), code="VALIDATION")
        self.violations = violations


def current_platform() -> str:
    return sys.platform


# ---------------------------------------------------------------------------
# Values

@dataclass(frozen=True, eq=False)
class GenericArray:
    """Flat row-major array payload for non-numeric element kinds."""

    shape: tuple[int, ...]
    items: tuple


class Value:
    """An immutable runtime value: a datatype plus a matching payload."""

    __slots__ = ("datatype", "payload")

    def __init__(self, datatype: DataType, payload: object):
        object.__setattr__(self, "datatype", datatype)
        object.__setattr__(self, "payload", payload)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("Value is immutable")

    def __repr__(self) -> str:
        return f"Value({self.datatype.kind}, {self.payload!r})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Value):
            return NotImplemented
        return self.datatype == other.datatype \
            and payload_equal(self.datatype, self.payload, other.payload)

    def __ne__(self, other: object) -> bool:
        eq = self.__eq__(other)
        return NotImplemented if eq is NotImplemented else not eq

    __hash__ = None


def _shape_product(shape: tuple[int, ...]) -> int:
    return math.prod(shape)


def _check_extents(t: DataType, shape: tuple[int, ...]) -> None:
    if len(shape) != t.rank:
        raise EngineError(f"array payload has {len(shape)} dimensions, rank is {t.rank}",
                          code="TYPE")
    if t.extents is not None:
        for i, want in enumerate(t.extents):
            if want is not None and shape[i] != want:
                raise EngineError(f"array extent {i} is {shape[i]}, declared {want}",
                                  code="TYPE")


def make_value(datatype: DataType, payload: object) -> Value:
    """Validate and normalize a payload against a datatype.

    Numeric/boolean arrays become read-only C-contiguous NumPy arrays
    (the given array object is frozen in place, not copied); composites
    become read-only mappings.  Raises :class:`EngineError` with code
    ``TYPE`` on any mismatch.
    """
    kind = datatype.kind
    if kind in ("integer64", "real64", "boolean", "text"):
        payload = coerce_scalar(kind, payload)
        if not scalar_value_matches(kind, payload):
            raise EngineError(f"payload {payload!r} does not match scalar kind {kind}",
                              code="TYPE")
        return Value(datatype, payload)
    if kind == "array":
        element = datatype.element
        if element.kind in NUMPY_DTYPES:
            dtype = NUMPY_DTYPES[element.kind]
            try:
                arr = np.asarray(payload, dtype=dtype, order="C")
            except (TypeError, ValueError) as exc:
                raise EngineError(f"array payload rejected: {exc}", code="TYPE") from exc
            _check_extents(datatype, arr.shape)
            arr.flags.writeable = False
            return Value(datatype, arr)
        if isinstance(payload, GenericArray):
            shape, items = payload.shape, payload.items
        elif isinstance(payload, (list, tuple)):
            shape, items = (len(payload),), tuple(payload)
        else:
            raise EngineError("array payload must be a GenericArray or a flat sequence",
                              code="TYPE")
        _check_extents(datatype, shape)
        if len(items) != _shape_product(shape):
            raise EngineError(f"array payload has {len(items)} items, shape {shape} "
                              f"needs {_shape_product(shape)}", code="TYPE")
        checked = tuple(make_value(element, item).payload for item in items)
        return Value(datatype, GenericArray(shape=tuple(shape), items=checked))
    if kind == "composite":
        if not isinstance(payload, Mapping):
            raise EngineError("composite payload must be a mapping", code="TYPE")
        declared = datatype.field_map()
        extra = set(payload) - set(declared)
        missing = set(declared) - set(payload)
        if extra or missing:
            raise EngineError(f"composite payload fields do not match declaration "
                              f"(missing {sorted(missing)}, extra {sorted(extra)})",
                              code="TYPE")
        fields = {name: make_value(declared[name], payload[name]).payload
                  for name in declared}
        return Value(datatype, MappingProxyType(fields))
    if kind == "opaque":
        if not isinstance(payload, (bytes, bytearray)):
            raise EngineError("opaque payload must be bytes", code="TYPE")
        return Value(datatype, bytes(payload))
    raise EngineError(f"cannot build value of kind {kind!r}", code="TYPE")


def payload_equal(t: DataType, a: object, b: object) -> bool:
    """Structural payload equality directed by the datatype."""
    if t.kind == "array":
        if t.element.kind in NUMPY_DTYPES:
            return isinstance(a, np.ndarray) and isinstance(b, np.ndarray) \
                and a.dtype == b.dtype and np.array_equal(a, b)
        if not (isinstance(a, GenericArray) and isinstance(b, GenericArray)):
            return False
        return a.shape == b.shape and all(
            payload_equal(t.element, x, y) for x, y in zip(a.items, b.items))
    if t.kind == "composite":
        fields = t.field_map()
        return set(a) == set(b) == set(fields) and all(
            payload_equal(fields[name], a[name], b[name]) for name in fields)
    return a == b


# ---------------------------------------------------------------------------
# Wire codec

def value_to_obj(v: Value) -> Any:
    """JSON-ready wire form of a value."""
    t = v.datatype
    if t.kind in ("integer64", "real64", "boolean", "text"):
        return v.payload
    if t.kind == "array":
        if t.element.kind in NUMPY_DTYPES:
            arr: np.ndarray = v.payload
            return {"shape": list(arr.shape), "data": arr.ravel(order="C").tolist()}
        ga: GenericArray = v.payload
        return {"shape": list(ga.shape),
                "data": [value_to_obj(Value(t.element, item)) for item in ga.items]}
    if t.kind == "composite":
        return {name: value_to_obj(Value(ft, v.payload[name]))
                for name, ft in t.fields or ()}
    if t.kind == "opaque":
        return base64.b64encode(v.payload).decode("ascii")
    raise EngineError(f"cannot encode value of kind {t.kind!r}", code="TYPE")


def value_from_obj(obj: Any, expected: DataType) -> Value:
    """Decode a wire form against an expected datatype."""
    kind = expected.kind
    if kind in ("integer64", "real64", "boolean", "text"):
        return make_value(expected, obj)
    if kind == "array":
        if not isinstance(obj, dict) or set(obj) != {"shape", "data"}:
            raise EngineError("array wire form must be {shape, data}", code="TYPE")
        shape = obj["shape"]
        if not isinstance(shape, list) or not all(
                isinstance(n, int) and not isinstance(n, bool) and n >= 0 for n in shape):
            raise EngineError("array shape must be a list of non-negative integers",
                              code="TYPE")
        data = obj["data"]
        if not isinstance(data, list):
            raise EngineError("array data must be a flat list", code="TYPE")
        if len(data) != _shape_product(tuple(shape)):
            raise EngineError(f"array data has {len(data)} entries, shape {shape} "
                              f"needs {_shape_product(tuple(shape))}", code="TYPE")
        element = expected.element
        if element.kind in NUMPY_DTYPES:
            checked = [make_value(element, item).payload for item in data]
            arr = np.asarray(checked, dtype=NUMPY_DTYPES[element.kind]).reshape(shape)
            return make_value(expected, arr)
        items = tuple(value_from_obj(item, element).payload for item in data)
        return make_value(expected, GenericArray(shape=tuple(shape), items=items))
    if kind == "composite":
        if not isinstance(obj, dict):
            raise EngineError("composite wire form must be an object", code="TYPE")
        declared = expected.field_map()
        if set(obj) != set(declared):
            raise EngineError("composite wire fields do not match declaration", code="TYPE")
        return make_value(expected, {name: value_from_obj(obj[name], ft).payload
                                     for name, ft in declared.items()})
    if kind == "opaque":
        if not isinstance(obj, str):
            raise EngineError("opaque wire form must be a base64 string", code="TYPE")
        try:
            raw = base64.b64decode(obj.encode("ascii"), validate=True)
        except Exception as exc:
            raise EngineError(f"invalid base64 payload: {exc}", code="TYPE") from exc
        return make_value(expected, raw)
    raise EngineError(f"cannot decode value of kind {kind!r}", code="TYPE")


def encode_value(v: Value) -> str:
    """Canonical wire text; deterministic for equal values."""
    return json.dumps(value_to_obj(v), sort_keys=True, separators=(",", ":"))


def decode_value(text: str, expected: DataType) -> Value:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise EngineError(f"malformed wire text: {exc.msg}", code="TYPE") from exc
    return value_from_obj(obj, expected)


# ---------------------------------------------------------------------------
# Instances and backends

@dataclass
class ComponentInstance:
    descriptor: ComponentDescriptor
    backend: str
    handle: object
    state: str = "live"  # live | closed


class _SubprocessHandle:
    """A child process plus a line reader thread feeding a queue."""

    def __init__(self, argv: list[str]):
        try:
            self.proc = subprocess.Popen(argv, stdin=subprocess.PIPE,
                                         stdout=subprocess.PIPE,
                                         stderr=subprocess.DEVNULL)
        except OSError as exc:
            raise EngineError(f"cannot start component process {argv!r}: {exc}",
                              code="ARTIFACT_MISSING") from exc
        self._lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self) -> None:
        for raw in self.proc.stdout:
            self._lines.put(raw)
        self._lines.put(None)

    def read_message(self, timeout: float | None = None) -> dict:
        try:
            raw = self._lines.get(timeout=timeout)
        except queue.Empty:
            raise ProtocolError("timed out waiting for component message")
        if raw is None:
            raise ProtocolError("component closed its output stream")
        try:
            msg = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ProtocolError(f"malformed protocol message: {exc}") from exc
        if not isinstance(msg, dict) or not isinstance(msg.get("msg"), str):
            raise ProtocolError("protocol message must be an object with a 'msg' field")
        return msg

    def write_message(self, msg: dict) -> None:
        try:
            self.proc.stdin.write((json.dumps(msg) + "\n").encode("utf-8"))
            self.proc.stdin.flush()
        except (OSError, ValueError) as exc:
            raise ProtocolError(f"cannot write to component process: {exc}") from exc

    def shutdown(self) -> None:
        for stream in (self.proc.stdin,):
            try:
                stream.close()
            except OSError:
                pass
        try:
            self.proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self.proc.kill()
            self.proc.wait()


def _load_plugin(path: Path, entry: str) -> Callable:
    spec = importlib.util.spec_from_file_location(f"comodi_plugin_{path.stem}", path)
    if spec is None or spec.loader is None:
        raise EngineError(f"cannot load plugin module {path}", code="ARTIFACT_MISSING")
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    fn = getattr(module, entry, None)
    if fn is None or not callable(fn):
        raise EngineError(f"entry symbol {entry!r} absent in plugin {path}",
                          code="ENTRY_MISSING")
    return fn


def instantiate(d: ComponentDescriptor, artifact_resolver: ArtifactResolver) -> ComponentInstance:
    """Create a live instance of an elementary component.

    For the subprocess backend this completes the hello handshake and
    checks that the announced name, version and protocol match the
    descriptor exactly.
    """
    if d.kind != "elementary" or d.implementation is None:
        raise EngineError(f"{d.name} is not an elementary component", code="KIND")
    impl = d.implementation
    platforms = impl.platforms
    if "any" not in platforms and current_platform() not in platforms:
        raise EngineError(f"no artifact for platform {current_platform()!r} "
                          f"(component targets {list(platforms)})", code="ARTIFACT_MISSING")
    try:
        artifact = artifact_resolver(d)
    except LookupError as exc:
        raise EngineError(f"artifact missing for {d.key()}: {exc}",
                          code="ARTIFACT_MISSING") from exc

    if impl.backend == "builtin":
        if not callable(artifact):
            raise EngineError(f"builtin artifact for {d.key()} is not callable",
                              code="ARTIFACT_MISSING")
        return ComponentInstance(d, "builtin", artifact)

    if impl.backend == "plugin":
        fn = _load_plugin(Path(str(artifact)), impl.entry)
        return ComponentInstance(d, "plugin", fn)

    if impl.backend == "subprocess":
        path = Path(str(artifact))
        if not path.exists():
            raise EngineError(f"artifact missing: {path}", code="ARTIFACT_MISSING")
        if impl.entry:
            argv = [part.replace("{ARTIFACT}", str(path))
                    for part in shlex.split(impl.entry)]
        else:
            argv = [str(path)]
        handle = _SubprocessHandle(argv)
        try:
            hello = handle.read_message(timeout=HANDSHAKE_TIMEOUT_S)
            if hello.get("msg") != "hello":
                raise ProtocolError(f"expected hello, got {hello.get('msg')!r}")
            if hello.get("protocol") != PROTOCOL_VERSION:
                raise EngineError(f"handshake mismatch: protocol {hello.get('protocol')!r}, "
                                  f"host speaks {PROTOCOL_VERSION}", code="HANDSHAKE")
            if hello.get("component") != str(d.name) or hello.get("version") != str(d.version):
                raise EngineError("handshake mismatch: artifact announces "
                                  f"{hello.get('component')}@{hello.get('version')}, "
                                  f"descriptor is {d.key()}", code="HANDSHAKE")
        except EngineError:
            handle.shutdown()
            raise
        return ComponentInstance(d, "subprocess", handle)

    raise EngineError(f"unsupported backend {impl.backend!r}", code="BACKEND")


def _merge_params(d: ComponentDescriptor, params: Mapping[str, object]) -> dict[str, object]:
    merged: dict[str, object] = {}
    for spec in d.params:
        if spec.name in params:
            value = coerce_scalar(spec.datatype.kind, params[spec.name])
            if not scalar_value_matches(spec.datatype.kind, value):
                raise EngineError(f"param {spec.name!r} does not match "
                                  f"{spec.datatype.kind}", code="TYPE")
            merged[spec.name] = value
        elif spec.default is not None:
            merged[spec.name] = spec.default
        else:
            raise EngineError(f"param {spec.name!r} has no default and no binding",
                              code="TYPE")
    unknown = set(params) - {spec.name for spec in d.params}
    if unknown:
        raise EngineError(f"unknown params {sorted(unknown)}", code="TYPE")
    return merged


def _check_inputs(d: ComponentDescriptor, inputs: Mapping[str, Value]) -> None:
    uses = {p.name: p for p in d.ports_by_direction(USES)}
    unknown = set(inputs) - set(uses)
    if unknown:
        raise EngineError(f"unknown input ports {sorted(unknown)}", code="TYPE")
    for name, port in uses.items():
        if name not in inputs:
            if port.required:
                raise EngineError(f"missing required input {name!r}", code="TYPE")
            continue
        value = inputs[name]
        if not isinstance(value, Value):
            raise EngineError(f"input {name!r} is not a Value", code="TYPE")
        verdict = ports_compatible(value.datatype, port.datatype)
        if not verdict.ok:
            raise EngineError(f"input {name!r}: {verdict.reason}", code="TYPE")


def _collect_outputs(d: ComponentDescriptor, produced: Mapping[str, object],
                     already_values: bool = False) -> dict[str, Value]:
    provides = {p.name: p for p in d.ports_by_direction(PROVIDES)}
    extra = set(produced) - set(provides)
    if extra:
        raise ComponentError("PROTOCOL", f"component produced unknown ports {sorted(extra)}")
    outputs: dict[str, Value] = {}
    for name, port in provides.items():
        if name not in produced:
            raise ComponentError("PROTOCOL", f"component produced no value for port {name!r}")
        outputs[name] = produced[name] if already_values \
            else make_value(port.datatype, produced[name])
    return outputs


def invoke(instance: ComponentInstance, inputs: Mapping[str, Value],
           params: Mapping[str, object] | None = None) -> dict[str, Value]:
    """Call a live instance once, returning one type-correct Value per provides port."""
    if instance.state != "live":
        raise EngineError("instance is closed", code="CLOSED")
    d = instance.descriptor
    merged = _merge_params(d, params or {})
    _check_inputs(d, inputs)

    if instance.backend in ("builtin", "plugin"):
        payloads = {name: v.payload for name, v in inputs.items()}
        try:
            produced = instance.handle(payloads, merged)
        except ComponentError:
            raise
        except Exception as exc:
            raise ComponentError("EXCEPTION", f"{type(exc).__name__}: {exc}") from exc
        return _collect_outputs(d, dict(produced))

    if instance.backend == "subprocess":
        handle: _SubprocessHandle = instance.handle
        wire_inputs = {name: value_to_obj(v) for name, v in inputs.items()}
        handle.write_message({"msg": "invoke", "params": merged, "inputs": wire_inputs})
        try:
            reply = handle.read_message()
        except ProtocolError:
            if not d.behavior.stateful:
                instance.state = "closed"
                handle.shutdown()
            raise
        kind = reply.get("msg")
        if kind == "error":
            err = ComponentError(str(reply.get("code", "ERROR")),
                                 str(reply.get("detail", "")))
        elif kind != "result":
            err = ProtocolError(f"unknown message kind {kind!r}")
        else:
            err = None
        if not d.behavior.stateful:
            instance.state = "closed"
            handle.shutdown()
        if err is not None:
            raise err
        produced = reply.get("outputs")
        if not isinstance(produced, dict):
            raise ProtocolError("result message lacks an outputs object")
        provides = {p.name: p for p in d.ports_by_direction(PROVIDES)}
        decoded: dict[str, Value] = {}
        for name, obj in produced.items():
            if name not in provides:
                raise ComponentError("PROTOCOL", f"component produced unknown port {name!r}")
            decoded[name] = value_from_obj(obj, provides[name].datatype)
        return _collect_outputs(d, decoded, already_values=True)

    raise EngineError(f"unsupported backend {instance.backend!r}", code="BACKEND")


def close_instance(instance: ComponentInstance) -> None:
    if instance.state == "closed":
        return
    instance.state = "closed"
    if instance.backend == "subprocess":
        handle: _SubprocessHandle = instance.handle
        if instance.descriptor.behavior.stateful:
            try:
                handle.write_message({"msg": "close"})
            except ProtocolError:
                pass
        handle.shutdown()


# ---------------------------------------------------------------------------
# Project runs

@dataclass(frozen=True)
class NodeRun:
    node_id: str
    start_ns: int
    stop_ns: int
    status: str  # ok | error | skipped
    outputs: Mapping[str, Value] = field(default_factory=dict)
    error_code: str = ""
    error_detail: str = ""


@dataclass(frozen=True)
class RunReport:
    nodes: tuple[NodeRun, ...]
    wall_ns: int
    node_count: int
    project_hash: str

    def node(self, node_id: str) -> NodeRun:
        for n in self.nodes:
            if n.node_id == node_id:
                return n
        raise KeyError(node_id)


def project_hash(p: Project) -> str:
    return hashlib.sha256(serialize_project(p).encode("utf-8")).hexdigest()


def run(p: Project, resolver: Resolver, artifact_resolver: ArtifactResolver) -> RunReport:
    """Execute a validated project and report per-node results.

    Compound nodes are flattened to their elementary constituents
    first.  Nodes run level by level in schedule order, each exactly
    once; an erroring node marks its whole downstream cone skipped.
    """
    violations = validate_project(p, resolver)
    if violations:
        raise ProjectNotRunnable(violations)
    phash = project_hash(p)

    flat = p
    if any(resolver(n.component, n.version).kind == "compound" for n in p.nodes.values()):
        flat = flatten_project(p, resolver)

    sched = schedule(flat)
    preds: dict[str, set[str]] = {n: set() for n in flat.nodes}
    for e in flat.edges:
        preds[e.dst.node].add(e.src.node)

    run_start = time.time_ns()
    values: dict[PortRef, Value] = {}
    not_ok: set[str] = set()
    node_runs: list[NodeRun] = []

    for level in sched.levels:
        for node_id in level:
            bad_upstream = sorted(preds[node_id] & not_ok)
            if bad_upstream:
                now = time.time_ns()
                not_ok.add(node_id)
                node_runs.append(NodeRun(node_id, now, now, "skipped",
                                         error_code="SKIPPED",
                                         error_detail="upstream failed: "
                                         + ", ".join(bad_upstream)))
                continue
            node = flat.nodes[node_id]
            descriptor = resolver(node.component, node.version)
            inputs = {e.dst.port: values[e.src] for e in flat.edges
                      if e.dst.node == node_id}
            start = time.time_ns()
            instance = None
            try:
                instance = instantiate(descriptor, artifact_resolver)
                outputs = invoke(instance, inputs, node.params)
            except EngineError as exc:
                not_ok.add(node_id)
                node_runs.append(NodeRun(node_id, start, time.time_ns(), "error",
                                         error_code=exc.code, error_detail=str(exc)))
                continue
            finally:
                if instance is not None:
                    close_instance(instance)
            stop = time.time_ns()
            for port_name, value in outputs.items():
                values[PortRef(node_id, port_name)] = value
            node_runs.append(NodeRun(node_id, start, stop, "ok",
                                     outputs=MappingProxyType(outputs)))

    return RunReport(nodes=tuple(node_runs), wall_ns=time.time_ns() - run_start,
                     node_count=len(flat.nodes), project_hash=phash)


def report_to_obj(r: RunReport) -> dict:
    nodes = []
    for n in r.nodes:
        entry: dict[str, Any] = {
            "id": n.node_id,
            "start_ns": n.start_ns,
            "stop_ns": n.stop_ns,
            "status": n.status,
            "outputs": {name: value_to_obj(v) for name, v in sorted(n.outputs.items())},
        }
        if n.status != "ok":
            entry["error"] = {"code": n.error_code, "detail": n.error_detail}
        nodes.append(entry)
    return {
        "project_hash": r.project_hash,
        "totals": {"wall_ns": r.wall_ns, "nodes": r.node_count},
        "nodes": nodes,
    }


def serialize_report(r: RunReport) -> str:
    return json.dumps(report_to_obj(r), indent=2, ensure_ascii=False) + "\n"
