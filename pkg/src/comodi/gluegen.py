"""Wrap plain procedural routines as components without touching their source.

A small signature declaration (file extension ``.sig``) names the
routine, its arguments with ``in``/``out`` modes, and an optional
result::

    routine add(a: real64 in, b: real64 in) -> real64

From the declaration we derive ports (in-args become required uses
ports, out-args and the result become provides ports, the result port
is named ``result``) and emit a self-contained wrapper program that
mediates between the engine's subprocess protocol and a call to the
original routine.  The original source is never read or modified; the
wrapper imports the routine from a module of the same name at run
time.  Emission is deterministic: identical declarations yield
byte-identical glue.

Leading ``#`` comment lines in a declaration become its doc text.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from string import Template

from .model import (
    ComponentDescriptor,
    DataType,
    Doc,
    GlobalName,
    Implementation,
    Behavior,
    PortSpec,
    PROVIDES,
    Representation,
    SCALAR_KINDS,
    USES,
    Version,
    datatype_to_obj,
    validate_descriptor,
)

__all__ = [
    "SignatureError",
    "GlueError",
    "SignatureArg",
    "SignatureDecl",
    "EntryPoint",
    "GlueBundle",
    "parse_signature",
    "derive_ports",
    "emit_glue",
    "TEMPLATES",
]


class SignatureError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line} column {column}: {message}")
        self.line = line
        self.column = column


class GlueError(ValueError):
    pass


@dataclass(frozen=True)
class SignatureArg:
    name: str
    datatype: DataType
    mode: str  # "in" | "out"


@dataclass(frozen=True)
class SignatureDecl:
    routine: str
    args: tuple[SignatureArg, ...]
    result: DataType | None = None
    doc: str = ""


@dataclass(frozen=True)
class EntryPoint:
    entry: str
    routine: str
    ports: tuple[str, ...]


@dataclass(frozen=True)
class GlueBundle:
    glue_source: str
    descriptor_skeleton: ComponentDescriptor
    entry_manifest: tuple[EntryPoint, ...]


# ---------------------------------------------------------------------------
# Tokenizer / parser

_TOKEN_RE = re.compile(r"->|[(),:<>{}]|[A-Za-z_][A-Za-z0-9_]*|[0-9]+|\S")


@dataclass(frozen=True)
class _Token:
    text: str
    line: int
    column: int


def _tokenize(text: str) -> tuple[list[_Token], str]:
    tokens: list[_Token] = []
    doc_lines: list[str] = []
    in_prelude = True
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if in_prelude and stripped.startswith("#"):
            doc_lines.append(stripped.lstrip("#").strip())
            continue
        if stripped:
            in_prelude = False
        code = line.split("#", 1)[0]
        for m in _TOKEN_RE.finditer(code):
            tokens.append(_Token(m.group(0), lineno, m.start() + 1))
    return tokens, "\n".join(doc_lines).strip()


class _Parser:
    def __init__(self, tokens: list[_Token], end_line: int):
        self.tokens = tokens
        self.pos = 0
        self.end_line = end_line

    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, expected: str | None = None, what: str = "") -> _Token:
        tok = self.peek()
        if tok is None:
            raise SignatureError(f"unexpected end of input, expected {what or expected!r}",
                                 self.end_line, 1)
        if expected is not None and tok.text != expected:
            raise SignatureError(f"expected {expected!r}, found {tok.text!r}",
                                 tok.line, tok.column)
        self.pos += 1
        return tok

    def take_ident(self, what: str) -> _Token:
        tok = self.take(what=what)
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok.text):
            raise SignatureError(f"expected {what}, found {tok.text!r}",
                                 tok.line, tok.column)
        return tok

    def parse_type(self) -> DataType:
        tok = self.take(what="type")
        if tok.text in SCALAR_KINDS:
            return DataType.scalar(tok.text)
        if tok.text == "array":
            self.take("<")
            element = self.parse_type()
            self.take(",")
            rank_tok = self.take(what="array rank")
            if not rank_tok.text.isdigit() or int(rank_tok.text) < 1:
                raise SignatureError(f"array rank must be a positive integer, "
                                     f"found {rank_tok.text!r}", rank_tok.line, rank_tok.column)
            self.take(">")
            return DataType.array(element, int(rank_tok.text))
        if tok.text == "composite":
            self.take("{")
            fields: dict[str, DataType] = {}
            while True:
                name_tok = self.take_ident("field name")
                if name_tok.text in fields:
                    raise SignatureError(f"duplicate field {name_tok.text!r}",
                                         name_tok.line, name_tok.column)
                self.take(":")
                fields[name_tok.text] = self.parse_type()
                nxt = self.take(what="',' or '}'")
                if nxt.text == "}":
                    break
                if nxt.text != ",":
                    raise SignatureError(f"expected ',' or '}}', found {nxt.text!r}",
                                         nxt.line, nxt.column)
            return DataType.composite(fields)
        raise SignatureError(f"unknown type {tok.text!r}", tok.line, tok.column)


def parse_signature(text: str) -> SignatureDecl:
    """Parse a routine declaration, rejecting duplicate args and unknown types."""
    tokens, doc = _tokenize(text)
    end_line = text.count("\n") + 1
    p = _Parser(tokens, end_line)

    p.take("routine")
    routine = p.take_ident("routine name").text
    p.take("(")

    args: list[SignatureArg] = []
    seen: set[str] = set()
    if p.peek() is not None and p.peek().text != ")":
        while True:
            name_tok = p.take_ident("argument name")
            if name_tok.text in seen:
                raise SignatureError(f"duplicate argument {name_tok.text!r}",
                                     name_tok.line, name_tok.column)
            seen.add(name_tok.text)
            p.take(":")
            datatype = p.parse_type()
            mode_tok = p.take(what="'in' or 'out'")
            if mode_tok.text not in ("in", "out"):
                raise SignatureError(f"expected 'in' or 'out', found {mode_tok.text!r}",
                                     mode_tok.line, mode_tok.column)
            args.append(SignatureArg(name_tok.text, datatype, mode_tok.text))
            nxt = p.take(what="',' or ')'")
            if nxt.text == ")":
                break
            if nxt.text != ",":
                raise SignatureError(f"expected ',' or ')', found {nxt.text!r}",
                                     nxt.line, nxt.column)
    else:
        p.take(")")

    result = None
    if p.peek() is not None and p.peek().text == "->":
        p.take("->")
        result = p.parse_type()

    trailing = p.peek()
    if trailing is not None:
        raise SignatureError(f"unexpected {trailing.text!r} after declaration",
                             trailing.line, trailing.column)
    if not args and result is None:
        raise SignatureError("declaration has no arguments and no result", 1, 1)

    return SignatureDecl(routine=routine, args=tuple(args), result=result, doc=doc)


# ---------------------------------------------------------------------------
# Port derivation

def derive_ports(sig: SignatureDecl) -> list[PortSpec]:
    """Map in-args to uses ports, out-args and the result to provides ports."""
    ports: list[PortSpec] = []
    for arg in sig.args:
        if sig.result is not None and arg.name == "result":
            raise GlueError(f"argument {arg.name!r} collides with the result port")
        direction = USES if arg.mode == "in" else PROVIDES
        ports.append(PortSpec(arg.name, direction, arg.datatype, required=True,
                              doc=f"{arg.mode}-argument of {sig.routine}"))
    if sig.result is not None:
        ports.append(PortSpec("result", PROVIDES, sig.result, required=True,
                              doc=f"result of {sig.routine}"))
    return ports


# ---------------------------------------------------------------------------
# Glue emission

_PYTHON_GLUE = Template('''#!/usr/bin/env python3
"""Subprocess adapter for routine `$ROUTINE` (generated; do not edit).

Speaks newline-delimited JSON on stdin/stdout: announces a hello
message on start, then answers invoke messages by calling the
unmodified routine imported from the module named after it.  In-args
are passed positionally in declaration order; the routine returns its
outputs in provides-port order (a bare value for a single output, a
tuple otherwise).  Array values cross the wire as {"shape", "data"}
objects and are handed to the routine unchanged.
"""
import json
import sys

from $MODULE import $ROUTINE

COMPONENT = "$COMPONENT"
VERSION = "$VERSION"
IN_ARGS = $IN_ARGS
OUT_PORTS = $OUT_PORTS
PORT_TYPES = $PORT_TYPES


def _convert(port, value):
    kind = PORT_TYPES[port]["kind"]
    if kind == "integer64":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValueError("port %s: expected integer" % port)
        return value
    if kind == "real64":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValueError("port %s: expected number" % port)
        return float(value)
    if kind == "boolean":
        if not isinstance(value, bool):
            raise ValueError("port %s: expected boolean" % port)
        return value
    if kind == "text":
        if not isinstance(value, str):
            raise ValueError("port %s: expected text" % port)
        return value
    if not isinstance(value, dict) or set(value) != {"shape", "data"}:
        raise ValueError("port %s: expected {shape, data} array" % port)
    return value


def _respond(message):
    sys.stdout.write(json.dumps(message) + "\\n")
    sys.stdout.flush()


def main():
    _respond({"msg": "hello", "protocol": 1,
              "component": COMPONENT, "version": VERSION})
    for line in sys.stdin:
        if not line.strip():
            continue
        try:
            message = json.loads(line)
        except ValueError:
            _respond({"msg": "error", "code": "PROTOCOL",
                      "detail": "malformed message"})
            continue
        kind = message.get("msg")
        if kind == "close":
            break
        if kind != "invoke":
            _respond({"msg": "error", "code": "PROTOCOL",
                      "detail": "unknown message kind %r" % (kind,)})
            continue
        try:
            inputs = message.get("inputs") or {}
            call_args = [_convert(name, inputs[name]) for name in IN_ARGS]
            returned = $ROUTINE(*call_args)
            if not OUT_PORTS:
                outputs = {}
            else:
                if len(OUT_PORTS) == 1:
                    returned = (returned,)
                if len(returned) != len(OUT_PORTS):
                    raise ValueError("routine returned %d values, expected %d"
                                     % (len(returned), len(OUT_PORTS)))
                outputs = {port: _convert(port, value)
                           for port, value in zip(OUT_PORTS, returned)}
            _respond({"msg": "result", "outputs": outputs})
        except Exception as exc:
            _respond({"msg": "error", "code": "EXCEPTION", "detail": str(exc)})


if __name__ == "__main__":
    main()
''')


def _supported_by_python_template(t: DataType) -> bool:
    if t.kind in SCALAR_KINDS:
        return True
    if t.kind == "array":
        return t.element.kind in SCALAR_KINDS
    return False


def _name_segment(routine: str) -> str:
    seg = routine.lower().lstrip("_")
    return seg if re.fullmatch(r"[a-z][a-z0-9_]*", seg or "") else "routine"


def _emit_python_subprocess(sig: SignatureDecl, name: GlobalName,
                            version: Version) -> str:
    ports = derive_ports(sig)
    for port in ports:
        if not _supported_by_python_template(port.datatype):
            raise GlueError(f"type of port {port.name!r} unsupported by template "
                            "python-subprocess (scalars and scalar arrays only)")
    in_args = [a.name for a in sig.args if a.mode == "in"]
    out_ports = [p.name for p in ports if p.direction == PROVIDES]
    port_types = {p.name: datatype_to_obj(p.datatype) for p in ports}
    return _PYTHON_GLUE.substitute(
        ROUTINE=sig.routine,
        MODULE=sig.routine,
        COMPONENT=str(name),
        VERSION=str(version),
        IN_ARGS=json.dumps(in_args),
        OUT_PORTS=json.dumps(out_ports),
        PORT_TYPES=json.dumps(port_types),
    )


TEMPLATES = {"python-subprocess": _emit_python_subprocess}


def emit_glue(sig: SignatureDecl, template: str = "python-subprocess",
              name: GlobalName | None = None,
              version: Version | None = None) -> GlueBundle:
    """Emit wrapper source plus a descriptor skeleton for a declaration.

    The component identity defaults to ``local.wrapped.<routine>`` at
    0.1.0; pass ``name``/``version`` to bake a real identity into both
    the glue (announced in its hello message) and the skeleton.
    """
    if template not in TEMPLATES:
        raise GlueError(f"unknown template {template!r} "
                        f"(registered: {', '.join(sorted(TEMPLATES))})")
    if name is None:
        name = GlobalName(("local", "wrapped", _name_segment(sig.routine)))
    if version is None:
        version = Version(0, 1, 0)

    glue_source = TEMPLATES[template](sig, name, version)
    ports = derive_ports(sig)
    skeleton = ComponentDescriptor(
        name=name,
        version=version,
        kind="elementary",
        doc=Doc(summary=sig.doc or f"Wrapped routine {sig.routine}",
                description=sig.doc or f"Adapter-wrapped procedural routine {sig.routine}.",
                authors=()),
        tags=("wrapped",),
        ports=tuple(ports),
        params=(),
        behavior=Behavior(deterministic=True, stateful=False),
        representation=Representation(label=sig.routine, category="wrapped"),
        implementation=Implementation(backend="subprocess", artifact="",
                                      entry="python3 {ARTIFACT}", platforms=("any",)),
    )
    problems = validate_descriptor(skeleton)
    if problems:
        raise GlueError("component identity produces an invalid descriptor: "
                        + "; ".join(problems))
    manifest = (EntryPoint(entry=sig.routine, routine=sig.routine,
                           ports=tuple(p.name for p in ports)),)
    return GlueBundle(glue_source=glue_source, descriptor_skeleton=skeleton,
                      entry_manifest=manifest)
