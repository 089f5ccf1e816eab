"""comodi: a component-integration framework for computational science.

Plain procedural routines become described components with uses/provides
ports, get published to a registry, and are composed into validated
dataflow projects that run through pluggable backends.

Module map:

- :mod:`comodi.model` — descriptors, the port/param type system, canonical files
- :mod:`comodi.wiring` — projects, compatibility, scheduling, compounds
- :mod:`comodi.gluegen` — signature DSL and generated wrapper code
- :mod:`comodi.engine` — values, backends, the subprocess protocol, runs
- :mod:`comodi.builtins` — shipped in-process example components
- :mod:`comodi.registry` — the component registry service, store, and client
- :mod:`comodi.buildsvc` — the compilation service and client
- :mod:`comodi.cli` — the ``comodi`` command and the project serve API
"""

from .model import (
    ComponentDescriptor,
    DataType,
    DescriptorError,
    GlobalName,
    PortSpec,
    ParamSpec,
    Version,
    parse_descriptor,
    serialize_descriptor,
    validate_descriptor,
)
from .wiring import (
    Project,
    Schedule,
    Violation,
    WiringError,
    compose_compound,
    connect,
    flatten_compound,
    ports_compatible,
    replace_node,
    schedule,
    substitutable,
    validate_project,
)
from .engine import (
    RunReport,
    Value,
    decode_value,
    encode_value,
    instantiate,
    invoke,
    make_value,
    run,
)
from .gluegen import GlueBundle, SignatureDecl, derive_ports, emit_glue, parse_signature

__version__ = "0.1.0"

__all__ = [
    "ComponentDescriptor", "DataType", "DescriptorError", "GlobalName", "PortSpec",
    "ParamSpec", "Version", "parse_descriptor", "serialize_descriptor",
    "validate_descriptor",
    "Project", "Schedule", "Violation", "WiringError", "compose_compound", "connect",
    "flatten_compound", "ports_compatible", "replace_node", "schedule", "substitutable",
    "validate_project",
    "RunReport", "Value", "decode_value", "encode_value", "instantiate", "invoke",
    "make_value", "run",
    "GlueBundle", "SignatureDecl", "derive_ports", "emit_glue", "parse_signature",
    "__version__",
]
