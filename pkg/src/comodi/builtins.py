"""In-process catalog of builtin components shipped with the framework.

The catalog doubles as a descriptor resolver (exact name@version
lookup) and as an artifact resolver for the builtin backend, where the
"artifact" is the registered Python callable.  :func:`standard_catalog`
returns a fresh catalog of the example components used by projects,
tests, and the registry seed data.
"""

from __future__ import annotations

from typing import Callable, Iterable, Mapping

import numpy as np

from .engine import ComponentError
from .model import (
    Behavior,
    ComponentDescriptor,
    DataType,
    Doc,
    GlobalName,
    Implementation,
    INTEGER64,
    ParamSpec,
    PortSpec,
    REAL64,
    Representation,
    TEXT,
    Version,
    validate_descriptor,
)

__all__ = ["BuiltinCatalog", "standard_catalog", "make_elementary"]

REAL_ARRAY_1D = DataType.array(REAL64, 1)


class BuiltinCatalog:
    """Registry of (descriptor, callable) pairs keyed by name@version."""

    def __init__(self) -> None:
        self._entries: dict[str, tuple[ComponentDescriptor, Callable]] = {}

    def register(self, descriptor: ComponentDescriptor, fn: Callable) -> None:
        problems = validate_descriptor(descriptor)
        if problems:
            raise ValueError(f"invalid builtin descriptor {descriptor.name}: "
                             + "; ".join(problems))
        self._entries[descriptor.key()] = (descriptor, fn)

    def resolve(self, name: GlobalName, version: Version) -> ComponentDescriptor:
        try:
            return self._entries[f"{name}@{version}"][0]
        except KeyError:
            raise LookupError(f"{name}@{version} is not a builtin component")

    def artifact(self, descriptor: ComponentDescriptor) -> Callable:
        try:
            return self._entries[descriptor.key()][1]
        except KeyError:
            raise LookupError(f"{descriptor.key()} is not a builtin component")

    def descriptors(self) -> Iterable[ComponentDescriptor]:
        return tuple(d for d, _ in self._entries.values())


def make_elementary(name: str, *, uses: Iterable[tuple[str, DataType]] = (),
                    provides: Iterable[tuple[str, DataType]] = (),
                    params: Iterable[ParamSpec] = (),
                    version: str = "1.0.0", summary: str = "",
                    tags: tuple[str, ...] = ("uncategorized",),
                    backend: str = "builtin", artifact: str | None = None,
                    entry: str = "", deterministic: bool = True,
                    optional_uses: frozenset[str] = frozenset()) -> ComponentDescriptor:
    """Convenience constructor for elementary descriptors."""
    gname = GlobalName.parse(name)
    ports = [PortSpec(n, "uses", t, required=n not in optional_uses)
             for n, t in uses]
    ports += [PortSpec(n, "provides", t) for n, t in provides]
    return ComponentDescriptor(
        name=gname,
        version=Version.parse(version),
        kind="elementary",
        doc=Doc(summary=summary, description=summary, authors=("comodi",)),
        tags=tags,
        ports=tuple(ports),
        params=tuple(params),
        behavior=Behavior(deterministic=deterministic, stateful=False),
        representation=Representation(label=gname.segments[-1],
                                      category=tags[0].split("/")[0]),
        implementation=Implementation(backend=backend,
                                      artifact=artifact if artifact is not None else name,
                                      entry=entry, platforms=("any",)),
    )


def standard_catalog() -> BuiltinCatalog:
    """Fresh catalog of the shipped example components."""
    cat = BuiltinCatalog()

    def reg(name, fn, **kwargs):
        cat.register(make_elementary(name, **kwargs), fn)

    reg("org.comodi.examples.const",
        lambda inputs, params: {"x": float(params["value"])},
        provides=[("x", REAL64)],
        params=[ParamSpec("value", REAL64, default=0.0, doc="emitted constant")],
        summary="Emit a constant real number", tags=("math/source",))

    reg("org.comodi.examples.const_int",
        lambda inputs, params: {"x": int(params["value"])},
        provides=[("x", INTEGER64)],
        params=[ParamSpec("value", INTEGER64, default=0, doc="emitted constant")],
        summary="Emit a constant integer", tags=("math/source",))

    reg("org.comodi.examples.text_const",
        lambda inputs, params: {"x": str(params["value"])},
        provides=[("x", TEXT)],
        params=[ParamSpec("value", TEXT, default="", doc="emitted text")],
        summary="Emit a constant text value", tags=("text/source",))

    reg("org.comodi.examples.square",
        lambda inputs, params: {"y": inputs["x"] * inputs["x"]},
        uses=[("x", REAL64)], provides=[("y", REAL64)],
        summary="Square a real number", tags=("math/arithmetic",))

    reg("org.comodi.examples.cube",
        lambda inputs, params: {"y": inputs["x"] ** 3},
        uses=[("x", REAL64)], provides=[("y", REAL64)],
        summary="Cube a real number", tags=("math/arithmetic",))

    reg("org.comodi.examples.negate",
        lambda inputs, params: {"y": -inputs["x"]},
        uses=[("x", REAL64)], provides=[("y", REAL64)],
        summary="Negate a real number", tags=("math/arithmetic",))

    reg("org.comodi.examples.scale",
        lambda inputs, params: {"y": params["factor"] * inputs["x"]},
        uses=[("x", REAL64)], provides=[("y", REAL64)],
        params=[ParamSpec("factor", REAL64, default=1.0, doc="multiplier")],
        summary="Scale a real number by a factor", tags=("math/arithmetic",))

    reg("org.comodi.examples.add",
        lambda inputs, params: {"y": inputs["a"] + inputs["b"]},
        uses=[("a", REAL64), ("b", REAL64)], provides=[("y", REAL64)],
        summary="Add two real numbers", tags=("math/arithmetic",))

    reg("org.comodi.examples.mul",
        lambda inputs, params: {"y": inputs["a"] * inputs["b"]},
        uses=[("a", REAL64), ("b", REAL64)], provides=[("y", REAL64)],
        summary="Multiply two real numbers", tags=("math/arithmetic",))

    reg("org.comodi.examples.square_int",
        lambda inputs, params: {"y": inputs["x"] * inputs["x"]},
        uses=[("x", INTEGER64)], provides=[("y", INTEGER64)],
        summary="Square an integer", tags=("math/arithmetic",))

    reg("org.comodi.examples.negate_int",
        lambda inputs, params: {"y": -inputs["x"]},
        uses=[("x", INTEGER64)], provides=[("y", INTEGER64)],
        summary="Negate an integer", tags=("math/arithmetic",))

    reg("org.comodi.examples.add_int",
        lambda inputs, params: {"y": inputs["a"] + inputs["b"]},
        uses=[("a", INTEGER64), ("b", INTEGER64)], provides=[("y", INTEGER64)],
        summary="Add two integers", tags=("math/arithmetic",))

    reg("org.comodi.examples.mul_int",
        lambda inputs, params: {"y": inputs["a"] * inputs["b"]},
        uses=[("a", INTEGER64), ("b", INTEGER64)], provides=[("y", INTEGER64)],
        summary="Multiply two integers", tags=("math/arithmetic",))

    reg("org.comodi.examples.capture",
        lambda inputs, params: {"captured": inputs["x"]},
        uses=[("x", REAL64)], provides=[("captured", REAL64)],
        summary="Echo the received value into the run report", tags=("io/capture",))

    reg("org.comodi.examples.fail",
        _always_fail,
        uses=[("x", REAL64)], provides=[("y", REAL64)],
        optional_uses=frozenset({"x"}),
        summary="Always report a component error (test helper)", tags=("io/testing",))

    reg("org.comodi.examples.array_source",
        lambda inputs, params: {"y": np.full(int(params["n"]), params["fill"],
                                             dtype=np.float64)},
        provides=[("y", REAL_ARRAY_1D)],
        params=[ParamSpec("n", INTEGER64, default=1, doc="element count"),
                ParamSpec("fill", REAL64, default=0.0, doc="fill value")],
        summary="Emit a filled 1-d real array", tags=("array/source",))

    reg("org.comodi.examples.array_scale",
        lambda inputs, params: {"y": inputs["x"] * params["factor"]},
        uses=[("x", REAL_ARRAY_1D)], provides=[("y", REAL_ARRAY_1D)],
        params=[ParamSpec("factor", REAL64, default=1.0, doc="multiplier")],
        summary="Scale a 1-d real array elementwise", tags=("array/ops",))

    reg("org.comodi.examples.array_sum",
        lambda inputs, params: {"y": float(np.sum(inputs["x"]))},
        uses=[("x", REAL_ARRAY_1D)], provides=[("y", REAL64)],
        summary="Sum a 1-d real array", tags=("array/ops",))

    return cat


def _always_fail(inputs: Mapping[str, object], params: Mapping[str, object]) -> dict:
    raise ComponentError("BOOM", "component configured to fail")
