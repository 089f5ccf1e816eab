"""Project edits: connect, validation, substitutability, replacement."""

import random

import pytest

from comodi.model import GlobalName, Version
from comodi.wiring import (
    PortRef,
    Project,
    ProjectNode,
    WiringError,
    connect,
    parse_project,
    replace_node,
    serialize_project,
    substitutable,
    validate_project,
)

from conftest import EX, build_pipeline


def node(name: str, params=None) -> ProjectNode:
    return ProjectNode(GlobalName.parse(f"{EX}.{name}"), Version(1, 0, 0), params or {})


class TestConnect:
    def test_edge_added(self, resolver):
        p = Project().with_node("c", node("const")).with_node("sq", node("square"))
        p = connect(p, ("c", "x"), ("sq", "x"), resolver)
        assert len(p.edges) == 1

    def test_duplicate_binding(self, resolver, pipeline):
        p = pipeline.with_node("c2", node("const"))
        with pytest.raises(WiringError) as err:
            connect(p, ("c2", "x"), ("sq", "x"), resolver)
        assert err.value.violation.code == "DUPLICATE_BINDING"

    def test_cycle_refused(self, resolver):
        p = Project().with_node("a", node("square")).with_node("b", node("square"))
        p = connect(p, ("a", "y"), ("b", "x"), resolver)
        with pytest.raises(WiringError) as err:
            connect(p, ("b", "y"), ("a", "x"), resolver)
        assert err.value.violation.code == "CYCLE"

    def test_type_mismatch(self, resolver):
        p = Project().with_node("t", node("text_const")).with_node("sq", node("square"))
        with pytest.raises(WiringError) as err:
            connect(p, ("t", "x"), ("sq", "x"), resolver)
        assert err.value.violation.code == "TYPE_MISMATCH"

    def test_dangling_node(self, resolver):
        p = Project().with_node("c", node("const"))
        with pytest.raises(WiringError) as err:
            connect(p, ("c", "x"), ("ghost", "x"), resolver)
        assert err.value.violation.code == "DANGLING_REF"

    def test_wrong_direction(self, resolver):
        p = Project().with_node("c", node("const")).with_node("sq", node("square"))
        with pytest.raises(WiringError) as err:
            connect(p, ("sq", "x"), ("c", "x"), resolver)
        assert err.value.violation.code == "DANGLING_REF"

    def test_atomic_on_error(self, resolver, pipeline):
        before = pipeline
        p2 = pipeline.with_node("c2", node("const"))
        with pytest.raises(WiringError):
            connect(p2, ("c2", "x"), ("sq", "x"), resolver)
        assert p2.edges == before.edges
        assert pipeline == before


class TestValidate:
    def test_valid_pipeline(self, resolver, pipeline):
        assert validate_project(pipeline, resolver) == []

    def test_unbound_required_uses(self, resolver, pipeline):
        broken = Project(nodes=pipeline.nodes, edges=pipeline.edges[:1],
                         meta=pipeline.meta)
        codes = [v.code for v in validate_project(broken, resolver)]
        assert codes == ["UNBOUND_REQUIRED_USES"]

    def test_unknown_component(self, resolver, pipeline):
        p = pipeline.with_node("mystery", ProjectNode(
            GlobalName.parse("org.nowhere.widget"), Version(9, 9, 9), {}))
        codes = {v.code for v in validate_project(p, resolver)}
        assert "UNKNOWN_COMPONENT" in codes

    def test_param_type(self, resolver, pipeline):
        bad = pipeline.with_node("c", node("const", {"value": "two"}))
        codes = [v.code for v in validate_project(bad, resolver)]
        assert codes == ["PARAM_TYPE"]

    def test_unknown_param_name(self, resolver, pipeline):
        bad = pipeline.with_node("c", node("const", {"missing": 1.0}))
        codes = [v.code for v in validate_project(bad, resolver)]
        assert codes == ["PARAM_TYPE"]

    def test_cycle_detected(self, resolver):
        from comodi.wiring import Edge
        p = Project(
            nodes={"a": node("square"), "b": node("square")},
            edges=(Edge(PortRef("a", "y"), PortRef("b", "x")),
                   Edge(PortRef("b", "y"), PortRef("a", "x"))),
        )
        codes = {v.code for v in validate_project(p, resolver)}
        assert "CYCLE" in codes


class TestSubstitutable:
    def test_reflexive(self, resolver, catalog, pipeline):
        own = resolver(GlobalName.parse(f"{EX}.square"), Version(1, 0, 0))
        verdict = substitutable(pipeline, "sq", own, resolver)
        assert verdict.ok

    def test_cube_replaces_square(self, resolver, pipeline):
        cube = resolver(GlobalName.parse(f"{EX}.cube"), Version(1, 0, 0))
        assert substitutable(pipeline, "sq", cube, resolver).ok

    def test_missing_connected_uses_port(self, resolver, pipeline):
        const = resolver(GlobalName.parse(f"{EX}.const"), Version(1, 0, 0))
        verdict = substitutable(pipeline, "sq", const, resolver)
        assert not verdict.ok
        assert any(r.kind == "uses" and r.name == "x" and not r.ok
                   for r in verdict.reports)

    def test_widened_composite_output_ok(self, catalog, resolver):
        # provider grows an extra output field; unchanged consumer still fits
        from comodi.builtins import make_elementary
        from comodi.model import DataType, REAL64
        narrow = DataType.composite({"x": REAL64})
        wide = DataType.composite({"x": REAL64, "extra": REAL64})
        catalog.register(make_elementary("org.test.src_narrow",
                                         provides=[("out", narrow)]),
                         lambda i, p: {"out": {"x": 1.0}})
        catalog.register(make_elementary("org.test.src_wide",
                                         provides=[("out", wide)]),
                         lambda i, p: {"out": {"x": 1.0, "extra": 2.0}})
        catalog.register(make_elementary("org.test.sink", uses=[("inp", narrow)],
                                         provides=[("echo", REAL64)]),
                         lambda i, p: {"echo": i["inp"]["x"]})
        p = Project() \
            .with_node("s", ProjectNode(GlobalName.parse("org.test.src_narrow"),
                                        Version(1, 0, 0), {})) \
            .with_node("k", ProjectNode(GlobalName.parse("org.test.sink"),
                                        Version(1, 0, 0), {}))
        p = connect(p, ("s", "out"), ("k", "inp"), catalog.resolve)
        wide_desc = catalog.resolve(GlobalName.parse("org.test.src_wide"),
                                    Version(1, 0, 0))
        assert substitutable(p, "s", wide_desc, catalog.resolve).ok

    def test_candidate_with_unbound_required_port_refused(self, resolver, pipeline):
        add = resolver(GlobalName.parse(f"{EX}.add"), Version(1, 0, 0))
        verdict = substitutable(pipeline, "sq", add, resolver)
        assert not verdict.ok  # add needs ports a and b; only x is wired here

    def test_transitive_in_fixed_context(self, resolver, pipeline):
        square = resolver(GlobalName.parse(f"{EX}.square"), Version(1, 0, 0))
        cube = resolver(GlobalName.parse(f"{EX}.cube"), Version(1, 0, 0))
        negate = resolver(GlobalName.parse(f"{EX}.negate"), Version(1, 0, 0))
        assert substitutable(pipeline, "sq", cube, resolver).ok
        p2 = replace_node(pipeline, "sq", cube, resolver)
        assert substitutable(p2, "sq", negate, resolver).ok
        assert substitutable(pipeline, "sq", negate, resolver).ok


class TestReplace:
    def test_swap_keeps_edges_and_validity(self, resolver, pipeline):
        cube = resolver(GlobalName.parse(f"{EX}.cube"), Version(1, 0, 0))
        p2 = replace_node(pipeline, "sq", cube, resolver)
        assert p2.edges == pipeline.edges
        assert validate_project(p2, resolver) == []
        assert str(p2.nodes["sq"].component) == f"{EX}.cube"

    def test_incompatible_swap_atomic(self, resolver, pipeline):
        const = resolver(GlobalName.parse(f"{EX}.const"), Version(1, 0, 0))
        with pytest.raises(WiringError) as err:
            replace_node(pipeline, "sq", const, resolver)
        assert err.value.verdict is not None
        assert not err.value.verdict.ok

    def test_random_valid_swaps_preserve_validity(self, catalog, resolver):
        # swap arithmetic nodes among unary real64 components in random pipelines
        rng = random.Random(77)
        unary = [f"{EX}.square", f"{EX}.cube", f"{EX}.negate", f"{EX}.scale"]
        for _ in range(30):
            p = build_pipeline(resolver, value=rng.uniform(-3, 3))
            name = rng.choice(unary)
            candidate = resolver(GlobalName.parse(name), Version(1, 0, 0))
            p2 = replace_node(p, "sq", candidate, resolver)
            assert validate_project(p2, resolver) == []


class TestProjectDocument:
    def test_round_trip(self, pipeline):
        text = serialize_project(pipeline)
        again = parse_project(text)
        assert again.nodes == pipeline.nodes
        assert again.edges == pipeline.edges
        assert serialize_project(again) == text

    def test_structural_rejection(self):
        bad = ('{"meta": {"title": "", "description": ""}, "nodes": {}, '
               '"edges": [{"src": "ghost.x", "dst": "ghost2.y"}]}')
        from comodi.model import DescriptorError
        with pytest.raises(DescriptorError, match="dangling"):
            parse_project(bad)
