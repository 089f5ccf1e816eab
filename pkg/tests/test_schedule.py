"""Scheduling: longest-path levels, determinism, exhaustive and random oracles."""

import random

import pytest

from comodi.model import GlobalName, Version
from comodi.wiring import Edge, PortRef, Project, ProjectNode, WiringError, schedule

import generators
from oracles import check_schedule, longest_path_levels

NAME = GlobalName(("org", "x", "thing"))
V1 = Version(1, 0, 0)


def project_from_dag(n: int, edges: list[tuple[int, int]], order=None) -> Project:
    ids = [f"node{i:02d}" for i in range(n)]
    insertion = order if order is not None else range(n)
    nodes = {ids[i]: ProjectNode(NAME, V1, {}) for i in insertion}
    edge_objs = tuple(Edge(PortRef(ids[a], "out"), PortRef(ids[b], f"in{a}"))
                      for a, b in edges)
    return Project(nodes=nodes, edges=edge_objs)


def test_chain():
    p = project_from_dag(3, [(0, 1), (1, 2)])
    assert schedule(p).levels == (("node00",), ("node01",), ("node02",))


def test_diamond():
    p = project_from_dag(4, [(0, 1), (0, 2), (1, 3), (2, 3)])
    assert schedule(p).levels == (("node00",), ("node01", "node02"), ("node03",))


def test_cycle_rejected():
    p = Project(
        nodes={"a": ProjectNode(NAME, V1, {}), "b": ProjectNode(NAME, V1, {})},
        edges=(Edge(PortRef("a", "out"), PortRef("b", "in")),
               Edge(PortRef("b", "out"), PortRef("a", "in"))),
    )
    with pytest.raises(WiringError) as err:
        schedule(p)
    assert err.value.violation.code == "CYCLE"


def test_exhaustive_small_dags():
    for n, edges in generators.all_dags(5):
        sched = schedule(project_from_dag(n, edges))
        problems = check_schedule(n, edges, [list(level) for level in sched.levels],
                                  lambda i: f"node{i:02d}")
        assert problems == [], (n, edges, problems)
        # longest-path property against the path-enumeration oracle
        want = longest_path_levels(n, edges)
        for i in range(n):
            assert sched.level_of(f"node{i:02d}") == want[i], (n, edges, i)


def test_random_dags_and_insertion_invariance():
    rng = random.Random(1234)
    for _ in range(300):
        n, edges = generators.random_dag(rng)
        base = project_from_dag(n, edges)
        sched = schedule(base)
        problems = check_schedule(n, edges, [list(level) for level in sched.levels],
                                  lambda i: f"node{i:02d}")
        assert problems == []
        order = list(range(n))
        rng.shuffle(order)
        assert schedule(project_from_dag(n, edges, order)).levels == sched.levels


def test_schedule_order_helper():
    p = project_from_dag(3, [(0, 2)])
    sched = schedule(p)
    assert set(sched.order()) == set(p.nodes)
