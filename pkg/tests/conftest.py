"""Shared fixtures: catalogs, resolvers, loopback services, project builders."""

from __future__ import annotations

import sys

import pytest

from comodi.builtins import standard_catalog
from comodi.buildsvc import BuildApp, Toolchain
from comodi.httpjson import start_server
from comodi.model import GlobalName, Version
from comodi.registry import RegistryApp, RegistryStore
from comodi.resolve import StandardArtifactResolver
from comodi.wiring import Project, ProjectNode, connect

EX = "org.comodi.examples"

STUB_COPY = Toolchain(platform="any", language="stub",
                      command=("/bin/sh", "-c", "cat {SRC_DIR}/* > {OUT_FILE}"))
STUB_FAIL = Toolchain(platform="any", language="stub-fail",
                      command=("/bin/sh", "-c",
                               "echo 'main.c:3: something broke' >&2; exit 1"))
PYTHON_ZIPAPP = Toolchain(platform="any", language="python",
                          command=(sys.executable, "-m", "zipapp", "{SRC_DIR}",
                                   "-o", "{OUT_FILE}", "-m", "{ENTRY}"))


@pytest.fixture
def catalog():
    return standard_catalog()


@pytest.fixture
def resolver(catalog):
    return catalog.resolve


@pytest.fixture
def artifacts(catalog, tmp_path):
    return StandardArtifactResolver(catalog, search_dirs=[tmp_path])


def build_pipeline(resolver, *, value=2.0):
    """const(value) -> square -> capture, the canonical demo project."""
    p = Project()
    p = p.with_node("c", ProjectNode(GlobalName.parse(f"{EX}.const"),
                                     Version(1, 0, 0), {"value": value}))
    p = p.with_node("sq", ProjectNode(GlobalName.parse(f"{EX}.square"),
                                      Version(1, 0, 0), {}))
    p = p.with_node("cap", ProjectNode(GlobalName.parse(f"{EX}.capture"),
                                       Version(1, 0, 0), {}))
    p = connect(p, ("c", "x"), ("sq", "x"), resolver)
    p = connect(p, ("sq", "y"), ("cap", "x"), resolver)
    return p


@pytest.fixture
def pipeline(resolver):
    return build_pipeline(resolver)


# Acceptance criteria report one PASS/FAIL line each in the terminal summary.
ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{outcome}  {name}")


@pytest.fixture
def registry_server(tmp_path):
    store = RegistryStore(tmp_path / "registry")
    server = start_server(RegistryApp(store))
    host, port = server.server_address[:2]
    yield f"http://{host}:{port}", store
    server.shutdown()
    server.server_close()


@pytest.fixture
def build_server():
    server = start_server(BuildApp([STUB_COPY, STUB_FAIL, PYTHON_ZIPAPP]))
    host, port = server.server_address[:2]
    yield f"http://{host}:{port}"
    server.shutdown()
    server.server_close()
